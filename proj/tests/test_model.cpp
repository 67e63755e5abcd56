#include "doctest.h"
#include "helpers.hpp"

#include "vecspin/error.hpp"
#include "vecspin/model.hpp"

#include <cmath>

using namespace vecspin;
using testutil::random_mat;

namespace {

MixedModel pure(int m, int p, double beta, double h = 0.0) {
  return MixedModel(m, {{p, Vec::Constant(m, beta)}}, Vec::Constant(m, h));
}

SymMat example_q() {
  Mat q(2, 2);
  q << 1.0, 0.1, 0.1, 1.0;
  return SymMat(q);
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("pure 2-spin derivatives") {
  const MixedModel sk = pure(1, 2, 1.0);
  const SymMat one = SymMat::identity(1);
  CHECK(xi_eval(sk, one, 0)(0, 0) == doctest::Approx(1.0));
  CHECK(xi_eval(sk, one, 1)(0, 0) == doctest::Approx(2.0));
  CHECK(xi_eval(sk, one, 2)(0, 0) == doctest::Approx(2.0));
  CHECK(xi_eval(sk, one, 3)(0, 0) == 0.0);
  CHECK(theta_eval(sk, one)(0, 0) == doctest::Approx(1.0));
  CHECK(theta_eval(sk, SymMat::zero(1))(0, 0) == 0.0);
}

TEST_CASE("unit coefficients on the identity") {
  const MixedModel m2 = pure(2, 2, 1.0);
  CHECK((xi_eval(m2, SymMat::identity(2), 0) - SymMat::identity(2)).frob_norm() < 1e-15);
}

TEST_CASE("argument checks") {
  const MixedModel m2 = pure(2, 2, 1.0);
  CHECK_THROWS_AS(xi_eval(m2, SymMat::identity(3), 0), Error);
  try {
    (void)xi_eval(m2, SymMat::identity(2), 5);
    FAIL("expected OrderOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OrderOutOfRange);
  }
  try {
    (void)xi_eval(m2, 2.0 * SymMat::identity(2), 0);
    FAIL("expected DomainError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DomainError);
  }
}

TEST_CASE("theta identity") {
  std::mt19937_64 rng(21);
  const MixedModel model = testutil::random_even_model(rng, 3);
  const SymMat a(Mat(0.3 * random_mat(rng, 3, 3)));
  const SymMat ref = hadamard(a, xi_eval(model, a, 1)) - xi_eval(model, a, 0);
  CHECK((theta_eval(model, a) - ref).frob_norm() < 1e-13);
}

TEST_CASE("derivative orders agree with finite differences along E") {
  std::mt19937_64 rng(22);
  const MixedModel model(2, {{2, (Vec(2) << 0.8, 1.1).finished()}, {3, (Vec(2) << 0.4, -0.3).finished()},
                             {4, (Vec(2) << 0.5, 0.2).finished()}, {6, (Vec(2) << 0.1, 0.3).finished()}},
                         Vec::Zero(2));
  const SymMat a(Mat(0.4 * random_mat(rng, 2, 2)));
  const SymMat e = SymMat::ones(2);
  const double h = 1e-5;
  for (int k = 1; k <= 4; ++k) {
    const Mat fd = (xi_eval(model, a + h * e, k - 1).mat() - xi_eval(model, a - h * e, k - 1).mat()) / (2 * h);
    const Mat ex = xi_eval(model, a, k).mat();
    CHECK((fd - ex).norm() <= 1e-6 * (1.0 + ex.norm()));
  }
}

TEST_CASE("Schur product keeps xi PSD for nonnegative coefficients") {
  std::mt19937_64 rng(23);
  const MixedModel model = testutil::random_even_model(rng, 3);
  for (int t = 0; t < 10; ++t) {
    const SymMat q = testutil::random_correlation(rng, 3);
    CHECK(min_eig(xi_eval(model, q, 0)) >= -1e-12);
  }
}

TEST_CASE("entrywise monotone for nonnegative arguments") {
  std::mt19937_64 rng(24);
  const MixedModel model = testutil::random_even_model(rng, 2);
  Mat a(2, 2), b(2, 2);
  a << 0.2, 0.1, 0.1, 0.3;
  b << 0.5, 0.2, 0.2, 0.4;
  for (int k = 0; k <= 4; ++k)
    CHECK(((xi_eval(model, SymMat(b), k).mat() - xi_eval(model, SymMat(a), k).mat()).array() >= 0.0).all());
}

TEST_CASE("cosh model") {
  CHECK(cosh_tail_bound(1.1, 16) < 1e-14);
  const double beta = 1.2;
  const MixedModel c = cosh_model(beta, 2);
  CHECK(xi_eval(c, SymMat::zero(2), 0).frob_norm() == 0.0);
  const SymMat d2 = xi_eval(c, SymMat::zero(2), 2);
  CHECK((d2 - beta * beta * SymMat::ones(2)).frob_norm() < 1e-14);
  const SymMat v = xi_eval(c, example_q(), 0);
  CHECK(v(0, 1) == doctest::Approx(beta * beta * (std::cosh(0.1) - 1.0)).epsilon(1e-13));
  CHECK(v(0, 0) == doctest::Approx(beta * beta * (std::cosh(1.0) - 1.0)).epsilon(1e-13));
  const SymMat p = 0.5 * example_q();
  const double phi0 = 1.0 / std::sqrt(frob_ip(d2, hadamard_pow(p, 2)));
  CHECK(phi0 == doctest::Approx(1.0 / std::sqrt(beta * beta * 0.505)).epsilon(1e-13));
  CHECK(c.even());
  try {
    (void)cosh_model(1.0, 2, 5.0, 4);
    FAIL("expected InvalidTruncation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidTruncation);
  }
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(MixedModel(2, {{1, Vec::Ones(2)}}, Vec::Zero(2)), Error);
  CHECK_THROWS_AS(MixedModel(2, {{2, Vec::Ones(3)}}, Vec::Zero(2)), Error);
  CHECK_THROWS_AS(MixedModel(2, {{2, Vec::Ones(2)}}, Vec::Zero(1)), Error);
  const MixedModel odd(1, {{3, Vec::Ones(1)}}, Vec::Zero(1));
  CHECK_FALSE(odd.even());
  const MixedModel f(2, {{2, Vec::Ones(2)}}, (Vec(2) << 1.0, 2.0).finished());
  CHECK(f.field_outer()(0, 1) == 2.0);
  CHECK(min_eig(f.field_outer()) >= -1e-15);
}

}  // TEST_SUITE
