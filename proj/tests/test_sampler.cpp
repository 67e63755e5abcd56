#include "doctest.h"
#include "helpers.hpp"

#include "vecspin/error.hpp"
#include "vecspin/sampler.hpp"

#include <cmath>

using namespace vecspin;

namespace {

Mat random_config(std::mt19937_64& rng, int m, int n) {
  Mat s = testutil::random_mat(rng, m, n);
  for (int k = 0; k < m; ++k) s.row(k) *= std::sqrt(double(n)) / s.row(k).norm();
  return s;
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("zero model has zero energy") {
  const MixedModel zero(2, {{2, Vec::Zero(2)}, {4, Vec::Zero(2)}}, Vec::Zero(2));
  const auto sample = sample_hamiltonian(zero, 8, 4, 3);
  std::mt19937_64 rng(1);
  const Mat s = random_config(rng, 2, 8);
  CHECK(sample.energy(s) == 0.0);
  CHECK(sample.gradient(s).norm() == 0.0);
}

TEST_CASE("empirical covariance of the copies") {
  const int n = 30;
  const MixedModel model(2, {{2, (Vec(2) << 1.0, 0.7).finished()}}, Vec::Zero(2));
  std::mt19937_64 rng(2);
  const Mat a = random_config(rng, 2, n);
  const Mat b = random_config(rng, 2, n);
  const int draws = 200;
  for (int k = 0; k < 2; ++k) {
    for (int l = 0; l < 2; ++l) {
      double sum = 0.0, sum2 = 0.0;
      for (int d = 0; d < draws; ++d) {
        const auto s = sample_hamiltonian(model, n, 4, 1000 + d);
        const double v = s.copy_energy(k, a.row(k).transpose()) *
                         s.copy_energy(l, b.row(l).transpose()) / n;
        sum += v;
        sum2 += v * v;
      }
      const double mean = sum / draws;
      const double se = std::sqrt((sum2 / draws - mean * mean) / draws);
      const double r = a.row(k).dot(b.row(l)) / n;
      const double expect = model.terms()[0].beta(k) * model.terms()[0].beta(l) * r * r;
      CHECK(std::abs(mean - expect) <= 5.0 * se);
    }
  }
}

TEST_CASE("field-only maximum") {
  const MixedModel model(2, {{2, Vec::Zero(2)}}, (Vec(2) << 1.0, 0.0).finished());
  const auto sample = sample_hamiltonian(model, 20, 4, 5);
  const auto res = maximize_energy(sample, SymMat::identity(2), 4, 2000);
  CHECK(res.best == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("constraint is exact and restarts are monotone") {
  const MixedModel model(2, {{2, (Vec(2) << 1.0, 0.5).finished()}}, (Vec(2) << 0.2, 0.0).finished());
  const auto sample = sample_hamiltonian(model, 40, 4, 9);
  Mat qm(2, 2);
  qm << 1.0, 0.3, 0.3, 1.0;
  const SymMat q(qm);
  const auto one = maximize_energy(sample, q, 1, 500);
  const auto eight = maximize_energy(sample, q, 8, 500);
  CHECK(eight.best >= one.best);
  CHECK(eight.per_restart.front() == one.per_restart.front());
  const Mat& s = eight.config.sigma;
  CHECK((s * s.transpose() / 40.0 - qm).norm() < 1e-9);
  const Mat& w = eight.config.W;
  CHECK((w * w.transpose() / 40.0 - Mat::Identity(2, 2)).norm() < 1e-10);
  CHECK(sample.energy(s) / 40.0 == doctest::Approx(eight.best).epsilon(1e-12));
}

TEST_CASE("gradient matches finite differences") {
  const MixedModel model(2, {{2, (Vec(2) << 1.0, 0.5).finished()}, {4, (Vec(2) << 0.3, 0.2).finished()}},
                         (Vec(2) << 0.2, 0.1).finished());
  const auto sample = sample_hamiltonian(model, 6, 4, 11);
  std::mt19937_64 rng(4);
  const Mat s = random_config(rng, 2, 6);
  const Mat g = sample.gradient(s);
  const double h = 1e-6;
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < 6; ++i) {
      Mat p = s, m = s;
      p(k, i) += h;
      m(k, i) -= h;
      CHECK(g(k, i) == doctest::Approx((sample.energy(p) - sample.energy(m)) / (2 * h)).epsilon(1e-6));
    }
  }
}

TEST_CASE("disorder determinism") {
  const MixedModel model(1, {{2, Vec::Ones(1)}, {4, Vec::Ones(1)}}, Vec::Zero(1));
  const auto a = sample_hamiltonian(model, 10, 4, 77);
  const auto b = sample_hamiltonian(model, 10, 4, 77);
  const auto c = sample_hamiltonian(model, 10, 4, 78);
  CHECK(a.couplings() == b.couplings());
  CHECK(a.couplings() != c.couplings());
}

TEST_CASE("truncation and memory budget") {
  const MixedModel model(1, {{2, Vec::Ones(1)}, {6, Vec::Ones(1)}}, Vec::Zero(1));
  const auto s = sample_hamiltonian(model, 5, 4, 1);
  CHECK(s.couplings().size() == 1);
  CHECK_FALSE(s.warnings().empty());
  const MixedModel p4(1, {{4, Vec::Ones(1)}}, Vec::Zero(1));
  try {
    (void)sample_hamiltonian(p4, 100, 4, 1, 1e6);
    FAIL("expected MemoryBudgetExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MemoryBudgetExceeded);
  }
  CHECK_THROWS_AS(maximize_energy(s, SymMat(Mat::Zero(1, 1))), Error);
}

TEST_CASE("finite size extrapolation") {
  std::vector<std::pair<double, double>> syn, flat;
  for (double n : {50.0, 100.0, 200.0, 400.0}) {
    syn.emplace_back(n, 1.4142 + 2.0 * std::pow(n, -2.0 / 3.0));
    flat.emplace_back(n, 0.75);
  }
  const auto f = extrapolate_gse(syn);
  CHECK(f.e_inf == doctest::Approx(1.4142).epsilon(1e-6));
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(f.residual < 1e-10);
  const auto c = extrapolate_gse(flat);
  CHECK(c.e_inf == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(std::abs(c.slope) < 1e-10);
  try {
    (void)extrapolate_gse({{100, 1.0}, {100, 1.1}, {200, 1.2}});
    FAIL("expected IllConditionedFit");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IllConditionedFit);
  }
}

TEST_CASE("pure 2-spin maximum approaches the edge") {
  const MixedModel sk(1, {{2, Vec::Ones(1)}}, Vec::Zero(1));
  const auto sample = sample_hamiltonian(sk, 200, 4, 21);
  const auto res = maximize_energy(sample, SymMat::identity(1), 4);
  CHECK(std::abs(res.best - std::sqrt(2.0)) < 0.1 * std::sqrt(2.0));
}

}  // TEST_SUITE
