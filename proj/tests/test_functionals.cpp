#include "doctest.h"
#include "helpers.hpp"
#include "scalar_oracle.hpp"

#include "vecspin/error.hpp"
#include "vecspin/functionals.hpp"
#include "vecspin/optimize.hpp"

#include <cmath>

using namespace vecspin;

namespace {

MixedModel sk(double beta = 1.0, double h = 0.0) {
  return MixedModel(1, {{2, Vec::Constant(1, beta)}}, Vec::Constant(1, h));
}

SymMat scalar(double v) { return SymMat::identity(1) * v; }

DiscreteOrderParam scalar_rs(double q) {
  DiscreteOrderParam p;
  p.x = {0.0, 1.0};
  p.Qs = {scalar(q), scalar(1.0)};
  return p;
}

double scalar_example(double q) {
  return 0.5 * (std::log(1.0 - q) + q / (1.0 - q) + (1.0 - q * q));
}

template <class F>
void expect_code(ErrorCode code, F&& f) {
  try {
    f();
    FAIL("expected " << to_string(code));
  } catch (const Error& e) {
    CHECK(e.code() == code);
  }
}

}  // namespace

TEST_SUITE("functionals") {

TEST_CASE("discrete CS: scalar replica symmetric instance") {
  CHECK(scalar_example(0.3) == doctest::Approx(0.490948).epsilon(1e-6));
  CHECK(discrete_cs(sk(), scalar_rs(0.3)) == doctest::Approx(scalar_example(0.3)).epsilon(1e-14));
}

TEST_CASE("discrete CS: collapsed levels reduce to two terms") {
  std::mt19937_64 rng(41);
  const MixedModel model = testutil::random_even_model(rng, 2, false);
  const SymMat q = testutil::random_correlation(rng, 2);
  DiscreteOrderParam p;
  p.x = {0.0, 0.3, 0.8};
  p.Qs = {SymMat::zero(2), SymMat::zero(2), q};
  const double expect = 0.5 * (logdet(q) / 0.8 + 0.8 * sum_all(xi_eval(model, q, 0)));
  CHECK(discrete_cs(model, p) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("discrete CS errors") {
  DiscreteOrderParam p;
  p.x = {0.0, 0.0, 1.0};
  p.Qs = {scalar(0.2), scalar(1.0), scalar(1.0)};
  expect_code(ErrorCode::SingularD, [&] { (void)discrete_cs(sk(), p); });
  p.x = {0.0, 0.8, 0.4};
  p.Qs = {scalar(0.2), scalar(0.5), scalar(1.0)};
  expect_code(ErrorCode::MonotonicityViolation, [&] { (void)discrete_cs(sk(), p); });
}

TEST_CASE("discrete Parisi at the scalar multiplier equals discrete CS") {
  const double q = 0.3;
  const MixedModel model = sk();
  const double lam = 1.0 / (1.0 - q) + (xi_eval(model, scalar(1.0), 1)(0, 0) - xi_eval(model, scalar(q), 1)(0, 0));
  CHECK(discrete_parisi(model, scalar(lam), scalar_rs(q)) ==
        doctest::Approx(discrete_cs(model, scalar_rs(q))).epsilon(1e-12));
  // and lam is the minimizer over the multiplier
  CHECK(discrete_parisi(model, scalar(lam * 1.01), scalar_rs(q)) > discrete_parisi(model, scalar(lam), scalar_rs(q)));
  CHECK(discrete_parisi(model, scalar(lam * 0.99), scalar_rs(q)) > discrete_parisi(model, scalar(lam), scalar_rs(q)));
}

TEST_CASE("discrete Parisi with one level") {
  std::mt19937_64 rng(42);
  const MixedModel model = testutil::random_even_model(rng, 2, false);
  const SymMat q = testutil::random_correlation(rng, 2);
  const SymMat lam = testutil::random_pd(rng, 2);
  DiscreteOrderParam p;
  p.x = {0.0};
  p.Qs = {q};
  const double expect = 0.5 * (frob_ip(lam, q) - 2.0 - logdet(lam) + frob_ip(xi_eval(model, q, 1), sym_inv(lam)));
  CHECK(discrete_parisi(model, lam, p) == doctest::Approx(expect).epsilon(1e-13));
  expect_code(ErrorCode::SingularLambda, [&] { (void)discrete_parisi(model, -1.0 * lam, p); });
}

TEST_CASE("Parisi variants differ only where documented") {
  std::mt19937_64 rng(43);
  const MixedModel model = testutil::random_even_model(rng, 2);
  const SymMat q = testutil::random_correlation(rng, 2);
  const auto p = testutil::random_order_param(rng, q, 3);
  const SymMat lam = testutil::random_pd(rng, 2, 4.0);
  const double base = discrete_parisi(model, lam, p);
  ParisiOptions raw;
  raw.field = ParisiField::lambda;
  const auto lv = parisi_levels(model, lam, p);
  const SymMat hh = model.field_outer();
  CHECK(discrete_parisi(model, lam, p, raw) - base ==
        doctest::Approx(0.5 * (frob_ip(hh, sym_inv(lam)) - frob_ip(hh, sym_inv(lv[0])))).epsilon(1e-10));
  ParisiOptions unscaled;
  unscaled.log_weight = ParisiLogWeight::unscaled;
  CHECK(std::isfinite(discrete_parisi(model, lam, p, unscaled)));
}

TEST_CASE("continuous CS bridge, T-hat independence and rewritten form") {
  std::mt19937_64 rng(44);
  for (int m : {1, 2, 3}) {
    const MixedModel model = testutil::random_even_model(rng, m);
    const SymMat q = m == 1 ? scalar(1.0) : testutil::random_correlation(rng, m);
    const auto p = testutil::random_order_param(rng, q, 3);
    const auto [x, path] = sine_interpolate(p);
    const double d = discrete_cs(model, p);
    const double c = continuous_cs(model, x, path);
    CHECK(std::abs(d - c) <= 1e-6 * (1.0 + std::abs(d)));
    const double tx = x.t_one(), mm = path.end();
    for (double f : {0.25, 0.75})
      CHECK(std::abs(continuous_cs(model, x, path, tx + f * (mm - tx)) - c) < 1e-8);
    CHECK(std::abs(continuous_cs_rewritten(model, x, path) - c) < 1e-7);
    QuadOptions fine;
    fine.n_quad = 4001;
    CHECK(std::abs(continuous_cs(model, x, path, std::nullopt, fine) - c) < 1e-8);
  }
}

TEST_CASE("continuous CS: T-hat outside the admissible interval") {
  const auto [x, path] = sine_interpolate(scalar_rs(0.3));
  expect_code(ErrorCode::InvalidThat, [&] { (void)continuous_cs(sk(), x, path, 0.1); });
  expect_code(ErrorCode::InvalidThat, [&] { (void)continuous_cs(sk(), x, path, 1.0); });
}

TEST_CASE("continuous CS: scalar replica symmetric path") {
  const double q = 0.3;
  const MeasureFn x = MeasureFn::steps(MeasureMode::finite, {0.0, q, 1.0}, {0.0, 1.0}, 1.0);
  const MatrixPath path = MatrixPath::linear(scalar(1.0), 1.0);
  CHECK(continuous_cs(sk(), x, path) == doctest::Approx(scalar_example(q)).epsilon(1e-10));
  CHECK(continuous_cs_rewritten(sk(), x, path) == doctest::Approx(0.490948).epsilon(1e-6));
}

TEST_CASE("rewritten form with x identically one") {
  std::mt19937_64 rng(45);
  const MixedModel model = testutil::random_even_model(rng, 2);
  const SymMat q = testutil::random_correlation(rng, 2);
  const MeasureFn x = MeasureFn::steps(MeasureMode::finite, {0.0, 2.0}, {1.0}, 1.0);
  const MatrixPath path = MatrixPath::linear(q, 2.0);
  // direct: Phi(t) = t Q / 2, Phi' = Q / 2; the integral by a fine midpoint rule
  double integral = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) * 2.0 / n;
    const SymMat phi = (t / 2.0) * q;
    integral += frob_ip(phi, hadamard(xi_eval(model, phi, 2), 0.5 * q)) * 2.0 / n;
  }
  const double expect =
      0.5 * (frob_ip(xi_eval(model, q, 1) + model.field_outer(), q) - integral + logdet(q));
  CHECK(continuous_cs_rewritten(model, x, path) == doctest::Approx(expect).epsilon(1e-8));
}

TEST_CASE("continuous Parisi matches the discrete form under sine interpolation") {
  std::mt19937_64 rng(46);
  for (int m : {1, 2, 3}) {
    const MixedModel model = testutil::random_even_model(rng, m);
    const SymMat q = m == 1 ? scalar(1.0) : testutil::random_correlation(rng, m);
    const auto p = testutil::random_order_param(rng, q, 3);
    const auto [x, path] = sine_interpolate(p);
    SymMat floor = SymMat::zero(m);
    for (int k = 1; k < p.r(); ++k)
      floor += p.x[k] * (xi_eval(model, p.level(k + 1), 1) - xi_eval(model, p.level(k), 1));
    const SymMat lam = floor + testutil::random_pd(rng, m, 0.5);
    const double d = discrete_parisi(model, lam, p);
    CHECK(std::abs(continuous_parisi(model, x, lam, path) - d) <= 1e-6 * (1.0 + std::abs(d)));
  }
}

TEST_CASE("scalar reduction against the scalar oracle") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 5; ++trial) {
    const double b2 = testutil::uniform(rng, 0.5, 1.5), b4 = testutil::uniform(rng, 0.0, 0.8);
    const double h = testutil::uniform(rng, -0.5, 0.5);
    const MixedModel model(1, {{2, Vec::Constant(1, b2)}, {4, Vec::Constant(1, b4)}}, Vec::Constant(1, h));
    oracle::Poly f;
    f.c2 = {0.0, 0.0, b2 * b2, 0.0, b4 * b4};
    f.h = h;
    const auto p = testutil::random_order_param(rng, scalar(1.0), 4);
    std::vector<double> qs{0.0};
    for (const auto& l : p.Qs) qs.push_back(l(0, 0));
    const double ref = oracle::cs(f, p.x, qs);
    CHECK(discrete_cs(model, p) == doctest::Approx(ref).epsilon(1e-12));
    const auto [x, path] = sine_interpolate(p);
    CHECK(std::abs(continuous_cs(model, x, path) - ref) < 1e-9);
    CHECK(std::abs(continuous_cs_rewritten(model, x, path) - ref) < 1e-9);
    double d0 = 0.0;
    for (std::size_t k = 0; k < p.x.size(); ++k) d0 += p.x[k] * (f.d1(qs[k + 1]) - f.d1(qs[k]));
    const double lam = d0 + testutil::uniform(rng, 0.5, 2.0);
    const double pref = oracle::parisi(f, lam, p.x, qs);
    CHECK(discrete_parisi(model, scalar(lam), p) == doctest::Approx(pref).epsilon(1e-12));
    CHECK(std::abs(continuous_parisi(model, x, scalar(lam), path) - pref) < 1e-9);
    std::vector<double> a{0.0};
    for (std::size_t k = 1; k < p.x.size(); ++k) a.push_back(a.back() + testutil::uniform(rng, 0.0, 1.0));
    const double L = a.back() + testutil::uniform(rng, 0.5, 2.0);
    const double gref = oracle::gse(f, L, a, qs);
    CHECK(gse_discrete(model, scalar(L), a, p.Qs) == doctest::Approx(gref).epsilon(1e-12));
    const auto [al, pa] = sine_interpolate_zero(a, p.Qs);
    CHECK(std::abs(gse_functional(model, {scalar(L), al, pa}) - gref) < 1e-9);
  }
}

TEST_CASE("zero temperature functional") {
  std::mt19937_64 rng(48);
  const MixedModel model = testutil::random_even_model(rng, 2);
  const SymMat q = testutil::random_correlation(rng, 2);
  const SymMat L = testutil::random_pd(rng, 2);
  const MeasureFn zero = MeasureFn::steps(MeasureMode::zero, {0.0, 2.0}, {0.0}, 0.0);
  const MatrixPath path = MatrixPath::linear(q, 2.0);
  const double expect = 0.5 * (frob_ip(xi_eval(model, q, 1) + model.field_outer(), L) + frob_ip(sym_inv(L), q));
  CHECK(gse_functional(model, {L, zero, path}) == doctest::Approx(expect).epsilon(1e-12));

  const RsGse rs = rs_gse_closed_form(model, q);
  CHECK(gse_functional(model, {rs.L0, zero, path}) == doctest::Approx(rs.value).epsilon(1e-12));
  const SymMat qh = sym_sqrt(q);
  const SymMat mid(Mat(qh.mat() * (xi_eval(model, q, 1) + model.field_outer()).mat() * qh.mat()));
  CHECK(rs.value == doctest::Approx(sym_sqrt(mid).trace()).epsilon(1e-12));

  const RsGse one = rs_gse_closed_form(sk(), scalar(1.0));
  CHECK(one.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(one.L0(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(gse_functional(sk(), {one.L0, MeasureFn::steps(MeasureMode::zero, {0.0, 1.0}, {0.0}, 0.0),
                               MatrixPath::linear(scalar(1.0), 1.0)}) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));

  const std::vector<double> a{0.0, 5.0};
  const std::vector<SymMat> qs{0.5 * q, q};
  const auto [al, pa] = sine_interpolate_zero(a, qs);
  expect_code(ErrorCode::InfeasibleTriple, [&] { (void)gse_functional(model, {SymMat::identity(2), al, pa}); });
  expect_code(ErrorCode::InfeasibleTriple, [&] { (void)gse_discrete(model, SymMat::identity(2), a, qs); });
}

TEST_CASE("discrete and continuous zero temperature forms agree") {
  std::mt19937_64 rng(49);
  const MixedModel model = testutil::random_even_model(rng, 3);
  const SymMat q = testutil::random_correlation(rng, 3);
  const auto p = testutil::random_order_param(rng, q, 3);
  const std::vector<double> a{0.2, 0.9, 1.4};
  const SymMat L = 3.0 * SymMat::identity(3) + testutil::random_pd(rng, 3);
  const auto [al, pa] = sine_interpolate_zero(a, p.Qs);
  const double d = gse_discrete(model, L, a, p.Qs);
  CHECK(std::abs(gse_functional(model, {L, al, pa}) - d) <= 1e-8 * (1.0 + std::abs(d)));
}

TEST_CASE("phi-hat at zero equals the weighted path increment") {
  std::mt19937_64 rng(50);
  const SymMat q = testutil::random_correlation(rng, 2);
  const auto p = testutil::random_order_param(rng, q, 3);
  const auto [x, path] = sine_interpolate(p);
  SymMat expect = SymMat::zero(2);
  for (int k = 0; k < p.r(); ++k) expect += p.x[static_cast<std::size_t>(k)] * (p.level(k + 1) - p.level(k));
  CHECK((phi_hat(x, path, 0.0) - expect).frob_norm() < 1e-12);
}

}  // TEST_SUITE
