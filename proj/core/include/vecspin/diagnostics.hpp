#pragma once

#include "vecspin/functionals.hpp"
#include "vecspin/linalg.hpp"
#include "vecspin/model.hpp"
#include "vecspin/order_param.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace vecspin {

struct OptimalityReport {
  double residual_sup = 0.0;  // max over in-support points
  std::vector<double> support_grid;
  std::vector<bool> in_support;
  std::vector<std::pair<double, double>> per_point_residuals;  // (t, value)
  bool pass = false;
  double tolerance = 0.0;

  // Critical-point check: sup over the support of |<F(t), Phi'(t)>|, the
  // residual projected on the path direction.
  double projected_sup = 0.0;

  // Zero temperature check.
  double stationarity = 0.0;
  double g_min = 0.0;
  double off_support_mass = 0.0;
};

// F(t) = xi'(Phi(t)) + hh^T - int_0^t Phi-hat^{-1} Phi' Phi-hat^{-1} on the
// grid over [0, t_x]; per-point values are Frobenius norms.
OptimalityReport critical_residual(const MixedModel& model, const MeasureFn& x,
                                   const MatrixPath& path, double support_tol = 1e-8,
                                   double tolerance = 1e-5, const QuadOptions& q = {});

double parisi_density(const MixedModel& model, const MatrixPath& path, double u);

struct RsCondition {
  bool flag = false;
  double margin = 0.0;            // min_eig(xi'(Q) + hh^T - xi''(Q) o Q)
  double entrywise_margin = 0.0;  // smallest entry of the same matrix
  double paired = 0.0;            // <same matrix, Q>
};

RsCondition rs_condition(const MixedModel& model, const SymMat& q);

// g_tol defaults to 1e-6 (1 + |C|).
OptimalityReport zero_temp_g(const MixedModel& model, const ZeroTempTriple& triple,
                             std::optional<double> g_tol = std::nullopt,
                             const QuadOptions& q = {});

// (2 <beta_2 beta_2^T, Phi'(0)^{o2}>, <Phi-hat(0)^{-1} Phi'(0) Phi-hat(0)^{-1}, Phi'(0)>)
std::pair<double, double> sk_isolation_check(const MixedModel& model, const MeasureFn& x,
                                             const MatrixPath& path, const QuadOptions& q = {});

struct ConvexitySample {
  double u = 0.0;
  double y = 0.0;
  double ypp = 0.0;     // closed form, valid where the path is linear
  double ypp_fd = 0.0;  // second central difference
  bool convex = false;  // y'' >= 0: the two-roots bound applies here
};

// y(u) = <xi''(Phi(u)), Phi'(u)^{o2}>^{-1/2} sampled at n points of [a, b].
std::vector<ConvexitySample> convexity_profile(const MixedModel& model, const MatrixPath& path,
                                               double a, double b, int n = 50);

struct RsbExample {
  MixedModel model;
  SymMat Q;
  MeasureFn x;
  MatrixPath path;
  double q0 = 0.0;
  double phi0 = 0.0;
  double x_q0_minus = 0.0;
  bool x_nondecreasing = false;
  double identity_residual = 0.0;  // sup ||Phi-hat - sqrt(2) phi Phi'||_F on [0, q0]
  double value = 0.0;              // CS functional of the construction
  OptimalityReport report;
};

// Two-component cosh model with Q = [[1, 0.1], [0.1, 1]], Phi(q) = (q/2) Q.
RsbExample rsb_example_build(double beta, const QuadOptions& q = {});

}  // namespace vecspin
