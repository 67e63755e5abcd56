#pragma once

#include "vecspin/functionals.hpp"
#include "vecspin/linalg.hpp"
#include "vecspin/model.hpp"
#include "vecspin/order_param.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace vecspin {

struct OptimizerConfig {
  int restarts = 4;
  int max_iters = 500;
  double grad_tol = 1e-6;
  // Weight of the gauge terms that pin the scale of the (scale-invariant)
  // Gram and level parametrizations; they vanish on the normalized gauge.
  double penalty_weight = 1e-3;
  std::uint64_t seed = 20240607;
  std::vector<int> r_schedule{2, 3};

  void validate() const;
};

struct LevelResult {
  int r = 0;
  double value = 0.0;
};

struct OptReport {
  double best_value = 0.0;
  DiscreteOrderParam argmin;    // zero temperature runs keep x at 0
  std::optional<SymMat> lambda;  // Parisi runs
  std::optional<SymMat> L;       // zero temperature runs
  std::vector<double> alpha;     // zero temperature levels a_0..a_{r-1}
  std::vector<double> per_restart_values;
  std::vector<LevelResult> per_level;
  bool converged = false;
  double kkt_residual = 0.0;
};

// Free-parameter map for discrete order parameters at a fixed constraint Q
// and level count r:
//   x_k = (u_1^2 + ... + u_k^2) / (u_1^2 + ... + u_{r-1}^2), k <= r-2, x_{r-1} = 1
//   Q_{k+1} - Q_k = T G_k G_k^T T^T, T = Q^{1/2} S^{-1/2}, S = sum_k G_k G_k^T
class LevelParam {
public:
  LevelParam(const SymMat& q, int r);

  int r() const noexcept { return r_; }
  int size() const noexcept { return nx_ + r_ * m_ * m_; }
  int x_size() const noexcept { return nx_; }

  // nullopt if the Gram sum or the level normalization is degenerate.
  std::optional<DiscreteOrderParam> unpack(const Vec& z) const;
  Vec pack(const DiscreteOrderParam& p) const;
  double gauge_penalty(const Vec& z) const;

  // Increments only, for the zero temperature parametrization.
  std::optional<std::vector<SymMat>> unpack_levels(const double* g) const;
  void pack_levels(const std::vector<SymMat>& Qs, double* g) const;

private:
  SymMat q_, q_half_;
  int r_, m_, nx_;
};

// Central-difference gradient used inside the local search. Falls back to a
// one-sided difference when a neighbour is infeasible. Returns f(z).
double numerical_gradient(const std::function<double(const Vec&)>& f, const Vec& z, Vec& g,
                          double rel_step = 1e-6);
// Ridders' extrapolation of central differences from an initial step of
// rel_step * max(1, |z_i|), shrinking until the error estimate stops
// improving. Robust to rounding noise near singular levels; about 5x the
// evaluations of numerical_gradient. Returns f(z).
double extrapolated_gradient(const std::function<double(const Vec&)>& f, const Vec& z, Vec& g,
                             double rel_step = 1e-3);

// Objective of the discrete CS search: value and internal gradient.
class CsObjective {
public:
  CsObjective(MixedModel model, const SymMat& q, int r, double penalty_weight);

  const LevelParam& param() const noexcept { return param_; }
  double functional(const Vec& z) const;  // +inf when infeasible
  double operator()(const Vec& z) const;  // functional + gauge penalty
  double gradient(const Vec& z, Vec& g) const;

private:
  MixedModel model_;
  LevelParam param_;
  double w_;
};

struct LocalResult {
  Vec z;
  double value = 0.0;
  double kkt = 0.0;
  bool converged = false;
};

LocalResult minimize_local(const std::function<double(const Vec&)>& f, const Vec& z0,
                           const OptimizerConfig& cfg);

OptReport minimize_discrete_cs(const MixedModel& model, const SymMat& q,
                               const OptimizerConfig& cfg);

OptReport minimize_discrete_parisi(const MixedModel& model, const SymMat& q,
                                   const OptimizerConfig& cfg);

struct SupResult {
  SymMat Q;
  double value = 0.0;
  OptReport inner;
  int outer_iterations = 0;
};

SupResult sup_over_Q(const MixedModel& model, const OptimizerConfig& cfg,
                     std::optional<SymMat> q_init = std::nullopt);

OptReport minimize_gse(const MixedModel& model, const SymMat& q, const OptimizerConfig& cfg);

struct RsGse {
  SymMat L0;
  double value = 0.0;       // trace of (Q^{1/2} (xi'(Q) + hh^T) Q^{1/2})^{1/2}
  double sum_value = 0.0;   // Sum of the same matrix
  bool variants_agree = false;
};

RsGse rs_gse_closed_form(const MixedModel& model, const SymMat& q);

}  // namespace vecspin
