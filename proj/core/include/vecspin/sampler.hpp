#pragma once

#include "vecspin/linalg.hpp"
#include "vecspin/model.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace vecspin {

// One disorder realization at size N. Each model term owns an i.i.d.
// standard Gaussian tensor of N^p entries (row-major), shared by all copies.
class HamiltonianSample {
public:
  HamiltonianSample(const MixedModel& model, int n, int p_cut, std::uint64_t seed,
                    double memory_budget_bytes);

  int N() const noexcept { return n_; }
  int m() const noexcept { return model_.m(); }
  std::uint64_t seed() const noexcept { return seed_; }
  const MixedModel& model() const noexcept { return model_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  // Coupling arrays of the terms kept after truncation, in model order.
  const std::vector<std::vector<double>>& couplings() const noexcept { return couplings_; }
  std::size_t footprint_bytes() const noexcept { return footprint_; }

  // H_N^j(s) for copy j, field included.
  double copy_energy(int j, const Vec& s) const;
  // H_N(sigma) for sigma of shape m x N.
  double energy(const Mat& sigma) const;
  Mat gradient(const Mat& sigma) const;

private:
  MixedModel model_;
  int n_;
  std::uint64_t seed_;
  std::vector<int> active_;  // indices into model_.terms()
  std::vector<std::vector<double>> couplings_;
  std::vector<std::string> warnings_;
  std::size_t footprint_ = 0;
};

// Throws MemoryBudgetExceeded with the footprint if the tensors do not fit.
HamiltonianSample sample_hamiltonian(const MixedModel& model, int n, int p_cut = 4,
                                     std::uint64_t seed = 0,
                                     double memory_budget_bytes = 1024.0 * 1024.0 * 1024.0);

struct ConstrainedConfig {
  Mat W;      // rows orthogonal with norm sqrt(N)
  Mat sigma;  // Q^{1/2} W
};

struct MaximizeResult {
  double best = 0.0;  // H_N(sigma) / N
  ConstrainedConfig config;
  std::vector<double> per_restart;
};

// Monotone projected-gradient ascent on {W W^T = N I} with polar retraction.
// Restart i draws its start from the stream (seed, i).
MaximizeResult maximize_energy(const HamiltonianSample& sample, const SymMat& q, int restarts = 8,
                               int max_iters = 5000);

struct FitResult {
  double e_inf = 0.0;
  double slope = 0.0;
  double residual = 0.0;  // RMS of the fit
};

// Least squares e(N) = e_inf + c N^exponent over (N, energy) pairs.
FitResult extrapolate_gse(const std::vector<std::pair<double, double>>& values,
                          double exponent = -2.0 / 3.0);

}  // namespace vecspin
