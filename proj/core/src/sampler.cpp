#include "vecspin/sampler.hpp"

#include "vecspin/error.hpp"
#include "vecspin/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace vecspin {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double ipow(double b, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// v^{(x)k} in row-major index order.
Vec kron_power(const Vec& v, int k) {
  Vec r = Vec::Ones(1);
  for (int i = 0; i < k; ++i) {
    Vec next(r.size() * v.size());
    for (Eigen::Index a = 0; a < r.size(); ++a) next.segment(a * v.size(), v.size()) = r(a) * v;
    r = std::move(next);
  }
  return r;
}

double contract_all(const std::vector<double>& g, int p, const Vec& v) {
  const Eigen::Index n = v.size();
  Vec w = Eigen::Map<const RowMajor>(g.data(), static_cast<Eigen::Index>(g.size()) / n, n) * v;
  for (int k = p - 1; k >= 1; --k)
    w = Eigen::Map<const RowMajor>(w.data(), w.size() / n, n) * v;
  return w(0);
}

// Gradient of sum g_{i1..ip} v_{i1} ... v_{ip}.
Vec contract_grad(const std::vector<double>& g, int p, const Vec& v) {
  const Eigen::Index n = v.size();
  Vec out = Vec::Zero(n);
  for (int pos = 0; pos < p; ++pos) {
    const Vec pre = kron_power(v, pos);
    const Vec post = kron_power(v, p - pos - 1);
    const Eigen::Index a = pre.size(), b = post.size();
    const Vec y = Eigen::Map<const RowMajor>(g.data(), a, n * b).transpose() * pre;
    out += Eigen::Map<const RowMajor>(y.data(), n, b) * post;
  }
  return out;
}

Mat polar(const Mat& x, double n) {
  const SymMat gram(Mat(x * x.transpose()));
  return std::sqrt(n) * sym_pow(gram, -0.5).mat() * x;
}

}  // namespace

HamiltonianSample::HamiltonianSample(const MixedModel& model, int n, int p_cut,
                                     std::uint64_t seed, double memory_budget_bytes)
    : model_(model), n_(n), seed_(seed) {
  if (n < 1) throw Error(ErrorCode::Validation, "N must be positive");
  const auto& terms = model_.terms();
  double bytes = 0.0;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    if (terms[t].p > p_cut) {
      std::ostringstream os;
      os << "term p=" << terms[t].p << " dropped (p_cut=" << p_cut << ")";
      warnings_.push_back(os.str());
      continue;
    }
    active_.push_back(static_cast<int>(t));
    bytes += ipow(n, terms[t].p) * sizeof(double);
  }
  if (bytes > memory_budget_bytes) {
    std::ostringstream os;
    os << "coupling tensors need " << bytes << " bytes, budget " << memory_budget_bytes;
    throw Error(ErrorCode::MemoryBudgetExceeded, os.str());
  }
  footprint_ = static_cast<std::size_t>(bytes);
  for (int t : active_) {
    auto rng = make_stream(seed, 0xC0FFEEULL, static_cast<std::uint64_t>(t));
    std::normal_distribution<double> z;
    std::vector<double> g(static_cast<std::size_t>(ipow(n, terms[t].p)));
    for (double& v : g) v = z(rng);
    couplings_.push_back(std::move(g));
  }
}

double HamiltonianSample::copy_energy(int j, const Vec& s) const {
  if (s.size() != n_) throw Error(ErrorCode::DimensionMismatch, "configuration length != N");
  double e = model_.h()(j) * s.sum();
  for (std::size_t k = 0; k < active_.size(); ++k) {
    const auto& term = model_.terms()[active_[k]];
    const double c = term.beta(j) * std::pow(n_, -0.5 * (term.p - 1));
    if (c != 0.0) e += c * contract_all(couplings_[k], term.p, s);
  }
  return e;
}

double HamiltonianSample::energy(const Mat& sigma) const {
  if (sigma.rows() != m() || sigma.cols() != n_)
    throw Error(ErrorCode::DimensionMismatch, "sigma must be m x N");
  double e = 0.0;
  for (int j = 0; j < m(); ++j) e += copy_energy(j, sigma.row(j).transpose());
  return e;
}

Mat HamiltonianSample::gradient(const Mat& sigma) const {
  if (sigma.rows() != m() || sigma.cols() != n_)
    throw Error(ErrorCode::DimensionMismatch, "sigma must be m x N");
  Mat g(m(), n_);
  for (int j = 0; j < m(); ++j) {
    const Vec s = sigma.row(j).transpose();
    Vec r = Vec::Constant(n_, model_.h()(j));
    for (std::size_t k = 0; k < active_.size(); ++k) {
      const auto& term = model_.terms()[active_[k]];
      const double c = term.beta(j) * std::pow(n_, -0.5 * (term.p - 1));
      if (c != 0.0) r += c * contract_grad(couplings_[k], term.p, s);
    }
    g.row(j) = r.transpose();
  }
  return g;
}

HamiltonianSample sample_hamiltonian(const MixedModel& model, int n, int p_cut,
                                     std::uint64_t seed, double memory_budget_bytes) {
  return HamiltonianSample(model, n, p_cut, seed, memory_budget_bytes);
}

MaximizeResult maximize_energy(const HamiltonianSample& sample, const SymMat& q, int restarts,
                               int max_iters) {
  if (q.dim() != sample.m()) throw Error(ErrorCode::DimensionMismatch, "Q dim != m");
  if (!is_pd(q)) throw Error(ErrorCode::NonPDConstraint, "Q must be positive definite");
  if (restarts < 1) throw Error(ErrorCode::Validation, "restarts must be positive");
  const int m = sample.m();
  const double n = sample.N();
  const Mat qh = sym_sqrt(q).mat();

  MaximizeResult res;
  res.best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < restarts; ++i) {
    auto rng = make_stream(sample.seed(), 0x5A11ULL, static_cast<std::uint64_t>(i));
    std::normal_distribution<double> z;
    Mat w(m, sample.N());
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = z(rng);
    w = polar(w, n);
    double e = sample.energy(qh * w);
    double eta = -1.0;
    int small = 0;
    for (int it = 0; it < max_iters; ++it) {
      const Mat gw = qh * sample.gradient(qh * w);
      const Mat wg = gw * w.transpose();
      const Mat tangent = gw - 0.5 * (wg + wg.transpose()) * w / n;
      const double tn = tangent.norm();
      if (tn == 0.0) break;
      if (eta < 0.0) eta = 0.1 * std::sqrt(n * m) / tn;
      bool accepted = false;
      while (eta * tn > 1e-12 * std::sqrt(n)) {
        const Mat trial = polar(w + eta * tangent, n);
        const double et = sample.energy(qh * trial);
        if (et >= e) {
          small = et - e < 1e-12 * std::max(std::abs(e), 1.0) ? small + 1 : 0;
          w = trial;
          e = et;
          eta *= 2.0;
          accepted = true;
          break;
        }
        eta *= 0.5;
      }
      if (!accepted || small >= 5) break;
    }
    const double val = e / n;
    res.per_restart.push_back(val);
    if (val > res.best) {
      res.best = val;
      res.config = {w, qh * w};
    }
  }
  return res;
}

FitResult extrapolate_gse(const std::vector<std::pair<double, double>>& values, double exponent) {
  std::set<double> distinct;
  for (const auto& [nn, e] : values) {
    if (!(nn > 0.0) || !std::isfinite(e)) throw Error(ErrorCode::Validation, "invalid (N, energy) pair");
    distinct.insert(nn);
  }
  if (distinct.size() < 3) throw Error(ErrorCode::IllConditionedFit, "need at least 3 distinct N");
  const auto k = static_cast<Eigen::Index>(values.size());
  Mat a(k, 2);
  Vec b(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::pow(values[static_cast<std::size_t>(i)].first, exponent);
    b(i) = values[static_cast<std::size_t>(i)].second;
  }
  const Eigen::ColPivHouseholderQR<Mat> qr(a);
  if (qr.rank() < 2) throw Error(ErrorCode::IllConditionedFit, "design matrix is rank deficient");
  const Vec c = qr.solve(b);
  FitResult f;
  f.e_inf = c(0);
  f.slope = c(1);
  f.residual = std::sqrt((a * c - b).squaredNorm() / static_cast<double>(k));
  return f;
}

}  // namespace vecspin
