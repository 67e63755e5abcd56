#include "vecspin/optimize.hpp"

#include "vecspin/error.hpp"
#include "vecspin/rng.hpp"

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

namespace vecspin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = 1e-9;  // floor added to the free PD multipliers

Vec random_normal(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  Vec z(n);
  for (int i = 0; i < n; ++i) z(i) = nd(rng);
  return z;
}

Mat gram(const double* g, int m) {
  const Eigen::Map<const Mat> G(g, m, m);
  return G * G.transpose();
}

class Functor final : public ceres::FirstOrderFunction {
public:
  Functor(const std::function<double(const Vec&)>& f, int n, double step)
      : f_(f), n_(n), step_(step) {}

  bool Evaluate(const double* p, double* cost, double* grad) const override {
    const Vec z = Eigen::Map<const Vec>(p, n_);
    double v;
    if (grad) {
      Vec g(n_);
      v = step_ > 0.0 ? numerical_gradient(f_, z, g, step_) : extrapolated_gradient(f_, z, g);
      if (!g.allFinite()) return false;
      Eigen::Map<Vec>(grad, n_) = g;
    } else {
      v = f_(z);
    }
    if (!std::isfinite(v)) return false;
    *cost = v;
    return true;
  }
  int NumParameters() const override { return n_; }

private:
  const std::function<double(const Vec&)>& f_;
  int n_;
  double step_;
};

LocalResult minimize_local_step(const std::function<double(const Vec&)>& f, const Vec& z0,
                                const OptimizerConfig& cfg, double step) {
  LocalResult res{z0, f(z0), kInf, false};
  if (!std::isfinite(res.value)) return res;
  if (z0.size() == 0) {
    res.kkt = 0.0;
    res.converged = true;
    return res;
  }
  Vec z = z0;
  ceres::GradientProblem problem(new Functor(f, static_cast<int>(z.size()), step));
  ceres::GradientProblemSolver::Options opt;
  opt.line_search_direction_type = ceres::BFGS;
  opt.line_search_type = ceres::WOLFE;
  opt.max_num_iterations = cfg.max_iters;
  opt.gradient_tolerance = 0.1 * cfg.grad_tol;
  opt.function_tolerance = 1e-15;
  opt.parameter_tolerance = 1e-15;
  opt.logging_type = ceres::SILENT;
  opt.minimizer_progress_to_stdout = false;
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(opt, problem, z.data(), &summary);
  const double v = f(z);
  if (std::isfinite(v) && v <= res.value) {
    res.z = z;
    res.value = v;
  }
  Vec g(res.z.size());
  if (step > 0.0)
    numerical_gradient(f, res.z, g, step);
  else
    extrapolated_gradient(f, res.z, g);
  res.kkt = g.allFinite() ? g.cwiseAbs().maxCoeff() : kInf;
  res.converged = res.kkt <= cfg.grad_tol;
  return res;
}

// Index of the best result: lowest value, then smaller parameter norm within
// 1e-10, then lower restart index.
std::size_t pick_best(const std::vector<LocalResult>& rs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < rs.size(); ++i) {
    const double dv = rs[i].value - rs[best].value;
    if (dv < -1e-10 || (std::abs(dv) <= 1e-10 && rs[i].z.norm() < rs[best].z.norm() - 1e-14))
      best = i;
  }
  return best;
}

std::vector<LocalResult> run_restarts(const std::function<double(const Vec&)>& f,
                                      const std::vector<Vec>& starts,
                                      const OptimizerConfig& cfg) {
  std::vector<std::future<LocalResult>> jobs;
  jobs.reserve(starts.size());
  for (const auto& z0 : starts)
    jobs.push_back(std::async(std::launch::async,
                              [&f, &cfg, z0] { return minimize_local(f, z0, cfg); }));
  std::vector<LocalResult> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

// Splits the level with the largest trace increment into two halves that
// share the same weight; the functionals are unchanged by this refinement.
// With `spread` one half instead takes a weight midway to its neighbour,
// which leaves the degenerate embedding.
void split_level(std::vector<double>& x, std::vector<SymMat>& Qs, bool spread = false) {
  const Eigen::Index m = Qs.back().dim();
  std::size_t best = 0;
  double best_tr = -1.0;
  SymMat prev = SymMat::zero(m);
  for (std::size_t k = 0; k < Qs.size(); ++k) {
    const double tr = (Qs[k] - prev).trace();
    if (tr > best_tr) {
      best_tr = tr;
      best = k;
    }
    prev = Qs[k];
  }
  const SymMat lo = best == 0 ? SymMat::zero(m) : Qs[best - 1];
  Qs.insert(Qs.begin() + static_cast<std::ptrdiff_t>(best), 0.5 * (lo + Qs[best]));
  x.insert(x.begin() + static_cast<std::ptrdiff_t>(best) + 1, x[best]);
  if (!spread) return;
  if (best > 0) {
    x[best] = 0.5 * (x[best - 1] + x[best]);
  } else {
    const double next = x.size() > 2 ? x[2] : x[1] + 1.0;
    x[1] = 0.5 * (x[1] + next);
  }
}

std::vector<int> schedule(const OptimizerConfig& cfg, int min_r) {
  std::vector<int> s;
  for (int r : cfg.r_schedule) s.push_back(std::max(r, min_r));
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

void check_constraint(const MixedModel& model, const SymMat& q) {
  if (q.dim() != model.m()) throw Error(ErrorCode::DimensionMismatch, "Q dim != model m");
  if (min_eig(q) < -1e-10) throw Error(ErrorCode::Validation, "Q is not PSD");
}

struct LevelProblem {
  std::function<double(const Vec&)> objective;  // with gauge terms
  std::function<double(const Vec&)> functional;
  int n = 0;
};

struct LevelOutcome {
  LocalResult best;
  std::vector<double> values;
};

// Restart 0 starts from `first` (an exact embedding of the previous level or
// a closed-form guess), restart 1 from a perturbation of `second` (or of
// `first` when there is no second guess), the rest from
// random draws. Restart i of level r owns the stream (seed, r, i).
LevelOutcome solve_level(const LevelProblem& prob, const OptimizerConfig& cfg, int r,
                         const std::optional<Vec>& first, const std::optional<Vec>& second,
                         const std::function<Vec(std::mt19937_64&)>& random_start) {
  std::vector<Vec> starts;
  for (int i = 0; i < cfg.restarts; ++i) {
    auto rng = make_stream(cfg.seed, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(i));
    if (i == 0 && first)
      starts.push_back(*first);
    else if (i == 1 && second)
      starts.push_back(*second + random_normal(rng, prob.n, 0.02));
    else if (i == 1 && first)
      starts.push_back(*first + random_normal(rng, prob.n, 0.05));
    else
      starts.push_back(random_start(rng));
  }
  const auto results = run_restarts(prob.objective, starts, cfg);
  LevelOutcome out;
  std::vector<LocalResult> scored;
  for (const auto& res : results) {
    const double v = std::isfinite(res.value) ? prob.functional(res.z) : kInf;
    out.values.push_back(v);
    scored.push_back({res.z, v, res.kkt, res.converged});
  }
  out.best = scored[pick_best(scored)];
  return out;
}

void record(OptReport& rep, int r, const LevelOutcome& out) {
  rep.per_restart_values.insert(rep.per_restart_values.end(), out.values.begin(),
                                out.values.end());
  if (!std::isfinite(out.best.value)) return;
  rep.per_level.push_back({r, out.best.value});
}

bool improves(const OptReport& rep, const LevelOutcome& out) {
  return std::isfinite(out.best.value) && out.best.value < rep.best_value;
}

SymMat psd_sqrt_or_zero(const SymMat& a) {
  return sym_func(a, [](double l) { return std::sqrt(std::max(l, 0.0)); });
}

}  // namespace

void OptimizerConfig::validate() const {
  if (restarts < 1) throw Error(ErrorCode::Validation, "restarts must be >= 1");
  if (!(grad_tol > 0.0)) throw Error(ErrorCode::Validation, "grad_tol must be positive");
  if (max_iters < 1) throw Error(ErrorCode::Validation, "max_iters must be >= 1");
  if (r_schedule.empty()) throw Error(ErrorCode::Validation, "r_schedule is empty");
  for (int r : r_schedule)
    if (r < 1) throw Error(ErrorCode::Validation, "level counts must be positive");
}

// --------------------------------------------------------------- LevelParam

LevelParam::LevelParam(const SymMat& q, int r)
    : q_(q), q_half_(sym_sqrt(q)), r_(r), m_(static_cast<int>(q.dim())),
      nx_(r >= 3 ? r - 1 : 0) {
  if (r < 1) throw Error(ErrorCode::Validation, "r must be positive");
}

std::optional<std::vector<SymMat>> LevelParam::unpack_levels(const double* g) const {
  const int mm = m_ * m_;
  Mat S = Mat::Zero(m_, m_);
  std::vector<Mat> grams;
  for (int k = 0; k < r_; ++k) {
    grams.push_back(gram(g + k * mm, m_));
    S += grams.back();
  }
  const SymMat s(S);
  if (!is_pd(s)) return std::nullopt;
  const Mat T = q_half_.mat() * sym_pow(s, -0.5).mat();
  std::vector<SymMat> Qs;
  Mat acc = Mat::Zero(m_, m_);
  for (int k = 0; k < r_; ++k) {
    acc += T * grams[k] * T.transpose();
    Qs.emplace_back(acc);
  }
  Qs.back() = q_;
  return Qs;
}

void LevelParam::pack_levels(const std::vector<SymMat>& Qs, double* g) const {
  const int mm = m_ * m_;
  SymMat prev = SymMat::zero(m_);
  for (int k = 0; k < r_; ++k) {
    const SymMat root = psd_sqrt_or_zero(Qs[k] - prev);
    Eigen::Map<Mat>(g + k * mm, m_, m_) = root.mat();
    prev = Qs[k];
  }
}

std::optional<DiscreteOrderParam> LevelParam::unpack(const Vec& z) const {
  DiscreteOrderParam p;
  p.x.assign(static_cast<std::size_t>(r_), 0.0);
  if (r_ >= 2) p.x.back() = 1.0;
  if (nx_ > 0) {
    const double total = z.head(nx_).squaredNorm();
    if (!(total > 0.0)) return std::nullopt;
    double c = 0.0;
    for (int k = 1; k <= r_ - 2; ++k) {
      c += z(k - 1) * z(k - 1);
      p.x[k] = std::min(1.0, c / total);
    }
  }
  auto levels = unpack_levels(z.data() + nx_);
  if (!levels) return std::nullopt;
  p.Qs = std::move(*levels);
  return p;
}

Vec LevelParam::pack(const DiscreteOrderParam& p) const {
  if (p.r() != r_) throw Error(ErrorCode::DimensionMismatch, "level count mismatch in pack");
  Vec z = Vec::Zero(size());
  if (nx_ > 0) {
    for (int k = 1; k <= r_ - 2; ++k) z(k - 1) = std::sqrt(std::max(0.0, p.x[k] - p.x[k - 1]));
    z(nx_ - 1) = std::sqrt(std::max(0.0, 1.0 - p.x[r_ - 2]));
  }
  pack_levels(p.Qs, z.data() + nx_);
  return z;
}

double LevelParam::gauge_penalty(const Vec& z) const {
  const int mm = m_ * m_;
  double tr = 0.0;
  for (int k = 0; k < r_; ++k) tr += gram(z.data() + nx_ + k * mm, m_).trace();
  double pen = 0.0;
  if (tr > 0.0) pen += std::pow(std::log(tr / q_.trace()), 2);
  if (nx_ > 0) {
    const double s = z.head(nx_).squaredNorm();
    if (s > 0.0) pen += std::pow(std::log(s), 2);
  }
  return pen;
}

// -------------------------------------------------------------- gradients

double numerical_gradient(const std::function<double(const Vec&)>& f, const Vec& z, Vec& g,
                          double rel_step) {
  const double f0 = f(z);
  g.resize(z.size());
  Vec w = z;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(z(i)));
    w(i) = z(i) + h;
    const double fp = f(w);
    w(i) = z(i) - h;
    const double fm = f(w);
    w(i) = z(i);
    const bool okp = std::isfinite(fp), okm = std::isfinite(fm);
    if (okp && okm)
      g(i) = (fp - fm) / (2.0 * h);
    else if (okp && std::isfinite(f0))
      g(i) = (fp - f0) / h;
    else if (okm && std::isfinite(f0))
      g(i) = (f0 - fm) / h;
    else
      g(i) = std::numeric_limits<double>::quiet_NaN();
  }
  return f0;
}

double extrapolated_gradient(const std::function<double(const Vec&)>& f, const Vec& z, Vec& g,
                             double rel_step) {
  constexpr int kTab = 8;
  constexpr double kCon = 1.4, kCon2 = kCon * kCon, kSafe = 2.0;
  const double f0 = f(z);
  g.resize(z.size());
  Vec w = z;
  double a[kTab][kTab];
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const auto central = [&](double h) {
      w(i) = z(i) + h;
      const double fp = f(w);
      w(i) = z(i) - h;
      const double fm = f(w);
      w(i) = z(i);
      return (fp - fm) / (2.0 * h);
    };
    double h = rel_step * std::max(1.0, std::abs(z(i)));
    a[0][0] = central(h);
    // shrink into the feasible neighbourhood first
    for (int t = 0; t < 30 && !std::isfinite(a[0][0]); ++t) {
      h *= 0.25;
      a[0][0] = central(h);
    }
    if (!std::isfinite(a[0][0])) {
      Vec gi;
      numerical_gradient(f, z, gi, 1e-8);
      g(i) = gi(i);
      continue;
    }
    double best = a[0][0], err = kInf;
    for (int k = 1; k < kTab; ++k) {
      h /= kCon;
      a[0][k] = central(h);
      if (!std::isfinite(a[0][k])) break;
      double fac = kCon2;
      for (int j = 1; j <= k; ++j) {
        a[j][k] = (a[j - 1][k] * fac - a[j - 1][k - 1]) / (fac - 1.0);
        fac *= kCon2;
        const double e = std::max(std::abs(a[j][k] - a[j - 1][k]), std::abs(a[j][k] - a[j - 1][k - 1]));
        if (e <= err) {
          err = e;
          best = a[j][k];
        }
      }
      if (std::abs(a[k][k] - a[k - 1][k - 1]) >= kSafe * err) break;
    }
    g(i) = best;
  }
  return f0;
}

CsObjective::CsObjective(MixedModel model, const SymMat& q, int r, double penalty_weight)
    : model_(std::move(model)), param_(q, r), w_(penalty_weight) {}

double CsObjective::functional(const Vec& z) const {
  const auto p = param_.unpack(z);
  if (!p) return kInf;
  try {
    return discrete_cs(model_, *p);
  } catch (const Error&) {
    return kInf;
  }
}

double CsObjective::operator()(const Vec& z) const {
  const double v = functional(z);
  return std::isfinite(v) ? v + w_ * param_.gauge_penalty(z) : kInf;
}

double CsObjective::gradient(const Vec& z, Vec& g) const {
  return extrapolated_gradient([this](const Vec& v) { return (*this)(v); }, z, g);
}

LocalResult minimize_local(const std::function<double(const Vec&)>& f, const Vec& z0,
                           const OptimizerConfig& cfg) {
  return minimize_local_step(f, z0, cfg, 0.0);
}

// -------------------------------------------------------------- CS search

OptReport minimize_discrete_cs(const MixedModel& model, const SymMat& q,
                               const OptimizerConfig& cfg) {
  cfg.validate();
  check_constraint(model, q);
  OptReport rep;
  rep.best_value = kInf;
  std::optional<DiscreteOrderParam> prev;
  for (int r : schedule(cfg, 2)) {
    const CsObjective obj(model, q, r, cfg.penalty_weight);
    const LevelProblem prob{[&obj](const Vec& z) { return obj(z); },
                            [&obj](const Vec& z) { return obj.functional(z); },
                            obj.param().size()};
    std::optional<Vec> first, second;
    if (prev) {
      DiscreteOrderParam p = *prev, ps = *prev;
      while (p.r() < r) split_level(p.x, p.Qs);
      while (ps.r() < r) split_level(ps.x, ps.Qs, true);
      first = obj.param().pack(p);
      second = obj.param().pack(ps);
    }
    const auto out = solve_level(prob, cfg, r, first, second, [&](std::mt19937_64& rng) {
      return random_normal(rng, prob.n, 1.0);
    });
    record(rep, r, out);
    if (!std::isfinite(out.best.value)) continue;
    prev = *obj.param().unpack(out.best.z);
    if (improves(rep, out)) {
      rep.best_value = out.best.value;
      rep.argmin = *prev;
      rep.kkt_residual = out.best.kkt;
      rep.converged = out.best.converged;
    }
  }
  if (!prev) throw Error(ErrorCode::NoFeasibleStart, "no restart reached a feasible point");
  return rep;
}

// ---------------------------------------------------------- Parisi search

namespace {

struct ParisiPoint {
  DiscreteOrderParam p;
  SymMat lambda;
};

class ParisiObjective {
public:
  ParisiObjective(const MixedModel& model, const SymMat& q, int r, double w)
      : model_(model), param_(q, r), w_(w), m_(model.m()) {}

  int size() const { return param_.size() + m_ * m_; }

  std::optional<ParisiPoint> unpack(const Vec& z) const {
    auto p = param_.unpack(z.head(param_.size()));
    if (!p) return std::nullopt;
    Mat lam1 = gram(z.data() + param_.size(), m_) + kEps * Mat::Identity(m_, m_);
    SymMat floor = SymMat::zero(m_);
    for (int k = 1; k <= p->r() - 1; ++k)
      floor += p->x[k] * (xi_eval(model_, p->level(k + 1), 1) - xi_eval(model_, p->level(k), 1));
    return ParisiPoint{std::move(*p), SymMat(lam1) + floor};
  }

  Vec pack(const ParisiPoint& pt) const {
    Vec z(size());
    z.head(param_.size()) = param_.pack(pt.p);
    const auto lv = parisi_levels(model_, pt.lambda, pt.p);
    const SymMat root = psd_sqrt_or_zero(lv.front() - kEps * SymMat::identity(m_));
    Eigen::Map<Mat>(z.data() + param_.size(), m_, m_) = root.mat();
    return z;
  }

  double functional(const Vec& z) const {
    const auto pt = unpack(z);
    if (!pt) return kInf;
    try {
      return discrete_parisi(model_, pt->lambda, pt->p);
    } catch (const Error&) {
      return kInf;
    }
  }

  double operator()(const Vec& z) const {
    const double v = functional(z);
    return std::isfinite(v) ? v + w_ * param_.gauge_penalty(z.head(param_.size())) : kInf;
  }

private:
  const MixedModel& model_;
  LevelParam param_;
  double w_;
  int m_;
};

}  // namespace

OptReport minimize_discrete_parisi(const MixedModel& model, const SymMat& q,
                                   const OptimizerConfig& cfg) {
  cfg.validate();
  check_constraint(model, q);
  OptReport rep;
  rep.best_value = kInf;
  std::optional<ParisiPoint> prev;
  for (int r : schedule(cfg, 2)) {
    const ParisiObjective obj(model, q, r, cfg.penalty_weight);
    const LevelProblem prob{[&obj](const Vec& z) { return obj(z); },
                            [&obj](const Vec& z) { return obj.functional(z); }, obj.size()};
    std::optional<Vec> first, second;
    if (prev) {
      ParisiPoint pt = *prev, ps = *prev;
      while (pt.p.r() < r) split_level(pt.p.x, pt.p.Qs);
      while (ps.p.r() < r) split_level(ps.p.x, ps.p.Qs, true);
      first = obj.pack(pt);
      second = obj.pack(ps);
    }
    const auto out = solve_level(prob, cfg, r, first, second, [&](std::mt19937_64& rng) {
      Vec z = random_normal(rng, prob.n, 1.0);
      return z;
    });
    record(rep, r, out);
    if (!std::isfinite(out.best.value)) continue;
    prev = *obj.unpack(out.best.z);
    if (improves(rep, out)) {
      rep.best_value = out.best.value;
      rep.argmin = prev->p;
      rep.lambda = prev->lambda;
      rep.kkt_residual = out.best.kkt;
      rep.converged = out.best.converged;
    }
  }
  if (!prev) throw Error(ErrorCode::NoFeasibleStart, "no restart reached a feasible point");
  return rep;
}

// ------------------------------------------------------------ sup over Q

namespace {

int sup_size(int m) { return m * (m + 1) / 2 - 1; }

SymMat unit_diagonal(const Vec& z, int m) {
  Mat V = Mat::Zero(m, m);
  V(0, 0) = 1.0;
  int off = 0;
  for (int i = 1; i < m; ++i) {
    Vec row = z.segment(off, i + 1);
    off += i + 1;
    const double n = row.norm();
    if (!(n > 0.0)) return SymMat();
    V.row(i).head(i + 1) = row.transpose() / n;
  }
  return SymMat(Mat(V * V.transpose()));
}

Vec unit_diagonal_pack(const SymMat& q) {
  const int m = static_cast<int>(q.dim());
  // Cholesky rows of the correlation matrix (jitter keeps it defined on the
  // PSD boundary).
  Eigen::LLT<Mat> llt(q.mat() + 1e-14 * Mat::Identity(m, m));
  const Mat V = llt.matrixL();
  Vec z(sup_size(m));
  int off = 0;
  for (int i = 1; i < m; ++i) {
    z.segment(off, i + 1) = V.row(i).head(i + 1).transpose();
    off += i + 1;
  }
  return z;
}

}  // namespace

SupResult sup_over_Q(const MixedModel& model, const OptimizerConfig& cfg,
                     std::optional<SymMat> q_init) {
  cfg.validate();
  const int m = model.m();
  SupResult best;
  if (m == 1) {
    best.Q = SymMat::identity(1);
    best.inner = minimize_discrete_cs(model, best.Q, cfg);
    best.value = best.inner.best_value;
    return best;
  }
  Vec z0;
  if (q_init) {
    z0 = unit_diagonal_pack(*q_init);
  } else {
    auto rng = make_stream(cfg.seed, 0xC0FFEEULL);
    z0 = unit_diagonal_pack(SymMat::identity(m)) + random_normal(rng, sup_size(m), 0.1);
  }
  auto inner = [&](const Vec& z) -> std::optional<OptReport> {
    const SymMat q = unit_diagonal(z, m);
    if (q.dim() == 0 || !is_pd(q)) return std::nullopt;
    try {
      return minimize_discrete_cs(model, q, cfg);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  const std::function<double(const Vec&)> neg = [&](const Vec& z) {
    const auto rep = inner(z);
    return rep ? -rep->best_value : kInf;
  };
  OptimizerConfig outer = cfg;
  outer.max_iters = std::min(cfg.max_iters, 50);
  outer.grad_tol = std::max(cfg.grad_tol, 1e-6);
  const auto res = minimize_local_step(neg, z0, outer, 1e-4);
  const auto rep = inner(res.z);
  if (!rep) throw Error(ErrorCode::NoFeasibleStart, "outer search left the PD cone");
  best.Q = unit_diagonal(res.z, m);
  best.inner = *rep;
  best.value = rep->best_value;
  return best;
}

// ------------------------------------------------------- zero temperature

RsGse rs_gse_closed_form(const MixedModel& model, const SymMat& q) {
  if (q.dim() != model.m()) throw Error(ErrorCode::DimensionMismatch, "Q dim != model m");
  if (!is_pd(q)) throw Error(ErrorCode::NotPositiveDefinite, "Q is not positive definite");
  const SymMat a = xi_eval(model, q, 1) + model.field_outer();
  if (!is_pd(a))
    throw Error(ErrorCode::NotPositiveDefinite, "xi'(Q) + hh^T is not positive definite");
  const SymMat qh = sym_sqrt(q);
  const SymMat mm(Mat(qh.mat() * a.mat() * qh.mat()));
  const SymMat root = sym_sqrt(mm);
  RsGse out;
  Mat l = qh.mat() * sym_pow(mm, -0.5).mat() * qh.mat();
  // Newton steps on L A L = Q; E (A L) + (L A) E = Q - L A L, solved in vec form
  const int m = static_cast<int>(q.dim());
  const Mat eye = Mat::Identity(m, m);
  for (int it = 0; it < 2; ++it) {
    const Mat r = q.mat() - l * a.mat() * l;
    const Mat al = a.mat() * l, la = l * a.mat();
    const Mat k = Eigen::kroneckerProduct(al.transpose(), eye) + Eigen::kroneckerProduct(eye, la);
    const Vec e = k.partialPivLu().solve(Eigen::Map<const Vec>(r.data(), r.size()));
    l += Eigen::Map<const Mat>(e.data(), m, m);
    l = 0.5 * (l + l.transpose()).eval();
  }
  out.L0 = SymMat(l);
  out.value = root.trace();
  out.sum_value = sum_all(root);
  out.variants_agree = std::abs(out.value - out.sum_value) <= 1e-8 * (1.0 + std::abs(out.value));
  return out;
}

namespace {

struct GsePoint {
  std::vector<double> a;
  std::vector<SymMat> Qs;
  SymMat L;
};

class GseObjective {
public:
  GseObjective(const MixedModel& model, const SymMat& q, int r)
      : model_(model), param_(q, r), r_(r), m_(model.m()) {}

  int size() const { return r_ + r_ * m_ * m_ + m_ * m_; }

  std::optional<GsePoint> unpack(const Vec& z) const {
    GsePoint pt;
    double c = 0.0;
    for (int k = 0; k < r_; ++k) {
      c += z(k) * z(k);
      pt.a.push_back(c);
    }
    auto levels = param_.unpack_levels(z.data() + r_);
    if (!levels) return std::nullopt;
    pt.Qs = std::move(*levels);
    SymMat A = SymMat::zero(m_);
    SymMat prev = SymMat::zero(m_);
    for (int k = 0; k < r_; ++k) {
      A += pt.a[k] * (pt.Qs[k] - prev);
      prev = pt.Qs[k];
    }
    const int off = r_ + r_ * m_ * m_;
    pt.L = A + SymMat(Mat(gram(z.data() + off, m_) + kEps * Mat::Identity(m_, m_)));
    return pt;
  }

  Vec pack(const GsePoint& pt) const {
    Vec z(size());
    double prev = 0.0;
    for (int k = 0; k < r_; ++k) {
      z(k) = std::sqrt(std::max(0.0, pt.a[k] - prev));
      prev = pt.a[k];
    }
    param_.pack_levels(pt.Qs, z.data() + r_);
    SymMat A = SymMat::zero(m_);
    SymMat qprev = SymMat::zero(m_);
    for (int k = 0; k < r_; ++k) {
      A += pt.a[k] * (pt.Qs[k] - qprev);
      qprev = pt.Qs[k];
    }
    const SymMat root = psd_sqrt_or_zero(pt.L - A - kEps * SymMat::identity(m_));
    Eigen::Map<Mat>(z.data() + r_ + r_ * m_ * m_, m_, m_) = root.mat();
    return z;
  }

  double functional(const Vec& z) const {
    const auto pt = unpack(z);
    if (!pt) return kInf;
    try {
      return gse_discrete(model_, pt->L, pt->a, pt->Qs);
    } catch (const Error&) {
      return kInf;
    }
  }

  double operator()(const Vec& z) const { return functional(z); }

private:
  const MixedModel& model_;
  LevelParam param_;
  int r_, m_;
};

}  // namespace

OptReport minimize_gse(const MixedModel& model, const SymMat& q, const OptimizerConfig& cfg) {
  cfg.validate();
  check_constraint(model, q);
  const int m = model.m();
  OptReport rep;
  rep.best_value = kInf;
  std::optional<GsePoint> prev;
  std::optional<RsGse> rs;
  try {
    rs = rs_gse_closed_form(model, q);
  } catch (const Error&) {
  }
  for (int r : schedule(cfg, 1)) {
    const GseObjective obj(model, q, r);
    const LevelProblem prob{[&obj](const Vec& z) { return obj(z); },
                            [&obj](const Vec& z) { return obj.functional(z); }, obj.size()};
    std::optional<Vec> first, second;
    if (prev) {
      GsePoint pt = *prev, ps = *prev;
      while (static_cast<int>(pt.Qs.size()) < r) split_level(pt.a, pt.Qs);
      while (static_cast<int>(ps.Qs.size()) < r) split_level(ps.a, ps.Qs, true);
      first = obj.pack(pt);
      second = obj.pack(ps);
    } else if (rs) {
      GsePoint pt;
      for (int k = 0; k < r; ++k) {
        pt.a.push_back(0.0);
        pt.Qs.push_back(static_cast<double>(k + 1) / r * q);
      }
      pt.Qs.back() = q;
      pt.L = rs->L0;
      first = obj.pack(pt);
    }
    const auto out = solve_level(prob, cfg, r, first, second, [&](std::mt19937_64& rng) {
      Vec z = random_normal(rng, prob.n, 1.0);
      z.head(r) *= 0.5;
      const Mat eye = Mat::Identity(m, m);
      z.tail(m * m) += Eigen::Map<const Vec>(eye.data(), m * m);
      return z;
    });
    record(rep, r, out);
    if (!std::isfinite(out.best.value)) continue;
    prev = *obj.unpack(out.best.z);
    if (improves(rep, out)) {
      rep.best_value = out.best.value;
      rep.argmin.Qs = prev->Qs;
      rep.argmin.x.assign(prev->Qs.size(), 0.0);
      rep.alpha = prev->a;
      rep.L = prev->L;
      rep.kkt_residual = out.best.kkt;
      rep.converged = out.best.converged;
    }
  }
  if (!prev) throw Error(ErrorCode::NoFeasibleStart, "no restart reached a feasible point");
  return rep;
}

}  // namespace vecspin
