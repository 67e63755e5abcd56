#include "vecspin/functionals.hpp"

#include "vecspin/error.hpp"
#include "vecspin/quadrature.hpp"
#include "tables.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace vecspin {

namespace {

using detail::checked_inv;
using detail::checked_logdet;
using detail::merged_breaks;
using detail::weighted_cumulative;

void check_pair(const MixedModel& model, const MeasureFn& x, const MatrixPath& path) {
  if (path.dim() != model.m()) throw Error(ErrorCode::DimensionMismatch, "path dim != model m");
  if (std::abs(x.end() - path.end()) > 1e-10 * (1.0 + path.end()))
    throw Error(ErrorCode::Validation, "measure and path live on different intervals");
}

}  // namespace

std::vector<SymMat> cs_levels(const DiscreteOrderParam& p) {
  const int r = p.r();
  std::vector<SymMat> d(static_cast<std::size_t>(std::max(r - 1, 0)), SymMat::zero(p.dim()));
  SymMat acc = SymMat::zero(p.dim());
  for (int k = r - 1; k >= 1; --k) {
    acc += p.x[k] * (p.level(k + 1) - p.level(k));
    d[k - 1] = acc;
  }
  return d;
}

std::vector<SymMat> parisi_levels(const MixedModel& model, const SymMat& lambda,
                                  const DiscreteOrderParam& p) {
  const int r = p.r();
  std::vector<SymMat> l(static_cast<std::size_t>(r), lambda);
  std::vector<SymMat> xi1;
  for (int k = 0; k <= r; ++k) xi1.push_back(xi_eval(model, p.level(k), 1));
  for (int k = r - 1; k >= 1; --k) l[k - 1] = l[k] - p.x[k] * (xi1[k + 1] - xi1[k]);
  return l;
}

double discrete_cs(const MixedModel& model, const DiscreteOrderParam& p) {
  p.validate();
  const int r = p.r();
  if (r < 2) throw Error(ErrorCode::Validation, "discrete CS needs r >= 2");
  if (p.dim() != model.m()) throw Error(ErrorCode::DimensionMismatch, "order parameter dim");
  const auto d = cs_levels(p);
  for (int k = 1; k <= r - 1; ++k)
    if (!is_pd(d[k - 1])) {
      std::ostringstream os;
      os << "D_" << k << " has min eigenvalue " << min_eig(d[k - 1]);
      throw Error(ErrorCode::SingularD, os.str());
    }
  const SymMat last = p.Q() - p.level(r - 1);
  double v = frob_ip(model.field_outer(), d[0]);
  v += checked_logdet(last, ErrorCode::SingularD, "Q - Q_{r-1}") / p.x[r - 1];
  for (int k = 1; k <= r - 2; ++k)
    v += scaled_logdet_ratio(d[k], p.level(k + 1) - p.level(k), p.x[k]);
  v += frob_ip(p.level(1), sym_inv(d[0]));
  for (int k = 1; k <= r - 1; ++k)
    v += p.x[k] * sum_all(xi_eval(model, p.level(k + 1), 0) - xi_eval(model, p.level(k), 0));
  return 0.5 * v;
}

double discrete_parisi(const MixedModel& model, const SymMat& lambda,
                       const DiscreteOrderParam& p, const ParisiOptions& opt) {
  p.validate();
  const int r = p.r();
  if (p.dim() != model.m() || lambda.dim() != model.m())
    throw Error(ErrorCode::DimensionMismatch, "order parameter or Lambda dim");
  const auto l = parisi_levels(model, lambda, p);
  for (int k = 1; k <= r; ++k)
    if (!is_pd(l[k - 1])) {
      std::ostringstream os;
      os << "Lambda_" << k << " has min eigenvalue " << min_eig(l[k - 1]);
      throw Error(ErrorCode::SingularLambda, os.str());
    }
  const SymMat l1inv = sym_inv(l[0]);
  const SymMat& field_mat = opt.field == ParisiField::lambda1 ? l1inv : sym_inv(lambda);
  double v = frob_ip(model.field_outer(), field_mat);
  v += frob_ip(lambda, p.Q()) - static_cast<double>(model.m()) - logdet(lambda);
  for (int k = 1; k <= r - 1; ++k) {
    const SymMat dxi =
        xi_eval(model, p.level(k + 1), 1) - xi_eval(model, p.level(k), 1);
    if (opt.log_weight == ParisiLogWeight::scaled)
      v += scaled_logdet_ratio(l[k - 1], dxi, p.x[k]);
    else
      v += logdet(l[k]) - logdet(l[k - 1]);
  }
  v += frob_ip(xi_eval(model, p.level(1), 1), l1inv);
  for (int k = 1; k <= r - 1; ++k)
    v -= p.x[k] * sum_all(theta_eval(model, p.level(k + 1)) - theta_eval(model, p.level(k)));
  return 0.5 * v;
}

double default_T_hat(const MeasureFn& x, const MatrixPath& path) {
  const double tx = x.t_one();
  return tx + 0.5 * (path.end() - tx);
}

SymMat phi_hat(const MeasureFn& x, const MatrixPath& path, double t, const QuadOptions& q) {
  const Grid g(merged_breaks(x, path, {t}), q.n_quad);
  const auto tab = weighted_cumulative(
      g, x, path.dim(), true, [&](double s, double h) { return path.deriv(s, h).mat(); },
      [&](double s, double h) { return path.value(s, h).mat(); });
  const auto it = std::lower_bound(g.nodes().begin(), g.nodes().end(), t - 1e-13);
  return SymMat(tab.node[static_cast<std::size_t>(it - g.nodes().begin())]);
}

double continuous_cs(const MixedModel& model, const MeasureFn& x, const MatrixPath& path,
                     std::optional<double> T_hat, const QuadOptions& q) {
  check_pair(model, x, path);
  const double m = path.end();
  const double tx = x.t_one();
  const double th = T_hat.value_or(default_T_hat(x, path));
  if (!(tx < th && th < m)) {
    std::ostringstream os;
    os << "T_hat=" << th << " outside (" << tx << ", " << m << ")";
    throw Error(ErrorCode::InvalidThat, os.str());
  }
  const Grid g(merged_breaks(x, path, {tx, th}), q.n_quad, {{tx, th, m}});
  const SymMat hh = model.field_outer();
  const auto hat = weighted_cumulative(
      g, x, path.dim(), true, [&](double s, double h) { return path.deriv(s, h).mat(); },
      [&](double s, double h) { return path.value(s, h).mat(); });

  const double t1 = simpson_sum(g, 0, g.size(), [&](std::size_t i) {
    const double c = g.mid(i);
    auto f = [&](double t) {
      const double xv = x.at(t, c);
      if (xv == 0.0) return 0.0;
      return xv * frob_ip(xi_eval(model, path.value(t, c), 1) + hh, path.deriv(t, c));
    };
    return std::array<double, 3>{f(g.left(i)), f(c), f(g.right(i))};
  });

  const double t2 = checked_logdet(path.final_value() - path.value(th),
                                   ErrorCode::SingularPath, "Phi(m) - Phi(T_hat)");

  std::size_t end_i = 0;
  while (end_i < g.size() && g.right(end_i) <= th + 1e-13) ++end_i;
  const double t3 = simpson_sum(g, 0, end_i, [&](std::size_t i) {
    const double c = g.mid(i);
    auto f = [&](const Mat& ph, double t) {
      return frob_ip(checked_inv(SymMat(ph), ErrorCode::SingularPath, "Phi-hat"),
                     path.deriv(t, c));
    };
    return std::array<double, 3>{f(hat.node[i], g.left(i)), f(hat.mid[i], c),
                                 f(hat.node[i + 1], g.right(i))};
  });
  return 0.5 * (t1 + t2 + t3);
}

double continuous_cs_rewritten(const MixedModel& model, const MeasureFn& x,
                               const MatrixPath& path, const QuadOptions& q) {
  check_pair(model, x, path);
  const double tx = x.t_one();
  const Grid g(merged_breaks(x, path, {tx}), q.n_quad);
  const SymMat hh = model.field_outer();
  const auto chk = weighted_cumulative(
      g, x, path.dim(), false, [&](double s, double h) { return path.deriv(s, h).mat(); },
      [&](double s, double h) { return path.value(s, h).mat(); });
  const Mat& total = chk.node.back();
  const SymMat q_end = path.final_value();

  const double a = frob_ip(xi_eval(model, q_end, 1) + hh, SymMat(total));
  const double b = simpson_sum(g, 0, g.size(), [&](std::size_t i) {
    const double c = g.mid(i);
    auto f = [&](const Mat& ck, double t) {
      const SymMat phi = path.value(t, c);
      return frob_ip(SymMat(ck), hadamard(xi_eval(model, phi, 2), path.deriv(t, c)));
    };
    return std::array<double, 3>{f(chk.node[i], g.left(i)), f(chk.mid[i], c),
                                 f(chk.node[i + 1], g.right(i))};
  });
  std::size_t end_i = 0;
  while (end_i < g.size() && g.right(end_i) <= tx + 1e-13) ++end_i;
  const double c3 = simpson_sum(g, 0, end_i, [&](std::size_t i) {
    const double c = g.mid(i);
    auto f = [&](const Mat& ck, double t) {
      return frob_ip(checked_inv(SymMat(Mat(total - ck)), ErrorCode::SingularPath,
                                 "Phi-check(m) - Phi-check(t)"),
                     path.deriv(t, c));
    };
    return std::array<double, 3>{f(chk.node[i], g.left(i)), f(chk.mid[i], c),
                                 f(chk.node[i + 1], g.right(i))};
  });
  const double d = checked_logdet(q_end - path.value(tx, tx), ErrorCode::SingularPath,
                                  "Phi(m) - Phi(t_x)");
  return 0.5 * (a - b + c3 + d);
}

double continuous_parisi(const MixedModel& model, const MeasureFn& x, const SymMat& lambda,
                         const MatrixPath& path, const QuadOptions& q) {
  check_pair(model, x, path);
  if (lambda.dim() != model.m()) throw Error(ErrorCode::DimensionMismatch, "Lambda dim");
  const Grid g(merged_breaks(x, path, {}), q.n_quad);
  const SymMat hh = model.field_outer();
  const auto dx = weighted_cumulative(
      g, x, path.dim(), true,
      [&](double s, double h) {
        return hadamard(xi_eval(model, path.value(s, h), 2), path.deriv(s, h)).mat();
      },
      [&](double s, double h) { return xi_eval(model, path.value(s, h), 1).mat(); });

  auto resolvent = [&](const Mat& d) {
    return checked_inv(SymMat(Mat(lambda.mat() - d)), ErrorCode::SingularLambda,
                       "Lambda - D^x(q)");
  };
  const double t1 = simpson_sum(g, 0, g.size(), [&](std::size_t i) {
    const double c = g.mid(i);
    auto f = [&](const Mat& d, double t) {
      return frob_ip(hadamard(xi_eval(model, path.value(t, c), 2), path.deriv(t, c)),
                     resolvent(d));
    };
    return std::array<double, 3>{f(dx.node[i], g.left(i)), f(dx.mid[i], c),
                                 f(dx.node[i + 1], g.right(i))};
  });
  const double t2 = frob_ip(hh, resolvent(dx.node.front()));
  const double t3 = simpson_sum(g, 0, g.size(), [&](std::size_t i) {
    const double c = g.mid(i);
    auto f = [&](double t) {
      const double xv = x.at(t, c);
      if (xv == 0.0) return 0.0;
      const SymMat phi = path.value(t, c);
      return xv * frob_ip(hadamard(xi_eval(model, phi, 2), phi), path.deriv(t, c));
    };
    return std::array<double, 3>{f(g.left(i)), f(c), f(g.right(i))};
  });
  const double rest = frob_ip(lambda, path.final_value()) - static_cast<double>(model.m()) -
                      checked_logdet(lambda, ErrorCode::SingularLambda, "Lambda");
  return 0.5 * (t1 + t2 - t3 + rest);
}

double gse_functional(const MixedModel& model, const ZeroTempTriple& triple,
                      const QuadOptions& q) {
  const auto& [L, alpha, path] = triple;
  check_pair(model, alpha, path);
  if (L.dim() != model.m()) throw Error(ErrorCode::DimensionMismatch, "L dim");
  const Grid g(merged_breaks(alpha, path, {}), q.n_quad);
  const SymMat hh = model.field_outer();
  const auto acc = weighted_cumulative(
      g, alpha, path.dim(), false, [&](double s, double h) { return path.deriv(s, h).mat(); },
      [&](double s, double h) { return path.value(s, h).mat(); });

  auto resolvent = [&](const Mat& a) {
    return checked_inv(SymMat(Mat(L.mat() - a)), ErrorCode::InfeasibleTriple,
                       "L - int alpha Phi'");
  };
  const double t0 = frob_ip(xi_eval(model, path.final_value(), 1) + hh, L);
  const double t1 = simpson_sum(g, 0, g.size(), [&](std::size_t i) {
    const double c = g.mid(i);
    auto f = [&](const Mat& a, double t) { return frob_ip(resolvent(a), path.deriv(t, c)); };
    return std::array<double, 3>{f(acc.node[i], g.left(i)), f(acc.mid[i], c),
                                 f(acc.node[i + 1], g.right(i))};
  });
  const double t2 = simpson_sum(g, 0, g.size(), [&](std::size_t i) {
    const double c = g.mid(i);
    auto f = [&](const Mat& a, double t) {
      return frob_ip(hadamard(xi_eval(model, path.value(t, c), 2), path.deriv(t, c)),
                     SymMat(a));
    };
    return std::array<double, 3>{f(acc.node[i], g.left(i)), f(acc.mid[i], c),
                                 f(acc.node[i + 1], g.right(i))};
  });
  return 0.5 * (t0 + t1 - t2);
}

double gse_discrete(const MixedModel& model, const SymMat& L, const std::vector<double>& a,
                    const std::vector<SymMat>& Qs) {
  if (a.size() != Qs.size() || Qs.empty())
    throw Error(ErrorCode::DimensionMismatch, "alpha levels and Q levels differ in count");
  const Eigen::Index m = model.m();
  if (L.dim() != m) throw Error(ErrorCode::DimensionMismatch, "L dim");
  for (std::size_t k = 0; k < a.size(); ++k)
    if (!(a[k] >= 0.0) || (k > 0 && a[k] < a[k - 1]))
      throw Error(ErrorCode::MonotonicityViolation, "alpha levels must be nonnegative and nondecreasing");
  const SymMat hh = model.field_outer();
  SymMat A = SymMat::zero(m);
  SymMat prev = SymMat::zero(m);
  SymMat xi1_prev = xi_eval(model, prev, 1);
  SymMat th_prev = theta_eval(model, prev);
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t k = 0; k < Qs.size(); ++k) {
    const SymMat dq = Qs[k] - prev;
    const SymMat M = L - A;
    if (!is_pd(M)) throw Error(ErrorCode::InfeasibleTriple, "L - A_k is not positive definite");
    const SymMat xi1 = xi_eval(model, Qs[k], 1);
    const SymMat th = theta_eval(model, Qs[k]);
    try {
      s1 -= scaled_logdet_ratio(M, -1.0 * dq, a[k]);
    } catch (const Error&) {
      throw Error(ErrorCode::InfeasibleTriple, "L - A(t) loses positive definiteness");
    }
    s2 += frob_ip(xi1 - xi1_prev, A - a[k] * prev) + a[k] * sum_all(th - th_prev);
    A += a[k] * dq;
    prev = Qs[k];
    xi1_prev = xi1;
    th_prev = th;
  }
  if (!is_pd(L - A)) throw Error(ErrorCode::InfeasibleTriple, "L - A(m) is not positive definite");
  return 0.5 * (frob_ip(xi_eval(model, Qs.back(), 1) + hh, L) + s1 - s2);
}

}  // namespace vecspin
