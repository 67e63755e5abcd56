#include "vecspin/diagnostics.hpp"

#include "vecspin/error.hpp"
#include "vecspin/quadrature.hpp"
#include "tables.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace vecspin {

namespace {

using detail::checked_inv;

// Index one past the last interval that ends at or before t.
std::size_t intervals_up_to(const Grid& g, double t) {
  std::size_t n = 0;
  while (n < g.size() && g.right(n) <= t + 1e-13) ++n;
  return n;
}

// S_k(u) = <xi^{(k)}(Phi(u)), Phi'(u)^{ok}>
double directional(const MixedModel& model, const MatrixPath& path, double u, double hint,
                   int k) {
  const SymMat d = path.deriv(u, hint);
  return frob_ip(xi_eval(model, path.value(u, hint), k), hadamard_pow(d, k));
}

}  // namespace

OptimalityReport critical_residual(const MixedModel& model, const MeasureFn& x,
                                   const MatrixPath& path, double support_tol, double tolerance,
                                   const QuadOptions& q) {
  if (path.dim() != model.m()) throw Error(ErrorCode::DimensionMismatch, "path dim != model m");
  const double tx = x.t_one();
  const Grid g(detail::merged_breaks(x, path, {tx}), q.n_quad);
  const SymMat hh = model.field_outer();
  const auto hat = detail::path_cumulative(g, x, path, true);
  const std::size_t n_int = intervals_up_to(g, tx);

  auto kernel = [&](const Mat& ph, double t, double hint) {
    const SymMat inv = checked_inv(SymMat(ph), ErrorCode::SingularPath, "Phi-hat");
    return Mat(inv.mat() * path.deriv(t, hint).mat() * inv.mat());
  };

  OptimalityReport rep;
  rep.tolerance = tolerance;
  Mat k_int = Mat::Zero(model.m(), model.m());
  for (std::size_t i = 0; i <= n_int; ++i) {
    if (i > 0) {
      const std::size_t j = i - 1;
      const double c = g.mid(j);
      k_int += g.width(j) / 6.0 *
               (kernel(hat.node[j], g.left(j), c) + 4.0 * kernel(hat.mid[j], c, c) +
                kernel(hat.node[i], g.right(j), c));
    }
    const double t = g.node(i);
    const double hint = i < g.size() ? g.mid(i) : g.mid(i - 1);
    const double upper = i < g.size() ? x.at(g.right(i), g.mid(i)) : x.end_value();
    const double lower = i > 0 ? x.at(g.node(i - 1), g.mid(i - 1)) : 0.0;
    const bool in = upper - lower > support_tol;

    const SymMat f = xi_eval(model, path.value(t, hint), 1) + hh - SymMat(k_int);
    const double res = f.frob_norm();
    const double lhint = i > 0 ? g.mid(i - 1) : hint;
    const double proj = std::abs(frob_ip(f, path.deriv(t, lhint)));

    rep.support_grid.push_back(t);
    rep.in_support.push_back(in);
    rep.per_point_residuals.emplace_back(t, res);
    if (in) {
      rep.residual_sup = std::max(rep.residual_sup, res);
      rep.projected_sup = std::max(rep.projected_sup, proj);
    }
  }
  rep.pass = rep.residual_sup < tolerance;
  return rep;
}

double parisi_density(const MixedModel& model, const MatrixPath& path, double u) {
  const SymMat d = path.deriv(u, u);
  const SymMat phi = path.value(u, u);
  const double num = frob_ip(xi_eval(model, phi, 3), hadamard_pow(d, 3));
  const SymMat dh = sym_sqrt(d);
  const SymMat inner(Mat(dh.mat() * hadamard(xi_eval(model, phi, 2), d).mat() * dh.mat()));
  const double den = 2.0 * sym_pow(inner, 1.5).trace();
  if (!(den > 1e-14)) {
    std::ostringstream os;
    os << "density denominator " << den << " at u=" << u;
    throw Error(ErrorCode::DegenerateDerivative, os.str());
  }
  return num / den;
}

RsCondition rs_condition(const MixedModel& model, const SymMat& q) {
  if (q.dim() != model.m()) throw Error(ErrorCode::DimensionMismatch, "Q dim != model m");
  const SymMat gap =
      xi_eval(model, q, 1) + model.field_outer() - hadamard(xi_eval(model, q, 2), q);
  RsCondition c;
  c.margin = min_eig(gap);
  c.entrywise_margin = gap.mat().minCoeff();
  c.paired = frob_ip(gap, q);
  c.flag = c.margin >= -1e-10;
  return c;
}

OptimalityReport zero_temp_g(const MixedModel& model, const ZeroTempTriple& triple,
                             std::optional<double> g_tol, const QuadOptions& q) {
  const auto& [L, alpha, path] = triple;
  if (path.dim() != model.m() || L.dim() != model.m())
    throw Error(ErrorCode::DimensionMismatch, "triple dims != model m");
  const double value = gse_functional(model, triple, q);
  const double tol = g_tol.value_or(1e-6 * (1.0 + std::abs(value)));

  const Grid g(detail::merged_breaks(alpha, path, {}), q.n_quad);
  const SymMat hh = model.field_outer();
  const auto acc = detail::path_cumulative(g, alpha, path, false);
  const std::size_t n = g.size();

  auto a_at = [&](std::size_t i, double t) -> Mat {
    const double a = g.left(i), c = g.mid(i);
    double v = 0.0;
    if (alpha.constant_on(a, g.right(i), &v))
      return acc.node[i] + v * (path.value(t, c).mat() - path.value(a, c).mat());
    const double s = 0.5 * (a + t);
    return acc.node[i] + (t - a) / 6.0 *
                             (alpha.at(a, c) * path.deriv(a, c).mat() +
                              4.0 * alpha.at(s, c) * path.deriv(s, c).mat() +
                              alpha.at(t, c) * path.deriv(t, c).mat());
  };
  auto zpz = [&](const Mat& a, double t, double hint) {
    const SymMat z = checked_inv(SymMat(Mat(L.mat() - a)), ErrorCode::InfeasibleTriple,
                                 "L - int alpha Phi'");
    return Mat(z.mat() * path.deriv(t, hint).mat() * z.mat());
  };

  // hbar at left, mid, right of every interval
  std::vector<std::array<double, 3>> hb(n);
  Mat k_int = Mat::Zero(model.m(), model.m());
  for (std::size_t i = 0; i < n; ++i) {
    const double a = g.left(i), b = g.right(i), c = g.mid(i);
    const double q1 = 0.5 * (a + c), q3 = 0.5 * (c + b);
    auto gbar = [&](const Mat& k, double t) {
      const SymMat gm = xi_eval(model, path.value(t, c), 1) + hh - SymMat(k);
      return frob_ip(gm, path.deriv(t, c));
    };
    hb[i][0] = gbar(k_int, a);
    const Mat za = zpz(acc.node[i], a, c), zc = zpz(acc.mid[i], c, c),
              zb = zpz(acc.node[i + 1], b, c);
    k_int += (c - a) / 6.0 * (za + 4.0 * zpz(a_at(i, q1), q1, c) + zc);
    hb[i][1] = gbar(k_int, c);
    k_int += (b - c) / 6.0 * (zc + 4.0 * zpz(a_at(i, q3), q3, c) + zb);
    hb[i][2] = gbar(k_int, b);
  }

  OptimalityReport rep;
  rep.tolerance = tol;
  rep.stationarity =
      (xi_eval(model, path.final_value(), 1) + hh - SymMat(k_int)).frob_norm();
  rep.residual_sup = rep.stationarity;

  std::vector<double> gv(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;)
    gv[i] = gv[i + 1] + g.width(i) / 6.0 * (hb[i][0] + 4.0 * hb[i][1] + hb[i][2]);

  rep.g_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = g.node(i);
    rep.support_grid.push_back(t);
    rep.in_support.push_back(std::abs(gv[i]) <= tol);
    rep.per_point_residuals.emplace_back(t, gv[i]);
    rep.g_min = std::min(rep.g_min, gv[i]);
    // alpha mass carried by node i: the jump there, then the increase over
    // the interval to its right
    const double before = i > 0 ? alpha.at(t, g.mid(i - 1)) : 0.0;
    const double after = i < n ? alpha.at(t, g.mid(i)) : alpha.end_value();
    if (i < n && std::abs(gv[i]) > tol) rep.off_support_mass += std::max(after - before, 0.0);
    if (i < n) {
      const double inc = alpha.at(g.right(i), g.mid(i)) - after;
      if (std::max(std::abs(gv[i]), std::abs(gv[i + 1])) > tol && inc > 0.0)
        rep.off_support_mass += inc;
    }
  }
  rep.pass = rep.stationarity < 1e-6 && rep.g_min >= -tol && rep.off_support_mass <= 1e-6;
  return rep;
}

std::pair<double, double> sk_isolation_check(const MixedModel& model, const MeasureFn& x,
                                             const MatrixPath& path, const QuadOptions& q) {
  const double h0 = std::min(1e-9, 0.5 * path.segments().front().t1);
  const SymMat d = path.deriv(0.0, h0);
  const double lhs = 2.0 * frob_ip(model.coupling(2), hadamard_pow(d, 2));
  const SymMat inv = checked_inv(phi_hat(x, path, 0.0, q), ErrorCode::SingularPath, "Phi-hat(0)");
  // <Phi-hat^{-1} Phi' Phi-hat^{-1}, Phi'> = trace(B B) with B = Phi-hat^{-1} Phi'
  const Mat b = inv.mat() * d.mat();
  return {lhs, (b * b).trace()};
}

std::vector<ConvexitySample> convexity_profile(const MixedModel& model, const MatrixPath& path,
                                               double a, double b, int n) {
  if (!(a < b) || a < 0.0 || b > path.end() || n < 2)
    throw Error(ErrorCode::Validation, "convexity interval must satisfy 0 <= a < b <= m, n >= 2");
  const double h = 1e-3 * (b - a);
  auto y_at = [&](double u) {
    const double s2 = directional(model, path, u, u, 2);
    if (!(s2 > 1e-14)) {
      std::ostringstream os;
      os << "<xi''(Phi), Phi'^2> = " << s2 << " at u=" << u;
      throw Error(ErrorCode::DegenerateDerivative, os.str());
    }
    return 1.0 / std::sqrt(s2);
  };
  std::vector<ConvexitySample> out;
  for (int i = 0; i < n; ++i) {
    ConvexitySample s;
    s.u = a + (b - a) * i / (n - 1);
    s.y = y_at(s.u);
    if (s.u - h < 0.0 || s.u + h > path.end()) {
      // one-sided, second order
      const double d = s.u - h < 0.0 ? h : -h;
      s.ypp_fd = (2.0 * s.y - 5.0 * y_at(s.u + d) + 4.0 * y_at(s.u + 2 * d) - y_at(s.u + 3 * d)) / (h * h);
    } else {
      s.ypp_fd = (y_at(s.u + h) - 2.0 * s.y + y_at(s.u - h)) / (h * h);
    }
    if (path.segment_at(s.u).kind == MatrixPath::Kind::sine) {
      s.ypp = s.ypp_fd;
    } else {
      const double s2 = directional(model, path, s.u, s.u, 2);
      const double s3 = directional(model, path, s.u, s.u, 3);
      const double s4 = directional(model, path, s.u, s.u, 4);
      s.ypp = 0.25 * std::pow(s2, -2.5) * (3.0 * s3 * s3 - 2.0 * s4 * s2);
    }
    s.convex = s.ypp >= 0.0;
    out.push_back(s);
  }
  return out;
}

RsbExample rsb_example_build(double beta, const QuadOptions& q) {
  Mat qm(2, 2);
  qm << 1.0, 0.1, 0.1, 1.0;
  const SymMat Q(qm);
  const double threshold = std::sqrt(2.0 / hadamard_pow(Q, 2).mat().sum());
  if (!(beta > threshold)) {
    std::ostringstream os;
    os << "beta=" << beta << " must exceed " << threshold;
    throw Error(ErrorCode::BetaTooSmall, os.str());
  }
  const double m = Q.trace();
  RsbExample ex{cosh_model(beta, 2), Q, {}, MatrixPath::linear(Q, m), 0.0, 0.0, 0.0, false, 0.0, 0.0, {}};
  const MixedModel& model = ex.model;
  const MatrixPath& path = ex.path;

  auto s_k = [&model, &path](double t, int k) { return directional(model, path, t, t, k); };
  auto phi = [s_k](double t) { return 1.0 / std::sqrt(s_k(t, 2)); };
  auto dphi = [s_k](double t) { return -0.5 * std::pow(s_k(t, 2), -1.5) * s_k(t, 3); };

  auto f = [&](double t) { return phi(t) - (m - t) / std::sqrt(2.0); };
  double lo = 1e-9, hi = m - 1e-9;
  if (!(f(lo) < 0.0 && f(hi) > 0.0)) {
    std::ostringstream os;
    os << "phi(q) - (2 - q)/sqrt(2) does not change sign on [" << lo << ", " << hi << "]";
    throw Error(ErrorCode::RootNotBracketed, os.str());
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double c = 0.5 * (lo + hi);
    (f(c) < 0.0 ? lo : hi) = c;
  }
  const double q0 = 0.5 * (lo + hi);
  ex.q0 = q0;
  ex.phi0 = phi(0.0);

  std::function<double(double)> xfn = [dphi](double t) { return -std::sqrt(2.0) * dphi(t); };
  MeasureFn::Piece cont{MeasureFn::Kind::function, 0.0, q0, 0.0, 0.0, xfn};
  MeasureFn::Piece top{MeasureFn::Kind::step, q0, m, 1.0, 1.0, {}};
  ex.x_q0_minus = xfn(q0);
  ex.x_nondecreasing = true;
  double prev = xfn(0.0);
  for (int i = 1; i <= 2000; ++i) {
    const double v = xfn(q0 * i / 2000.0);
    if (v < prev - 1e-14) ex.x_nondecreasing = false;
    prev = v;
  }
  if (ex.x_q0_minus > 1.0 + 1e-12) ex.x_nondecreasing = false;
  ex.x = MeasureFn(MeasureMode::finite, {cont, top}, 1.0);

  const Grid g(detail::merged_breaks(ex.x, path, {q0}), q.n_quad);
  const auto hat = detail::path_cumulative(g, ex.x, path, true);
  const SymMat dp = path.deriv(0.0, 0.0);
  for (std::size_t i = 0; i < g.nodes().size() && g.node(i) <= q0 + 1e-13; ++i) {
    const double t = g.node(i);
    const SymMat diff = SymMat(hat.node[i]) - std::sqrt(2.0) * phi(t) * dp;
    ex.identity_residual = std::max(ex.identity_residual, diff.frob_norm());
  }
  ex.value = continuous_cs(model, ex.x, path, std::nullopt, q);
  ex.report = critical_residual(model, ex.x, path, 1e-8, 1e-5, q);
  return ex;
}

}  // namespace vecspin
