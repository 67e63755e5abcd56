#pragma once

#include "vecspin/error.hpp"
#include "vecspin/linalg.hpp"
#include "vecspin/order_param.hpp"
#include "vecspin/quadrature.hpp"

#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace vecspin::detail {

inline SymMat checked_inv(const SymMat& a, ErrorCode code, const std::string& where) {
  const auto [lam, v] = eigen_decomp(a);
  if (!(lam(0) > 1e-12 * (1.0 + a.frob_norm()))) {
    std::ostringstream os;
    os << where << " is not positive definite (min eigenvalue " << lam(0) << ")";
    throw Error(code, os.str());
  }
  return SymMat(Mat(v * lam.cwiseInverse().asDiagonal() * v.transpose()));
}

inline double checked_logdet(const SymMat& a, ErrorCode code, const std::string& where) {
  const Vec lam = eigen_decomp(a).eigenvalues;
  if (!(lam(0) > 1e-12 * (1.0 + a.frob_norm()))) {
    std::ostringstream os;
    os << where << " is not positive definite (min eigenvalue " << lam(0) << ")";
    throw Error(code, os.str());
  }
  return lam.array().log().sum();
}

inline std::vector<double> merged_breaks(const MeasureFn& x, const MatrixPath& path,
                                         std::initializer_list<double> extra) {
  std::vector<double> b = path.knots();
  for (double t : x.knots()) b.push_back(std::min(t, path.end()));
  for (double t : extra) b.push_back(t);
  return b;
}

// int w(s) G'(s) ds tabulated on the grid, where G is an exact antiderivative
// of the path-dependent factor. Intervals on which w is constant use G
// directly; elsewhere both halves use Simpson.
template <class Deriv, class Anti>
Cumulative weighted_cumulative(const Grid& g, const MeasureFn& w, Eigen::Index dim,
                               bool backward, Deriv&& deriv, Anti&& anti) {
  auto halves = [&](std::size_t i) -> std::pair<Mat, Mat> {
    const double a = g.left(i), b = g.right(i), c = g.mid(i);
    double v = 0.0;
    if (w.constant_on(a, b, &v)) {
      if (v == 0.0) return {Mat::Zero(dim, dim), Mat::Zero(dim, dim)};
      const Mat ga = anti(a, c), gc = anti(c, c), gb = anti(b, c);
      return {v * (gc - ga), v * (gb - gc)};
    }
    return simpson_halves(g, i, [&](double t, double h) -> Mat { return w.at(t, h) * deriv(t, h); });
  };
  const Mat zero = Mat::Zero(dim, dim);
  return backward ? accumulate_backward(g, zero, halves) : accumulate_forward(g, zero, halves);
}

// Cumulative of w Phi' (forward) or the same from the right (backward).
inline Cumulative path_cumulative(const Grid& g, const MeasureFn& w, const MatrixPath& path,
                                  bool backward) {
  return weighted_cumulative(
      g, w, path.dim(), backward, [&](double s, double h) { return path.deriv(s, h).mat(); },
      [&](double s, double h) { return path.value(s, h).mat(); });
}

}  // namespace vecspin::detail
