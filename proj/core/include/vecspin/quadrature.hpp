#pragma once

#include "vecspin/linalg.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace vecspin {

// Panel [a, b] whose nodes are spaced geometrically in the distance to s > b.
struct GradedPanel {
  double a = 0.0;
  double b = 0.0;
  double s = 0.0;
};

// Composite Simpson grid aligned to breakpoints. Each interval is evaluated
// at its two nodes and midpoint, so n_quad points correspond to
// (n_quad - 1) / 2 intervals.
class Grid {
public:
  Grid(std::vector<double> breaks, int n_quad, const std::vector<GradedPanel>& graded = {});

  std::size_t size() const noexcept { return nodes_.size() - 1; }
  double node(std::size_t i) const { return nodes_[i]; }
  double left(std::size_t i) const { return nodes_[i]; }
  double right(std::size_t i) const { return nodes_[i + 1]; }
  double mid(std::size_t i) const { return 0.5 * (nodes_[i] + nodes_[i + 1]); }
  double width(std::size_t i) const { return nodes_[i + 1] - nodes_[i]; }
  const std::vector<double>& nodes() const noexcept { return nodes_; }

private:
  std::vector<double> nodes_;
};

// Prefix (forward) or suffix (backward) integrals tabulated at nodes and
// interval midpoints.
struct Cumulative {
  std::vector<Mat> node;
  std::vector<Mat> mid;
};

// halves(i) returns the integrals over [left, mid] and [mid, right].
template <class Halves>
Cumulative accumulate_forward(const Grid& g, const Mat& zero, Halves&& halves) {
  Cumulative c;
  c.node.reserve(g.size() + 1);
  c.mid.reserve(g.size());
  c.node.push_back(zero);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto [h1, h2] = halves(i);
    c.mid.push_back(c.node[i] + h1);
    c.node.push_back(c.mid[i] + h2);
  }
  return c;
}

template <class Halves>
Cumulative accumulate_backward(const Grid& g, const Mat& zero, Halves&& halves) {
  Cumulative c;
  c.node.assign(g.size() + 1, zero);
  c.mid.assign(g.size(), zero);
  for (std::size_t i = g.size(); i-- > 0;) {
    const auto [h1, h2] = halves(i);
    c.mid[i] = c.node[i + 1] + h2;
    c.node[i] = c.mid[i] + h1;
  }
  return c;
}

// Simpson on both halves of interval i for an integrand f(t, hint), with the
// interval midpoint as hint.
template <class F>
std::pair<Mat, Mat> simpson_halves(const Grid& g, std::size_t i, F&& f) {
  const double a = g.left(i), b = g.right(i), c = g.mid(i);
  const Mat fa = f(a, c), fq1 = f(0.5 * (a + c), c), fc = f(c, c), fq3 = f(0.5 * (c + b), c),
            fb = f(b, c);
  const double w = (c - a) / 6.0;
  return {w * (fa + 4.0 * fq1 + fc), w * (fc + 4.0 * fq3 + fb)};
}

// Scalar composite Simpson; vals(i) returns {f(left), f(mid), f(right)}.
template <class Vals>
double simpson_sum(const Grid& g, std::size_t begin, std::size_t end, Vals&& vals) {
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const auto [fa, fc, fb] = vals(i);
    s += g.width(i) / 6.0 * (fa + 4.0 * fc + fb);
  }
  return s;
}

}  // namespace vecspin
