#include "vecspin/quadrature.hpp"

#include "vecspin/error.hpp"

#include <algorithm>
#include <cmath>

namespace vecspin {

Grid::Grid(std::vector<double> breaks, int n_quad, const std::vector<GradedPanel>& graded) {
  if (n_quad < 3) throw Error(ErrorCode::Validation, "n_quad must be at least 3");
  std::sort(breaks.begin(), breaks.end());
  const double lo = breaks.front(), hi = breaks.back();
  const double total = hi - lo;
  if (!(total > 0.0)) throw Error(ErrorCode::Validation, "quadrature range is empty");
  std::vector<double> b;
  for (double t : breaks)
    if (b.empty() || t - b.back() > 1e-13 * (1.0 + total)) b.push_back(t);
  b.back() = hi;

  const int n_int = std::max(1, (n_quad - 1) / 2);
  const int min_per_panel = 8;
  const double delta = 20.0 / n_int;  // relative step on graded panels

  nodes_.push_back(b.front());
  for (std::size_t k = 0; k + 1 < b.size(); ++k) {
    const double a = b[k], e = b[k + 1];
    int n = std::max(min_per_panel, static_cast<int>(std::ceil(n_int * (e - a) / total)));
    const GradedPanel* gp = nullptr;
    for (const auto& p : graded)
      if (a >= p.a - 1e-13 && e <= p.b + 1e-13 && p.s > e) gp = &p;
    if (gp) {
      const double da = gp->s - a, de = gp->s - e;
      n = std::max(n, static_cast<int>(std::ceil(std::log(da / de) / delta)));
      for (int j = 1; j < n; ++j) nodes_.push_back(gp->s - da * std::pow(de / da, double(j) / n));
    } else {
      for (int j = 1; j < n; ++j) nodes_.push_back(a + (e - a) * j / n);
    }
    nodes_.push_back(e);
  }
}

}  // namespace vecspin
