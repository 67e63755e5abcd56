#pragma once

#include "vecspin/linalg.hpp"
#include "vecspin/model.hpp"
#include "vecspin/order_param.hpp"

#include <random>
#include <vector>

namespace testutil {

using vecspin::Mat;
using vecspin::SymMat;
using vecspin::Vec;

inline Mat random_mat(std::mt19937_64& rng, int r, int c, double s = 1.0) {
  std::normal_distribution<double> z(0.0, s);
  Mat a(r, c);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = z(rng);
  return a;
}

inline SymMat random_pd(std::mt19937_64& rng, int m, double shift = 1.0) {
  const Mat g = random_mat(rng, m, m);
  return SymMat(Mat(g * g.transpose() + shift * Mat::Identity(m, m)));
}

// Unit-diagonal PD correlation matrix with off-diagonal entries of moderate size.
inline SymMat random_correlation(std::mt19937_64& rng, int m, double spread = 0.4) {
  const Mat g = Mat::Identity(m, m) + random_mat(rng, m, m, spread);
  Mat c = g * g.transpose();
  const Vec d = c.diagonal().cwiseSqrt().cwiseInverse();
  c = d.asDiagonal() * c * d.asDiagonal();
  return SymMat(c);
}

inline double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

// Random feasible discrete order parameter with Q_r = q, x_{r-1} = 1, x_1 > 0.
inline vecspin::DiscreteOrderParam random_order_param(std::mt19937_64& rng, const SymMat& q,
                                                      int r) {
  const int m = static_cast<int>(q.dim());
  std::vector<Mat> inc;
  Mat s = Mat::Zero(m, m);
  for (int k = 0; k < r; ++k) {
    const Mat g = random_mat(rng, m, m);
    inc.push_back(g * g.transpose() + 0.2 * Mat::Identity(m, m));
    s += inc.back();
  }
  const Mat t = vecspin::sym_sqrt(q).mat() * vecspin::sym_pow(SymMat(s), -0.5).mat();
  vecspin::DiscreteOrderParam p;
  Mat acc = Mat::Zero(m, m);
  for (int k = 0; k < r; ++k) {
    acc += t * inc[static_cast<std::size_t>(k)] * t.transpose();
    p.Qs.emplace_back(acc);
  }
  p.Qs.back() = q;
  std::vector<double> xs;
  for (int k = 1; k < r - 1; ++k) xs.push_back(uniform(rng, 0.05, 0.95));
  std::sort(xs.begin(), xs.end());
  p.x.push_back(0.0);
  for (double v : xs) p.x.push_back(v);
  if (r >= 2) p.x.push_back(1.0);
  return p;
}

// Even mixed model with positive coefficients, p in {2, 4}.
inline vecspin::MixedModel random_even_model(std::mt19937_64& rng, int m, bool field = true) {
  std::vector<vecspin::ModelTerm> terms;
  Vec b2(m), b4(m), h(m);
  for (int j = 0; j < m; ++j) {
    b2(j) = uniform(rng, 0.5, 1.5);
    b4(j) = uniform(rng, 0.1, 0.8);
    h(j) = field ? uniform(rng, -0.5, 0.5) : 0.0;
  }
  terms.push_back({2, b2});
  terms.push_back({4, b4});
  return vecspin::MixedModel(m, terms, h);
}

}  // namespace testutil
