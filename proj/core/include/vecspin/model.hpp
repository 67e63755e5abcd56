#pragma once

#include "vecspin/linalg.hpp"

#include <vector>

namespace vecspin {

struct ModelTerm {
  int p = 2;
  Vec beta;  // one coefficient per spin component
};

// Covariance xi(A) = sum_p (beta_p beta_p^T) o A^{op} plus external field h.
class MixedModel {
public:
  MixedModel(int m, std::vector<ModelTerm> terms, Vec h, double series_tail_tol = 1e-12);

  int m() const noexcept { return m_; }
  const std::vector<ModelTerm>& terms() const noexcept { return terms_; }
  const Vec& h() const noexcept { return h_; }
  double series_tail_tol() const noexcept { return tail_tol_; }

  int max_p() const;
  bool even() const;  // every term with a nonzero coefficient has even p
  bool nonnegative() const;

  SymMat field_outer() const { return SymMat::outer(h_); }

  // beta_p beta_p^T summed over terms with the given p.
  SymMat coupling(int p) const;

private:
  int m_;
  std::vector<ModelTerm> terms_;
  Vec h_;
  double tail_tol_;
};

// sum_p p!/(p-order)! (beta_p beta_p^T) o A^{o(p-order)}, order in 0..4.
SymMat xi_eval(const MixedModel& model, const SymMat& a, int order);

// A o xi'(A) - xi(A), entrywise sum_p (p-1) beta_p(i) beta_p(j) A_ij^p.
SymMat theta_eval(const MixedModel& model, const SymMat& a);

// Even truncation of (beta beta^T) o (cosh A - E) with coefficients
// beta / sqrt((2k)!), certified against the series tail tolerance at entries
// of size q_scale_hint.
MixedModel cosh_model(double beta, int m, double q_scale_hint = 1.1,
                      int truncation_order = 16, double series_tail_tol = 1e-14);

// Tail bound |a|^{T+2} / (T+2)! of the cosh series truncated at order T.
double cosh_tail_bound(double a, int truncation_order);

}  // namespace vecspin
