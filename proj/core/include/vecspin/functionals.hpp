#pragma once

#include "vecspin/linalg.hpp"
#include "vecspin/model.hpp"
#include "vecspin/order_param.hpp"

#include <optional>
#include <vector>

namespace vecspin {

struct QuadOptions {
  int n_quad = 4001;
};

// How the log-ratio sum of the discrete Parisi functional is weighted.
// `scaled` divides each log(|L_{k+1}|/|L_k|) by x_k, which is what the
// continuous form produces under sine interpolation; `unscaled` omits it.
enum class ParisiLogWeight { scaled, unscaled };
// Field term uses Lambda_1^{-1} (default) or Lambda^{-1}.
enum class ParisiField { lambda1, lambda };

struct ParisiOptions {
  ParisiLogWeight log_weight = ParisiLogWeight::scaled;
  ParisiField field = ParisiField::lambda1;
};

// D_p = sum_{p <= k <= r-1} x_k (Q_{k+1} - Q_k), p = 1..r-1 (index 0 is D_1).
std::vector<SymMat> cs_levels(const DiscreteOrderParam& p);

// Lambda_p, p = 1..r (index 0 is Lambda_1, last is Lambda).
std::vector<SymMat> parisi_levels(const MixedModel& model, const SymMat& lambda,
                                  const DiscreteOrderParam& p);

double discrete_cs(const MixedModel& model, const DiscreteOrderParam& p);

double discrete_parisi(const MixedModel& model, const SymMat& lambda,
                       const DiscreteOrderParam& p, const ParisiOptions& opt = {});

// t_x + (m - t_x) / 2.
double default_T_hat(const MeasureFn& x, const MatrixPath& path);

double continuous_cs(const MixedModel& model, const MeasureFn& x, const MatrixPath& path,
                     std::optional<double> T_hat = std::nullopt, const QuadOptions& q = {});

double continuous_cs_rewritten(const MixedModel& model, const MeasureFn& x,
                               const MatrixPath& path, const QuadOptions& q = {});

double continuous_parisi(const MixedModel& model, const MeasureFn& x, const SymMat& lambda,
                         const MatrixPath& path, const QuadOptions& q = {});

double gse_functional(const MixedModel& model, const ZeroTempTriple& triple,
                      const QuadOptions& q = {});

// Exact value of the zero temperature functional for step levels a_k on
// [t_k, t_{k+1}) and any monotone path through Q_1..Q_r (Qs[k] = Q_{k+1}).
double gse_discrete(const MixedModel& model, const SymMat& L, const std::vector<double>& a,
                    const std::vector<SymMat>& Qs);

// Phi-hat(t) = int_t^m x(s) Phi'(s) ds at t.
SymMat phi_hat(const MeasureFn& x, const MatrixPath& path, double t, const QuadOptions& q = {});

}  // namespace vecspin
