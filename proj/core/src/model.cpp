#include "vecspin/model.hpp"

#include "vecspin/error.hpp"

#include <cmath>
#include <sstream>

namespace vecspin {

namespace {

double falling_factorial(int p, int k) {
  double c = 1.0;
  for (int i = 0; i < k; ++i) c *= static_cast<double>(p - i);
  return c;
}

void check_argument(const MixedModel& model, const SymMat& a) {
  if (a.dim() != model.m()) {
    std::ostringstream os;
    os << "argument has dim " << a.dim() << ", model has m=" << model.m();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
  const double bound = 1.0 + 0.2;
  if (a.mat().cwiseAbs().maxCoeff() > bound) {
    std::ostringstream os;
    os << "argument entry " << a.mat().cwiseAbs().maxCoeff() << " outside [-1.2, 1.2]";
    throw Error(ErrorCode::DomainError, os.str());
  }
}

}  // namespace

MixedModel::MixedModel(int m, std::vector<ModelTerm> terms, Vec h, double series_tail_tol)
    : m_(m), terms_(std::move(terms)), h_(std::move(h)), tail_tol_(series_tail_tol) {
  if (m_ < 1) throw Error(ErrorCode::Validation, "m must be positive");
  if (h_.size() != m_) throw Error(ErrorCode::DimensionMismatch, "h has wrong length");
  if (!h_.allFinite()) throw Error(ErrorCode::Validation, "h has non-finite entries");
  for (const auto& t : terms_) {
    if (t.p < 2) throw Error(ErrorCode::Validation, "term with p < 2");
    if (t.beta.size() != m_) throw Error(ErrorCode::DimensionMismatch, "beta has wrong length");
    if (!t.beta.allFinite()) throw Error(ErrorCode::Validation, "beta has non-finite entries");
  }
}

int MixedModel::max_p() const {
  int p = 0;
  for (const auto& t : terms_) p = std::max(p, t.p);
  return p;
}

bool MixedModel::even() const {
  for (const auto& t : terms_)
    if (t.p % 2 != 0 && t.beta.squaredNorm() > 0.0) return false;
  return true;
}

bool MixedModel::nonnegative() const {
  for (const auto& t : terms_)
    if ((t.beta.array() < 0.0).any()) return false;
  return true;
}

SymMat MixedModel::coupling(int p) const {
  SymMat c(m_);
  for (const auto& t : terms_)
    if (t.p == p) c += SymMat::outer(t.beta);
  return c;
}

SymMat xi_eval(const MixedModel& model, const SymMat& a, int order) {
  if (order < 0 || order > 4) throw Error(ErrorCode::OrderOutOfRange, std::to_string(order));
  check_argument(model, a);
  const Eigen::Index m = a.dim();
  Mat r = Mat::Zero(m, m);
  for (const auto& t : model.terms()) {
    if (t.p - order < 0) continue;
    const Mat bb = t.beta * t.beta.transpose();
    r += falling_factorial(t.p, order) * bb.cwiseProduct(hadamard_pow(a, t.p - order).mat());
  }
  return SymMat(r);
}

SymMat theta_eval(const MixedModel& model, const SymMat& a) {
  check_argument(model, a);
  const Eigen::Index m = a.dim();
  Mat r = Mat::Zero(m, m);
  for (const auto& t : model.terms()) {
    const Mat bb = t.beta * t.beta.transpose();
    r += static_cast<double>(t.p - 1) * bb.cwiseProduct(hadamard_pow(a, t.p).mat());
  }
  return SymMat(r);
}

double cosh_tail_bound(double a, int truncation_order) {
  const int n = truncation_order + 2;
  return std::exp(n * std::log(std::abs(a)) - std::lgamma(n + 1.0));
}

MixedModel cosh_model(double beta, int m, double q_scale_hint, int truncation_order,
                      double series_tail_tol) {
  if (!(beta > 0.0)) throw Error(ErrorCode::Validation, "beta must be positive");
  if (truncation_order < 4 || truncation_order % 2 != 0)
    throw Error(ErrorCode::InvalidTruncation, "truncation order must be even and >= 4");
  const double tail = cosh_tail_bound(q_scale_hint, truncation_order);
  if (tail > series_tail_tol) {
    std::ostringstream os;
    os << "tail bound " << tail << " exceeds " << series_tail_tol;
    throw Error(ErrorCode::InvalidTruncation, os.str());
  }
  std::vector<ModelTerm> terms;
  for (int p = 2; p <= truncation_order; p += 2) {
    const double c = beta / std::sqrt(std::tgamma(p + 1.0));
    terms.push_back({p, Vec::Constant(m, c)});
  }
  return MixedModel(m, std::move(terms), Vec::Zero(m), series_tail_tol);
}

}  // namespace vecspin
