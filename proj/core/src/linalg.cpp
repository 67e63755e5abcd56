#include "vecspin/linalg.hpp"

#include "vecspin/error.hpp"

#include <cmath>
#include <sstream>

namespace vecspin {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OrderOutOfRange: return "OrderOutOfRange";
    case ErrorCode::InvalidTruncation: return "InvalidTruncation";
    case ErrorCode::SingularD: return "SingularD";
    case ErrorCode::MonotonicityViolation: return "MonotonicityViolation";
    case ErrorCode::SingularLambda: return "SingularLambda";
    case ErrorCode::DegenerateKnots: return "DegenerateKnots";
    case ErrorCode::InvalidThat: return "InvalidThat";
    case ErrorCode::SingularPath: return "SingularPath";
    case ErrorCode::InfeasibleTriple: return "InfeasibleTriple";
    case ErrorCode::NoFeasibleStart: return "NoFeasibleStart";
    case ErrorCode::DegenerateDerivative: return "DegenerateDerivative";
    case ErrorCode::BetaTooSmall: return "BetaTooSmall";
    case ErrorCode::RootNotBracketed: return "RootNotBracketed";
    case ErrorCode::MemoryBudgetExceeded: return "MemoryBudgetExceeded";
    case ErrorCode::NonPDConstraint: return "NonPDConstraint";
    case ErrorCode::IllConditionedFit: return "IllConditionedFit";
    case ErrorCode::Validation: return "ValidationError";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch:
    case ErrorCode::OrderOutOfRange:
    case ErrorCode::InvalidTruncation:
    case ErrorCode::MonotonicityViolation:
    case ErrorCode::DegenerateKnots:
    case ErrorCode::InvalidThat:
    case ErrorCode::BetaTooSmall:
    case ErrorCode::MemoryBudgetExceeded:
    case ErrorCode::Validation:
      return false;
    default:
      return true;
  }
}

SymMat::SymMat(const Mat& a) {
  if (a.rows() != a.cols())
    throw Error(ErrorCode::DimensionMismatch, "matrix is not square");
  a_ = 0.5 * (a + a.transpose());
}

SymMat SymMat::identity(Eigen::Index dim) { return SymMat(Mat::Identity(dim, dim)); }
SymMat SymMat::ones(Eigen::Index dim) { return SymMat(Mat::Ones(dim, dim)); }
SymMat SymMat::diag(const Vec& d) { return SymMat(Mat(d.asDiagonal())); }
SymMat SymMat::outer(const Vec& v) { return SymMat(Mat(v * v.transpose())); }

static void check_dims(const SymMat& a, const SymMat& b) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << "dimensions " << a.dim() << " and " << b.dim();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

SymMat& SymMat::operator+=(const SymMat& o) {
  check_dims(*this, o);
  a_ += o.a_;
  return *this;
}

SymMat& SymMat::operator-=(const SymMat& o) {
  check_dims(*this, o);
  a_ -= o.a_;
  return *this;
}

SymMat& SymMat::operator*=(double s) {
  a_ *= s;
  return *this;
}

EigenDecomp eigen_decomp(const SymMat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a.mat());
  if (es.info() != Eigen::Success)
    throw Error(ErrorCode::DomainError, "eigendecomposition did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

double default_domain_tol(const SymMat& a) { return 1e-10 * (1.0 + a.frob_norm()); }

SymMat sym_func(const SymMat& a, const std::function<double(double)>& f,
                std::optional<double> domain_tol) {
  auto [lam, v] = eigen_decomp(a);
  if (domain_tol) {
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      if (lam(i) < -*domain_tol) {
        std::ostringstream os;
        os << "eigenvalue " << lam(i) << " below -" << *domain_tol;
        throw Error(ErrorCode::DomainError, os.str());
      }
      if (lam(i) < 0.0) lam(i) = 0.0;
    }
  }
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = f(lam(i));
  return SymMat(Mat(v * lam.asDiagonal() * v.transpose()));
}

SymMat sym_sqrt(const SymMat& a) {
  return sym_func(a, [](double l) { return std::sqrt(l); }, default_domain_tol(a));
}

SymMat sym_pow(const SymMat& a, double p) {
  if (p < 0.0 && !is_pd(a))
    throw Error(ErrorCode::NotPositiveDefinite, "negative power of a non-PD matrix");
  return sym_func(a, [p](double l) { return std::pow(l, p); }, default_domain_tol(a));
}

SymMat sym_inv(const SymMat& a) {
  auto [lam, v] = eigen_decomp(a);
  if (!(lam(0) > 1e-12 * (1.0 + a.frob_norm()))) {
    std::ostringstream os;
    os << "min eigenvalue " << lam(0);
    throw Error(ErrorCode::NotPositiveDefinite, os.str());
  }
  return SymMat(Mat(v * lam.cwiseInverse().asDiagonal() * v.transpose()));
}

double logdet(const SymMat& a) {
  const Vec lam = eigen_decomp(a).eigenvalues;
  if (!(lam(0) > 1e-13)) {
    std::ostringstream os;
    os << "min eigenvalue " << lam(0);
    throw Error(ErrorCode::NotPositiveDefinite, os.str());
  }
  return lam.array().log().sum();
}

double min_eig(const SymMat& a) { return eigen_decomp(a).eigenvalues(0); }

bool is_pd(const SymMat& a) { return min_eig(a) > 1e-12 * (1.0 + a.frob_norm()); }

SymMat hadamard(const SymMat& a, const SymMat& b) {
  check_dims(a, b);
  return SymMat(Mat(a.mat().cwiseProduct(b.mat())));
}

SymMat hadamard_pow(const SymMat& a, int p) {
  if (p < 0) throw Error(ErrorCode::DomainError, "negative Hadamard power");
  Mat r = Mat::Ones(a.dim(), a.dim());
  for (int k = 0; k < p; ++k) r = r.cwiseProduct(a.mat());
  return SymMat(r);
}

double frob_ip(const SymMat& a, const SymMat& b) {
  check_dims(a, b);
  return a.mat().cwiseProduct(b.mat()).sum();
}

double sum_all(const SymMat& a) { return a.mat().sum(); }

double scaled_logdet_ratio(const SymMat& m, const SymMat& d, double x) {
  check_dims(m, d);
  const SymMat mih = sym_pow(m, -0.5);
  const Vec mu = eigen_decomp(SymMat(Mat(mih.mat() * d.mat() * mih.mat()))).eigenvalues;
  if (x == 0.0) return mu.sum();
  double s = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double z = x * mu(i);
    if (!(z > -1.0 + 1e-15))
      throw Error(ErrorCode::NotPositiveDefinite, "M + xD is not positive definite");
    s += std::log1p(z);
  }
  return s / x;
}

}  // namespace vecspin
