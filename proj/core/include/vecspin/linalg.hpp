#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>

namespace vecspin {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Dense real symmetric matrix. Construction symmetrizes, so storage is
// exactly symmetric.
class SymMat {
public:
  SymMat() = default;
  explicit SymMat(Eigen::Index dim) : a_(Mat::Zero(dim, dim)) {}
  explicit SymMat(const Mat& a);

  static SymMat zero(Eigen::Index dim) { return SymMat(dim); }
  static SymMat identity(Eigen::Index dim);
  static SymMat ones(Eigen::Index dim);
  static SymMat diag(const Vec& d);
  static SymMat outer(const Vec& v);

  Eigen::Index dim() const noexcept { return a_.rows(); }
  const Mat& mat() const noexcept { return a_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return a_(i, j); }
  double frob_norm() const { return a_.norm(); }
  double trace() const { return a_.trace(); }

  SymMat& operator+=(const SymMat& o);
  SymMat& operator-=(const SymMat& o);
  SymMat& operator*=(double s);

  friend SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
  friend SymMat operator-(SymMat a, const SymMat& b) { return a -= b; }
  friend SymMat operator*(SymMat a, double s) { return a *= s; }
  friend SymMat operator*(double s, SymMat a) { return a *= s; }
  friend SymMat operator-(SymMat a) { return a *= -1.0; }

private:
  Mat a_;
};

struct EigenDecomp {
  Vec eigenvalues;   // ascending
  Mat eigenvectors;  // columns
};

EigenDecomp eigen_decomp(const SymMat& a);

// Default clamp tolerance 1e-10 * (1 + ||A||_F).
double default_domain_tol(const SymMat& a);

// V diag(f(lambda)) V^T. With a domain tolerance the function is treated as
// defined on [0, inf): eigenvalues in [-tol, 0) are clamped to 0 and anything
// below -tol raises DomainError.
SymMat sym_func(const SymMat& a, const std::function<double(double)>& f,
                std::optional<double> domain_tol = std::nullopt);

SymMat sym_sqrt(const SymMat& a);
SymMat sym_pow(const SymMat& a, double p);  // p may be negative (needs PD)
SymMat sym_inv(const SymMat& a);            // PD inverse, checked

double logdet(const SymMat& a);
double min_eig(const SymMat& a);

// min_eig(A) > 1e-12 * (1 + ||A||_F)
bool is_pd(const SymMat& a);

SymMat hadamard(const SymMat& a, const SymMat& b);
SymMat hadamard_pow(const SymMat& a, int p);
double frob_ip(const SymMat& a, const SymMat& b);
double sum_all(const SymMat& a);

// (1/x) log(|M + x D| / |M|) for PD M, evaluated through log1p of the
// eigenvalues of M^{-1/2} D M^{-1/2}. The x -> 0 limit is <M^{-1}, D>.
// Throws NotPositiveDefinite if M + x D is not PD.
double scaled_logdet_ratio(const SymMat& m, const SymMat& d, double x);

}  // namespace vecspin
