#pragma once

#include "vecspin/linalg.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace vecspin {

// x_0 = 0 <= x_1 <= ... <= x_{r-1} <= 1 and 0 <= Q_1 <= ... <= Q_r = Q.
// Qs[k] holds Q_{k+1}; Q_0 = 0 is implicit.
struct DiscreteOrderParam {
  std::vector<double> x;
  std::vector<SymMat> Qs;

  int r() const noexcept { return static_cast<int>(Qs.size()); }
  Eigen::Index dim() const { return Qs.back().dim(); }
  const SymMat& Q() const { return Qs.back(); }
  SymMat level(int k) const;  // Q_k, with Q_0 = 0

  // Throws MonotonicityViolation / DimensionMismatch.
  void validate() const;
};

enum class MeasureMode { finite, zero };

// Right-continuous nondecreasing function on [0, end]. Pieces tile [0, end);
// the value at t = end is end_value.
class MeasureFn {
public:
  enum class Kind { step, linear, function };

  struct Piece {
    Kind kind = Kind::step;
    double t0 = 0.0;
    double t1 = 0.0;
    double v0 = 0.0;  // step value, or linear start value
    double v1 = 0.0;  // linear end value
    std::function<double(double)> fn;
  };

  MeasureFn() = default;
  MeasureFn(MeasureMode mode, std::vector<Piece> pieces, double end_value);

  static MeasureFn steps(MeasureMode mode, const std::vector<double>& knots,
                         const std::vector<double>& values, double end_value);

  MeasureMode mode() const noexcept { return mode_; }
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }
  double end() const { return pieces_.back().t1; }
  double end_value() const noexcept { return end_value_; }

  double operator()(double t) const;
  // Value using the piece that contains `hint`; gives one-sided limits at
  // piece boundaries.
  double at(double t, double hint) const;
  const Piece& piece_at(double hint) const;

  // True with the constant value if the function is constant on (a, b).
  bool constant_on(double a, double b, double* value) const;

  std::vector<double> knots() const;

  // inf{t : x(t) = 1}, taken as the start of the trailing run of pieces equal
  // to one; `end` if there is none.
  double t_one() const;

  // Checks monotonicity, continuity of coverage and the mode's range.
  void validate() const;

private:
  MeasureMode mode_ = MeasureMode::finite;
  std::vector<Piece> pieces_;
  double end_value_ = 1.0;
};

// Piecewise-analytic PSD path with exact derivatives.
class MatrixPath {
public:
  enum class Kind { linear, sine, constant };

  struct Segment {
    Kind kind = Kind::linear;
    double t0 = 0.0;
    double t1 = 0.0;
    SymMat a;  // Phi(t0)
    SymMat b;  // Phi(t1)
  };

  MatrixPath() = default;
  explicit MatrixPath(std::vector<Segment> segments);

  static MatrixPath linear(const SymMat& q, double end);

  const std::vector<Segment>& segments() const noexcept { return segs_; }
  double end() const { return segs_.back().t1; }
  Eigen::Index dim() const { return segs_.front().a.dim(); }
  const SymMat& final_value() const { return segs_.back().b; }

  const Segment& segment_at(double hint) const;
  SymMat value(double t) const { return value(t, t); }
  SymMat value(double t, double hint) const;
  SymMat deriv(double t, double hint) const;

  std::vector<double> knots() const;

  // Phi(0) = 0, contiguous coverage, PSD derivative on a probe grid.
  void validate(int probes = 100) const;

private:
  std::vector<Segment> segs_;
};

struct ZeroTempTriple {
  SymMat L;
  MeasureFn alpha;
  MatrixPath path;
};

// Sine interpolation through the knots t_k = trace(Q_k) with x(t) = x_k on
// [t_k, t_{k+1}). Levels with a vanishing increment are merged.
std::pair<MeasureFn, MatrixPath> sine_interpolate(const DiscreteOrderParam& p);

// Same construction for zero temperature levels a_0..a_{r-1}.
std::pair<MeasureFn, MatrixPath> sine_interpolate_zero(const std::vector<double>& a,
                                                       const std::vector<SymMat>& Qs);

}  // namespace vecspin
