#include "vecspin/order_param.hpp"

#include "vecspin/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace vecspin {

SymMat DiscreteOrderParam::level(int k) const {
  if (k == 0) return SymMat::zero(dim());
  return Qs.at(static_cast<std::size_t>(k - 1));
}

void DiscreteOrderParam::validate() const {
  if (Qs.empty()) throw Error(ErrorCode::Validation, "no levels");
  if (static_cast<int>(x.size()) != r()) {
    std::ostringstream os;
    os << "x has " << x.size() << " entries for r=" << r();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
  if (x[0] != 0.0) throw Error(ErrorCode::MonotonicityViolation, "x_0 must be 0");
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (!(x[k] >= x[k - 1]) || x[k] > 1.0) {
      std::ostringstream os;
      os << "x is not nondecreasing in [0,1] at k=" << k;
      throw Error(ErrorCode::MonotonicityViolation, os.str());
    }
  }
  SymMat prev = SymMat::zero(dim());
  for (int k = 0; k < r(); ++k) {
    if (Qs[k].dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "level dims differ");
    const double e = min_eig(Qs[k] - prev);
    if (e < -1e-10) {
      std::ostringstream os;
      os << "increment " << k << " has min eigenvalue " << e;
      throw Error(ErrorCode::MonotonicityViolation, os.str());
    }
    prev = Qs[k];
  }
}

// ---------------------------------------------------------------- MeasureFn

MeasureFn::MeasureFn(MeasureMode mode, std::vector<Piece> pieces, double end_value)
    : mode_(mode), pieces_(std::move(pieces)), end_value_(end_value) {
  if (pieces_.empty()) throw Error(ErrorCode::Validation, "measure has no pieces");
}

MeasureFn MeasureFn::steps(MeasureMode mode, const std::vector<double>& knots,
                           const std::vector<double>& values, double end_value) {
  if (knots.size() != values.size() + 1)
    throw Error(ErrorCode::DimensionMismatch, "steps need one more knot than values");
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i < values.size(); ++i)
    pieces.push_back({Kind::step, knots[i], knots[i + 1], values[i], values[i], {}});
  return MeasureFn(mode, std::move(pieces), end_value);
}

const MeasureFn::Piece& MeasureFn::piece_at(double hint) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), hint,
                             [](double t, const Piece& p) { return t < p.t1; });
  if (it == pieces_.end()) return pieces_.back();
  return *it;
}

static double piece_value(const MeasureFn::Piece& p, double t) {
  switch (p.kind) {
    case MeasureFn::Kind::step: return p.v0;
    case MeasureFn::Kind::linear: {
      const double s = (t - p.t0) / (p.t1 - p.t0);
      return p.v0 + s * (p.v1 - p.v0);
    }
    case MeasureFn::Kind::function: return p.fn(t);
  }
  return p.v0;
}

double MeasureFn::operator()(double t) const {
  if (t >= end()) return end_value_;
  return piece_value(piece_at(t), t);
}

double MeasureFn::at(double t, double hint) const {
  if (hint >= end()) return end_value_;
  return piece_value(piece_at(hint), t);
}

bool MeasureFn::constant_on(double a, double b, double* value) const {
  const Piece& p = piece_at(0.5 * (a + b));
  const double eps = 1e-12 * (1.0 + std::abs(end()));
  if (a < p.t0 - eps || b > p.t1 + eps) return false;
  if (p.kind == Kind::step || (p.kind == Kind::linear && p.v0 == p.v1)) {
    *value = p.v0;
    return true;
  }
  return false;
}

std::vector<double> MeasureFn::knots() const {
  std::vector<double> k;
  for (const auto& p : pieces_) k.push_back(p.t0);
  k.push_back(end());
  return k;
}

double MeasureFn::t_one() const {
  if (end_value_ != 1.0) return end();
  double t = end();
  for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) {
    const bool one = (it->kind == Kind::step && it->v0 == 1.0) ||
                     (it->kind == Kind::linear && it->v0 == 1.0 && it->v1 == 1.0);
    if (!one) break;
    t = it->t0;
  }
  return t;
}

void MeasureFn::validate() const {
  const double eps = 1e-12 * (1.0 + std::abs(end()));
  if (std::abs(pieces_.front().t0) > eps)
    throw Error(ErrorCode::Validation, "measure must start at t=0");
  double prev = 0.0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const Piece& p = pieces_[i];
    if (!(p.t1 > p.t0)) throw Error(ErrorCode::Validation, "empty measure piece");
    if (i > 0 && std::abs(p.t0 - pieces_[i - 1].t1) > eps)
      throw Error(ErrorCode::Validation, "measure pieces are not contiguous");
    const int probes = p.kind == Kind::function ? 32 : 1;
    for (int j = 0; j <= probes; ++j) {
      const double t = p.t0 + (p.t1 - p.t0) * j / probes;
      const double v = piece_value(p, t);
      if (!std::isfinite(v) || v < prev - 1e-12) {
        std::ostringstream os;
        os << "measure decreases near t=" << t;
        throw Error(ErrorCode::MonotonicityViolation, os.str());
      }
      prev = std::max(prev, v);
    }
  }
  if (end_value_ < prev - 1e-12)
    throw Error(ErrorCode::MonotonicityViolation, "measure decreases at the end point");
  if (mode_ == MeasureMode::finite) {
    if (prev > 1.0 + 1e-12) throw Error(ErrorCode::Validation, "x exceeds 1");
    if (end_value_ != 1.0) throw Error(ErrorCode::Validation, "x(m) must equal 1");
  }
}

// --------------------------------------------------------------- MatrixPath

MatrixPath::MatrixPath(std::vector<Segment> segments) : segs_(std::move(segments)) {
  if (segs_.empty()) throw Error(ErrorCode::Validation, "path has no segments");
}

MatrixPath MatrixPath::linear(const SymMat& q, double end) {
  return MatrixPath({{Kind::linear, 0.0, end, SymMat::zero(q.dim()), q}});
}

const MatrixPath::Segment& MatrixPath::segment_at(double hint) const {
  auto it = std::upper_bound(segs_.begin(), segs_.end(), hint,
                             [](double t, const Segment& s) { return t < s.t1; });
  if (it == segs_.end()) return segs_.back();
  return *it;
}

SymMat MatrixPath::value(double t, double hint) const {
  const Segment& s = segment_at(hint);
  switch (s.kind) {
    case Kind::constant: return s.a;
    case Kind::linear: {
      const double u = (t - s.t0) / (s.t1 - s.t0);
      return s.a + u * (s.b - s.a);
    }
    case Kind::sine: {
      const double arg = std::numbers::pi * (2.0 * t - s.t0 - s.t1) / (2.0 * (s.t1 - s.t0));
      return 0.5 * (s.a + s.b) + (0.5 * std::sin(arg)) * (s.b - s.a);
    }
  }
  return s.a;
}

SymMat MatrixPath::deriv(double t, double hint) const {
  const Segment& s = segment_at(hint);
  switch (s.kind) {
    case Kind::constant: return SymMat::zero(s.a.dim());
    case Kind::linear: return (1.0 / (s.t1 - s.t0)) * (s.b - s.a);
    case Kind::sine: {
      const double w = std::numbers::pi / (2.0 * (s.t1 - s.t0));
      const double arg = w * (2.0 * t - s.t0 - s.t1);
      return (0.5 * std::cos(arg) * 2.0 * w) * (s.b - s.a);
    }
  }
  return SymMat::zero(s.a.dim());
}

std::vector<double> MatrixPath::knots() const {
  std::vector<double> k;
  for (const auto& s : segs_) k.push_back(s.t0);
  k.push_back(end());
  return k;
}

void MatrixPath::validate(int probes) const {
  if (segs_.front().t0 != 0.0) throw Error(ErrorCode::Validation, "path must start at t=0");
  if (segs_.front().a.frob_norm() > 1e-12) throw Error(ErrorCode::Validation, "Phi(0) != 0");
  for (std::size_t i = 0; i < segs_.size(); ++i) {
    const Segment& s = segs_[i];
    if (!(s.t1 > s.t0)) throw Error(ErrorCode::Validation, "empty path segment");
    if (s.a.dim() != dim() || s.b.dim() != dim())
      throw Error(ErrorCode::DimensionMismatch, "path segment dims differ");
    if (i > 0) {
      const Segment& p = segs_[i - 1];
      if (std::abs(s.t0 - p.t1) > 1e-12 || (s.a - p.b).frob_norm() > 1e-10)
        throw Error(ErrorCode::Validation, "path segments are not contiguous");
    }
    if (s.kind == Kind::constant && (s.b - s.a).frob_norm() > 1e-12)
      throw Error(ErrorCode::Validation, "constant segment with distinct endpoints");
  }
  for (int j = 0; j < probes; ++j) {
    const double t = end() * (j + 0.5) / probes;
    const double e = min_eig(deriv(t, t));
    if (e < -1e-10) {
      std::ostringstream os;
      os << "Phi'(" << t << ") has min eigenvalue " << e;
      throw Error(ErrorCode::MonotonicityViolation, os.str());
    }
  }
}

// ------------------------------------------------------------ interpolation

namespace {

std::pair<MeasureFn, MatrixPath> interpolate(MeasureMode mode, const std::vector<double>& x,
                                             const std::vector<SymMat>& Qs, double end_value) {
  const Eigen::Index m = Qs.back().dim();
  std::vector<MeasureFn::Piece> pieces;
  std::vector<MatrixPath::Segment> segs;
  SymMat prev = SymMat::zero(m);
  double tprev = 0.0;
  for (std::size_t k = 0; k < Qs.size(); ++k) {
    const double t = Qs[k].trace();
    const SymMat dq = Qs[k] - prev;
    if (t - tprev < 1e-12) {
      if (dq.frob_norm() > 1e-10 * (1.0 + Qs[k].frob_norm())) {
        std::ostringstream os;
        os << "knots t=" << tprev << " and t=" << t << " with distinct levels";
        throw Error(ErrorCode::DegenerateKnots, os.str());
      }
      continue;
    }
    segs.push_back({MatrixPath::Kind::sine, tprev, t, prev, Qs[k]});
    pieces.push_back({MeasureFn::Kind::step, tprev, t, x[k], x[k], {}});
    prev = Qs[k];
    tprev = t;
  }
  if (segs.empty()) throw Error(ErrorCode::DegenerateKnots, "all levels coincide");
  return {MeasureFn(mode, std::move(pieces), end_value), MatrixPath(std::move(segs))};
}

}  // namespace

std::pair<MeasureFn, MatrixPath> sine_interpolate(const DiscreteOrderParam& p) {
  p.validate();
  return interpolate(MeasureMode::finite, p.x, p.Qs, 1.0);
}

std::pair<MeasureFn, MatrixPath> sine_interpolate_zero(const std::vector<double>& a,
                                                       const std::vector<SymMat>& Qs) {
  if (a.size() != Qs.size() || Qs.empty())
    throw Error(ErrorCode::DimensionMismatch, "alpha levels and Q levels differ in count");
  return interpolate(MeasureMode::zero, a, Qs, a.back());
}

}  // namespace vecspin
