#include "vecspin/serialize.hpp"

#include "vecspin/error.hpp"

#include <cmath>

namespace vecspin {

namespace {

[[noreturn]] void fail(const std::string& ptr, const std::string& msg) {
  throw Error(ErrorCode::Validation, (ptr.empty() ? std::string("/") : ptr) + ": " + msg);
}

std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }
std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

const json& array_at(const json& j, const std::string& ptr) {
  if (!j.is_array()) fail(ptr, "expected an array");
  return j;
}

const char* measure_kind(MeasureFn::Kind k) {
  switch (k) {
    case MeasureFn::Kind::step: return "step";
    case MeasureFn::Kind::linear: return "linear";
    case MeasureFn::Kind::function: return "function";
  }
  return "step";
}

const char* segment_kind(MatrixPath::Kind k) {
  switch (k) {
    case MatrixPath::Kind::linear: return "linear";
    case MatrixPath::Kind::sine: return "sine";
    case MatrixPath::Kind::constant: return "constant";
  }
  return "linear";
}

}  // namespace

const json& require(const json& j, const std::string& ptr, const std::string& key) {
  if (!j.is_object()) fail(ptr, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(child(ptr, key), "required field missing");
  return *it;
}

double number_at(const json& j, const std::string& ptr) {
  if (!j.is_number()) fail(ptr, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(ptr, "expected a finite number");
  return v;
}

int integer_at(const json& j, const std::string& ptr) {
  if (!j.is_number_integer()) fail(ptr, "expected an integer");
  return j.get<int>();
}

json to_json(const SymMat& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.dim(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < a.dim(); ++k) row.push_back(a(i, k));
    rows.push_back(row);
  }
  return rows;
}

SymMat sym_from_json(const json& j, const std::string& ptr) {
  array_at(j, ptr);
  const auto n = static_cast<Eigen::Index>(j.size());
  if (n == 0) fail(ptr, "empty matrix");
  Mat a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string rp = child(ptr, static_cast<std::size_t>(i));
    const json& row = array_at(j[static_cast<std::size_t>(i)], rp);
    if (static_cast<Eigen::Index>(row.size()) != n) fail(rp, "matrix must be square");
    for (Eigen::Index k = 0; k < n; ++k)
      a(i, k) = number_at(row[static_cast<std::size_t>(k)], child(rp, static_cast<std::size_t>(k)));
  }
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + a.cwiseAbs().maxCoeff()))
    fail(ptr, "matrix must be symmetric");
  return SymMat(a);
}

Vec vec_from_json(const json& j, const std::string& ptr) {
  array_at(j, ptr);
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number_at(j[i], child(ptr, i));
  return v;
}

json to_json(const MixedModel& model) {
  json terms = json::array();
  for (const auto& t : model.terms())
    terms.push_back({{"p", t.p}, {"beta", std::vector<double>(t.beta.data(), t.beta.data() + t.beta.size())}});
  return {{"m", model.m()},
          {"terms", terms},
          {"h", std::vector<double>(model.h().data(), model.h().data() + model.h().size())}};
}

MixedModel model_from_json(const json& j, const std::string& ptr) {
  const int m = integer_at(require(j, ptr, "m"), child(ptr, "m"));
  if (m < 1) fail(child(ptr, "m"), "must be positive");
  Vec h = Vec::Zero(m);
  if (j.contains("h")) {
    h = vec_from_json(j["h"], child(ptr, "h"));
    if (h.size() != m) fail(child(ptr, "h"), "length must equal m");
  }
  if (j.contains("cosh")) {
    const std::string cp = child(ptr, "cosh");
    const json& c = j["cosh"];
    const double beta = number_at(require(c, cp, "beta"), child(cp, "beta"));
    const int trunc = c.contains("truncation") ? integer_at(c["truncation"], child(cp, "truncation")) : 16;
    const MixedModel base = cosh_model(beta, m, 1.1, trunc);
    return MixedModel(m, base.terms(), h, base.series_tail_tol());
  }
  const std::string tp = child(ptr, "terms");
  const json& terms = array_at(require(j, ptr, "terms"), tp);
  std::vector<ModelTerm> out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string ip = child(tp, i);
    ModelTerm t;
    t.p = integer_at(require(terms[i], ip, "p"), child(ip, "p"));
    if (t.p < 2) fail(child(ip, "p"), "p must be at least 2");
    const json& b = require(terms[i], ip, "beta");
    if (b.is_number()) {
      t.beta = Vec::Constant(m, number_at(b, child(ip, "beta")));
    } else {
      t.beta = vec_from_json(b, child(ip, "beta"));
      if (t.beta.size() != m) fail(child(ip, "beta"), "length must equal m");
    }
    out.push_back(std::move(t));
  }
  return MixedModel(m, std::move(out), h);
}

json to_json(const DiscreteOrderParam& p) {
  json qs = json::array();
  for (const auto& q : p.Qs) qs.push_back(to_json(q));
  return {{"x", p.x}, {"Qs", qs}};
}

DiscreteOrderParam order_param_from_json(const json& j, const std::string& ptr) {
  DiscreteOrderParam p;
  const Vec x = vec_from_json(require(j, ptr, "x"), child(ptr, "x"));
  p.x.assign(x.data(), x.data() + x.size());
  const std::string qp = child(ptr, "Qs");
  const json& qs = array_at(require(j, ptr, "Qs"), qp);
  for (std::size_t i = 0; i < qs.size(); ++i) p.Qs.push_back(sym_from_json(qs[i], child(qp, i)));
  if (p.x.size() != p.Qs.size()) fail(ptr, "x and Qs must have the same length");
  if (p.Qs.empty()) fail(qp, "at least one level required");
  return p;
}

json to_json(const MeasureFn& x) {
  json pieces = json::array();
  for (const auto& pc : x.pieces()) {
    if (pc.kind == MeasureFn::Kind::function)
      throw Error(ErrorCode::Validation, "function pieces cannot be serialized");
    json o = {{"kind", measure_kind(pc.kind)}, {"t0", pc.t0}, {"t1", pc.t1}, {"v0", pc.v0}};
    if (pc.kind == MeasureFn::Kind::linear) o["v1"] = pc.v1;
    pieces.push_back(o);
  }
  return {{"mode", x.mode() == MeasureMode::finite ? "finite" : "zero"},
          {"pieces", pieces},
          {"end_value", x.end_value()}};
}

MeasureFn measure_from_json(const json& j, const std::string& ptr) {
  MeasureMode mode = MeasureMode::finite;
  if (j.contains("mode")) {
    const json& mj = j["mode"];
    if (mj == "finite") mode = MeasureMode::finite;
    else if (mj == "zero") mode = MeasureMode::zero;
    else fail(child(ptr, "mode"), "expected \"finite\" or \"zero\"");
  }
  const std::string pp = child(ptr, "pieces");
  const json& pieces = array_at(require(j, ptr, "pieces"), pp);
  std::vector<MeasureFn::Piece> out;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const std::string ip = child(pp, i);
    MeasureFn::Piece pc;
    const json& kind = require(pieces[i], ip, "kind");
    if (kind == "step") pc.kind = MeasureFn::Kind::step;
    else if (kind == "linear") pc.kind = MeasureFn::Kind::linear;
    else fail(child(ip, "kind"), "expected \"step\" or \"linear\"");
    pc.t0 = number_at(require(pieces[i], ip, "t0"), child(ip, "t0"));
    pc.t1 = number_at(require(pieces[i], ip, "t1"), child(ip, "t1"));
    pc.v0 = number_at(require(pieces[i], ip, "v0"), child(ip, "v0"));
    pc.v1 = pc.kind == MeasureFn::Kind::linear
                ? number_at(require(pieces[i], ip, "v1"), child(ip, "v1"))
                : pc.v0;
    out.push_back(std::move(pc));
  }
  if (out.empty()) fail(pp, "at least one piece required");
  const double end_value = number_at(require(j, ptr, "end_value"), child(ptr, "end_value"));
  return MeasureFn(mode, std::move(out), end_value);
}

json to_json(const MatrixPath& path) {
  json segs = json::array();
  for (const auto& s : path.segments())
    segs.push_back({{"kind", segment_kind(s.kind)},
                    {"t0", s.t0},
                    {"t1", s.t1},
                    {"a", to_json(s.a)},
                    {"b", to_json(s.b)}});
  return {{"segments", segs}};
}

MatrixPath path_from_json(const json& j, const std::string& ptr) {
  const std::string sp = child(ptr, "segments");
  const json& segs = array_at(require(j, ptr, "segments"), sp);
  std::vector<MatrixPath::Segment> out;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::string ip = child(sp, i);
    MatrixPath::Segment s;
    const json& kind = require(segs[i], ip, "kind");
    if (kind == "linear") s.kind = MatrixPath::Kind::linear;
    else if (kind == "sine") s.kind = MatrixPath::Kind::sine;
    else if (kind == "constant") s.kind = MatrixPath::Kind::constant;
    else fail(child(ip, "kind"), "expected \"linear\", \"sine\" or \"constant\"");
    s.t0 = number_at(require(segs[i], ip, "t0"), child(ip, "t0"));
    s.t1 = number_at(require(segs[i], ip, "t1"), child(ip, "t1"));
    s.a = sym_from_json(require(segs[i], ip, "a"), child(ip, "a"));
    s.b = sym_from_json(require(segs[i], ip, "b"), child(ip, "b"));
    out.push_back(std::move(s));
  }
  if (out.empty()) fail(sp, "at least one segment required");
  return MatrixPath(std::move(out));
}

json to_json(const OptimizerConfig& cfg) {
  return {{"restarts", cfg.restarts},     {"max_iters", cfg.max_iters},
          {"grad_tol", cfg.grad_tol},     {"penalty_weight", cfg.penalty_weight},
          {"seed", cfg.seed},             {"r_schedule", cfg.r_schedule}};
}

OptimizerConfig optimizer_config_from_json(const json& j, const std::string& ptr) {
  OptimizerConfig cfg;
  if (!j.is_object()) fail(ptr, "expected an object");
  if (j.contains("restarts")) cfg.restarts = integer_at(j["restarts"], child(ptr, "restarts"));
  if (j.contains("max_iters")) cfg.max_iters = integer_at(j["max_iters"], child(ptr, "max_iters"));
  if (j.contains("grad_tol")) cfg.grad_tol = number_at(j["grad_tol"], child(ptr, "grad_tol"));
  if (j.contains("penalty_weight"))
    cfg.penalty_weight = number_at(j["penalty_weight"], child(ptr, "penalty_weight"));
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail(child(ptr, "seed"), "expected a nonnegative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("r_schedule")) {
    const std::string sp = child(ptr, "r_schedule");
    const json& s = array_at(j["r_schedule"], sp);
    cfg.r_schedule.clear();
    for (std::size_t i = 0; i < s.size(); ++i) cfg.r_schedule.push_back(integer_at(s[i], child(sp, i)));
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    fail(ptr, e.what());
  }
  return cfg;
}

json to_json(const OptReport& r) {
  json levels = json::array();
  for (const auto& l : r.per_level) levels.push_back({{"r", l.r}, {"value", l.value}});
  json o = {{"best_value", r.best_value},
            {"argmin", to_json(r.argmin)},
            {"per_restart_values", r.per_restart_values},
            {"per_level", levels},
            {"converged", r.converged},
            {"kkt_residual", r.kkt_residual}};
  if (r.lambda) o["lambda"] = to_json(*r.lambda);
  if (r.L) {
    o["L"] = to_json(*r.L);
    o["alpha"] = r.alpha;
  }
  return o;
}

json to_json(const OptimalityReport& r, bool with_grid) {
  json o = {{"residual_sup", r.residual_sup}, {"projected_sup", r.projected_sup},
            {"pass", r.pass},                 {"tolerance", r.tolerance},
            {"stationarity", r.stationarity}, {"g_min", r.g_min},
            {"off_support_mass", r.off_support_mass}};
  if (with_grid) {
    json grid = json::array();
    for (std::size_t i = 0; i < r.support_grid.size(); ++i)
      grid.push_back({{"t", r.support_grid[i]},
                      {"value", r.per_point_residuals[i].second},
                      {"in_support", static_cast<bool>(r.in_support[i])}});
    o["grid"] = grid;
  }
  return o;
}

json to_json(const RsCondition& c) {
  return {{"flag", c.flag},
          {"margin", c.margin},
          {"entrywise_margin", c.entrywise_margin},
          {"paired", c.paired}};
}

json to_json(const RsGse& r) {
  return {{"value", r.value},
          {"sum_value", r.sum_value},
          {"variants_agree", r.variants_agree},
          {"L0", to_json(r.L0)}};
}

}  // namespace vecspin
