#include "vecspin_cli/run.hpp"

#include "vecspin/diagnostics.hpp"
#include "vecspin/error.hpp"
#include "vecspin/functionals.hpp"
#include "vecspin/optimize.hpp"
#include "vecspin/rng.hpp"
#include "vecspin/sampler.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#ifndef VECSPIN_VERSION
#define VECSPIN_VERSION "0.0.0"
#endif

namespace vecspin::cli {

namespace {

[[noreturn]] void invalid(const std::string& ptr, const std::string& msg) {
  throw Error(ErrorCode::Validation, ptr + ": " + msg);
}

struct CommandSpec {
  std::vector<std::string> required;
  std::function<void(const RunConfig&, RunResult&)> exec;
};

MixedModel load_model(const json& doc) { return model_from_json(doc["model"], "/model"); }

SymMat load_q(const json& doc, const MixedModel& model) {
  if (!doc.contains("Q")) return SymMat::identity(model.m());
  SymMat q = sym_from_json(doc["Q"], "/Q");
  if (q.dim() != model.m()) invalid("/Q", "dimension must equal model m");
  return q;
}

OptimizerConfig load_optimizer(const RunConfig& c) {
  OptimizerConfig cfg;
  if (c.document.contains("optimizer"))
    cfg = optimizer_config_from_json(c.document["optimizer"], "/optimizer");
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

DiscreteOrderParam load_order_param(const json& doc, const MixedModel& model) {
  DiscreteOrderParam p = order_param_from_json(doc["order_param"], "/order_param");
  if (p.dim() != model.m()) invalid("/order_param/Qs", "dimension must equal model m");
  return p;
}

double number_or(const json& doc, const std::string& key, double fallback) {
  return doc.contains(key) ? number_at(doc[key], "/" + key) : fallback;
}

int integer_or(const json& doc, const std::string& key, int fallback) {
  return doc.contains(key) ? integer_at(doc[key], "/" + key) : fallback;
}

// Key/value rows for every scalar field of the result.
Table scalar_table(const json& result) {
  Table t{{"key", "value"}, {}};
  for (const auto& [k, v] : result.items())
    if (v.is_primitive() && !v.is_null()) t.rows.push_back({k, v});
  return t;
}

Table grid_table(const OptimalityReport& r) {
  Table t{{"t", "residual", "in_support"}, {}};
  for (std::size_t i = 0; i < r.support_grid.size(); ++i)
    t.rows.push_back({r.support_grid[i], r.per_point_residuals[i].second,
                      static_cast<int>(r.in_support[i])});
  return t;
}

Table level_table(const OptReport& r) {
  Table t{{"r", "value"}, {}};
  for (const auto& l : r.per_level) t.rows.push_back({l.r, l.value});
  return t;
}

void eval_cs(const RunConfig& c, RunResult& out) {
  const MixedModel model = load_model(c.document);
  const DiscreteOrderParam p = load_order_param(c.document, model);
  p.validate();
  const auto [x, path] = sine_interpolate(p);
  json res = {{"discrete", discrete_cs(model, p)}, {"continuous", continuous_cs(model, x, path)}};
  out.table = scalar_table(res);
  out.report["result"] = std::move(res);
}

void eval_parisi(const RunConfig& c, RunResult& out) {
  const json& d = c.document;
  const MixedModel model = load_model(d);
  const DiscreteOrderParam p = load_order_param(d, model);
  p.validate();
  const SymMat lambda = sym_from_json(d["lambda"], "/lambda");
  if (lambda.dim() != model.m()) invalid("/lambda", "dimension must equal model m");
  ParisiOptions opt;
  if (d.contains("log_weight")) {
    if (d["log_weight"] == "scaled") opt.log_weight = ParisiLogWeight::scaled;
    else if (d["log_weight"] == "unscaled") opt.log_weight = ParisiLogWeight::unscaled;
    else invalid("/log_weight", "expected \"scaled\" or \"unscaled\"");
  }
  if (d.contains("field")) {
    if (d["field"] == "lambda1") opt.field = ParisiField::lambda1;
    else if (d["field"] == "lambda") opt.field = ParisiField::lambda;
    else invalid("/field", "expected \"lambda1\" or \"lambda\"");
  }
  json res = {{"value", discrete_parisi(model, lambda, p, opt)}};
  out.table = scalar_table(res);
  out.report["result"] = std::move(res);
}

void eval_gse(const RunConfig& c, RunResult& out) {
  const json& d = c.document;
  const MixedModel model = load_model(d);
  const SymMat L = sym_from_json(d["L"], "/L");
  const Vec a = vec_from_json(d["alpha"], "/alpha");
  if (!d["Qs"].is_array()) invalid("/Qs", "expected an array");
  std::vector<SymMat> qs;
  for (std::size_t i = 0; i < d["Qs"].size(); ++i)
    qs.push_back(sym_from_json(d["Qs"][i], "/Qs/" + std::to_string(i)));
  if (qs.empty()) invalid("/Qs", "at least one level required");
  if (static_cast<std::size_t>(a.size()) != qs.size()) invalid("/alpha", "length must equal the number of levels");
  json res = {{"value", gse_discrete(model, L, std::vector<double>(a.data(), a.data() + a.size()), qs)}};
  out.table = scalar_table(res);
  out.report["result"] = std::move(res);
}

void minimize(const RunConfig& c, RunResult& out) {
  const json& d = c.document;
  const MixedModel model = load_model(d);
  const SymMat q = load_q(d, model);
  const OptimizerConfig cfg = load_optimizer(c);
  std::string which = "cs";
  if (d.contains("functional")) {
    if (!d["functional"].is_string()) invalid("/functional", "expected a string");
    which = d["functional"].get<std::string>();
    if (which != "cs" && which != "parisi") invalid("/functional", "expected \"cs\" or \"parisi\"");
  }
  const OptReport rep =
      which == "cs" ? minimize_discrete_cs(model, q, cfg) : minimize_discrete_parisi(model, q, cfg);
  json res = to_json(rep);
  res["functional"] = which;
  out.table = level_table(rep);
  out.report["result"] = std::move(res);
}

void minimize_gse_cmd(const RunConfig& c, RunResult& out) {
  const json& d = c.document;
  const MixedModel model = load_model(d);
  const SymMat q = load_q(d, model);
  const OptimizerConfig cfg = load_optimizer(c);
  const OptReport rep = minimize_gse(model, q, cfg);
  json res = to_json(rep);
  res["value"] = rep.best_value;
  res["rs_condition"] = to_json(rs_condition(model, q));
  res["rs_closed_form"] = to_json(rs_gse_closed_form(model, q));
  out.table = level_table(rep);
  out.report["result"] = std::move(res);
}

void sup_q(const RunConfig& c, RunResult& out) {
  const json& d = c.document;
  const MixedModel model = load_model(d);
  std::optional<SymMat> init;
  if (d.contains("Q")) init = load_q(d, model);
  const SupResult s = sup_over_Q(model, load_optimizer(c), init);
  json res = {{"value", s.value},
              {"Q", to_json(s.Q)},
              {"outer_iterations", s.outer_iterations},
              {"inner", to_json(s.inner)}};
  out.table = scalar_table(res);
  out.report["result"] = std::move(res);
}

void verify_rs(const RunConfig& c, RunResult& out) {
  const MixedModel model = load_model(c.document);
  const SymMat q = load_q(c.document, model);
  json res = to_json(rs_condition(model, q));
  if (is_pd(q)) res["closed_form"] = to_json(rs_gse_closed_form(model, q));
  out.table = scalar_table(res);
  out.report["result"] = std::move(res);
}

void verify_critical(const RunConfig& c, RunResult& out) {
  const json& d = c.document;
  const MixedModel model = load_model(d);
  MeasureFn x;
  MatrixPath path;
  if (d.contains("order_param")) {
    const DiscreteOrderParam p = load_order_param(d, model);
    p.validate();
    std::tie(x, path) = sine_interpolate(p);
  } else if (d.contains("x") && d.contains("path")) {
    x = measure_from_json(d["x"], "/x");
    path = path_from_json(d["path"], "/path");
    if (path.dim() != model.m()) invalid("/path", "dimension must equal model m");
  } else {
    invalid("", "either order_param or both x and path are required");
  }
  const double tol = number_or(d, "tolerance", 1e-5);
  const OptimalityReport rep = critical_residual(model, x, path, 1e-8, tol);
  out.table = grid_table(rep);
  out.report["result"] = to_json(rep);
}

void rsb_example(const RunConfig& c, RunResult& out) {
  const double beta = number_at(c.document["beta"], "/beta");
  const RsbExample ex = rsb_example_build(beta);
  json res = {{"beta", beta},
              {"q0", ex.q0},
              {"phi0", ex.phi0},
              {"x_q0_minus", ex.x_q0_minus},
              {"x_nondecreasing", ex.x_nondecreasing},
              {"identity_residual", ex.identity_residual},
              {"residual_sup", ex.report.residual_sup},
              {"projected_sup", ex.report.projected_sup},
              {"value", ex.value},
              {"Q", to_json(ex.Q)},
              {"report", to_json(ex.report)}};
  out.table = grid_table(ex.report);
  out.report["result"] = std::move(res);
}

void simulate(const RunConfig& c, RunResult& out) {
  const json& d = c.document;
  const MixedModel model = load_model(d);
  const SymMat q = load_q(d, model);
  const json& nj = d["N"];
  if (!nj.is_array() || nj.empty()) invalid("/N", "expected a nonempty array of sizes");
  std::vector<int> sizes;
  for (std::size_t i = 0; i < nj.size(); ++i) {
    const int n = integer_at(nj[i], "/N/" + std::to_string(i));
    if (n < 2) invalid("/N/" + std::to_string(i), "size must be at least 2");
    sizes.push_back(n);
  }
  const int draws = integer_or(d, "draws", 5);
  const int restarts = integer_or(d, "restarts", 8);
  const int max_iters = integer_or(d, "max_iters", 5000);
  const int p_cut = integer_or(d, "p_cut", 4);
  const double exponent = number_or(d, "exponent", -2.0 / 3.0);
  const double budget = number_or(d, "memory_budget_bytes", 1024.0 * 1024.0 * 1024.0);
  if (draws < 1) invalid("/draws", "must be positive");
  if (restarts < 1) invalid("/restarts", "must be positive");
  if (max_iters < 1) invalid("/max_iters", "must be positive");
  std::uint64_t seed = 0;
  if (d.contains("seed")) {
    if (!d["seed"].is_number_unsigned()) invalid("/seed", "expected a nonnegative integer");
    seed = d["seed"].get<std::uint64_t>();
  }
  if (c.seed) seed = *c.seed;

  Table t{{"N", "seed", "restart", "energy"}, {}};
  json per_n = json::array();
  json warnings = json::array();
  std::vector<std::pair<double, double>> means;
  for (int n : sizes) {
    double sum = 0.0;
    json bests = json::array();
    for (int k = 0; k < draws; ++k) {
      const std::uint64_t ds = make_stream(seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k))();
      const HamiltonianSample s = sample_hamiltonian(model, n, p_cut, ds, budget);
      if (k == 0)
        for (const auto& w : s.warnings()) warnings.push_back(w);
      const MaximizeResult m = maximize_energy(s, q, restarts, max_iters);
      for (std::size_t i = 0; i < m.per_restart.size(); ++i)
        t.rows.push_back({n, ds, static_cast<int>(i), m.per_restart[i]});
      bests.push_back(m.best);
      sum += m.best;
    }
    means.emplace_back(n, sum / draws);
    per_n.push_back({{"N", n}, {"mean_best", sum / draws}, {"best_per_draw", bests}});
  }
  json res = {{"per_N", per_n}, {"warnings", warnings}};
  std::set<int> distinct(sizes.begin(), sizes.end());
  if (distinct.size() >= 3) {
    const FitResult f = extrapolate_gse(means, exponent);
    res["extrapolation"] = {{"e_inf", f.e_inf}, {"slope", f.slope}, {"residual", f.residual}, {"exponent", exponent}};
  }
  out.table = std::move(t);
  out.report["result"] = std::move(res);
}

void extrapolate(const RunConfig& c, RunResult& out) {
  const json& v = c.document["values"];
  if (!v.is_array()) invalid("/values", "expected an array of [N, energy] pairs");
  std::vector<std::pair<double, double>> values;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = "/values/" + std::to_string(i);
    if (!v[i].is_array() || v[i].size() != 2) invalid(p, "expected an [N, energy] pair");
    values.emplace_back(number_at(v[i][0], p + "/0"), number_at(v[i][1], p + "/1"));
  }
  const double exponent = number_or(c.document, "exponent", -2.0 / 3.0);
  const FitResult f = extrapolate_gse(values, exponent);
  json res = {{"e_inf", f.e_inf}, {"slope", f.slope}, {"residual", f.residual}, {"exponent", exponent}};
  out.table = scalar_table(res);
  out.report["result"] = std::move(res);
}

const std::map<std::string, CommandSpec>& commands() {
  static const std::map<std::string, CommandSpec> table = {
      {"eval-cs", {{"model", "order_param"}, eval_cs}},
      {"eval-parisi", {{"model", "order_param", "lambda"}, eval_parisi}},
      {"eval-gse", {{"model", "L", "alpha", "Qs"}, eval_gse}},
      {"minimize", {{"model"}, minimize}},
      {"minimize-gse", {{"model"}, minimize_gse_cmd}},
      {"sup-q", {{"model"}, sup_q}},
      {"verify-rs", {{"model"}, verify_rs}},
      {"verify-critical", {{"model"}, verify_critical}},
      {"rsb-example", {{"beta"}, rsb_example}},
      {"simulate", {{"model", "N"}, simulate}},
      {"extrapolate", {{"values"}, extrapolate}},
  };
  return table;
}

}  // namespace

std::string_view version() noexcept { return VECSPIN_VERSION; }

RunConfig parse_run_config(const json& doc, std::optional<std::uint64_t> seed_override) {
  if (!doc.is_object()) invalid("", "config must be an object");
  const json& cmd = require(doc, "", "command");
  if (!cmd.is_string()) invalid("/command", "expected a string");
  const auto it = commands().find(cmd.get<std::string>());
  if (it == commands().end()) invalid("/command", "unknown command \"" + cmd.get<std::string>() + "\"");
  for (const auto& key : it->second.required) require(doc, "", key);
  RunConfig c{cmd.get<std::string>(), doc, std::nullopt};
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) invalid("/seed", "expected a nonnegative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (seed_override) c.seed = seed_override;
  return c;
}

RunResult run(const RunConfig& config) {
  RunResult out;
  out.report = {{"command", config.command}, {"version", std::string(version())}, {"inputs", config.document}};
  if (config.seed) out.report["seed"] = *config.seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    commands().at(config.command).exec(config, out);
    out.status = kOk;
  } catch (const Error& e) {
    out.status = is_numerical(e.code()) ? kNumerical : kValidation;
    out.report["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    out.table = {{"error"}, {{e.what()}}};
  } catch (const std::exception& e) {
    out.status = kInternal;
    out.report["error"] = {{"code", "Internal"}, {"message", e.what()}};
    out.table = {{"error"}, {{e.what()}}};
  }
  out.report["timing_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

RunResult run(const json& doc, std::optional<std::uint64_t> seed_override) {
  try {
    return run(parse_run_config(doc, seed_override));
  } catch (const Error& e) {
    RunResult out;
    out.status = kValidation;
    out.report = {{"version", std::string(version())},
                  {"inputs", doc},
                  {"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}}};
    out.table = {{"error"}, {{e.what()}}};
    return out;
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const Table& t) {
  const auto cell = [](const json& v) -> std::string {
    if (v.is_number_float()) return format_number(v.get<double>());
    if (v.is_string()) {
      std::string s = v.get<std::string>();
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string q = "\"";
      for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      return q + "\"";
    }
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  };
  std::ostringstream os;
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell(row[i]);
    os << '\n';
  }
  return os.str();
}

}  // namespace vecspin::cli
