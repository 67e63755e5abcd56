#include "doctest.h"

#include "vecspin_cli/run.hpp"
#include "vecspin/functionals.hpp"

#include <cmath>

using namespace vecspin;
using vecspin::cli::run;

TEST_SUITE("cli") {

TEST_CASE("verify-rs on the scalar equality case") {
  const auto res = run(json::parse(R"({"command": "verify-rs",
    "model": {"m": 1, "terms": [{"p": 2, "beta": [1.0]}]}, "Q": [[1.0]]})"));
  REQUIRE(res.status == cli::kOk);
  CHECK(res.report["result"]["flag"] == true);
  CHECK(std::abs(res.report["result"]["margin"].get<double>()) < 1e-14);
  CHECK(res.report["version"] == std::string(cli::version()));
  CHECK(res.report["inputs"]["command"] == "verify-rs");
  CHECK(res.report.contains("timing_seconds"));
}

TEST_CASE("rsb-example reports the construction") {
  const auto res = run(json::parse(R"({"command": "rsb-example", "beta": 1.2})"));
  REQUIRE(res.status == cli::kOk);
  const json& r = res.report["result"];
  CHECK(r["q0"].get<double>() > 0.0);
  CHECK(r.contains("residual_sup"));
  CHECK(std::isfinite(r["value"].get<double>()));
  CHECK(res.table.header == std::vector<std::string>{"t", "residual", "in_support"});
  CHECK(run(json::parse(R"({"command": "rsb-example", "beta": 0.5})")).status == cli::kValidation);
}

TEST_CASE("minimize-gse on the pure 2-spin model") {
  const auto res = run(json::parse(R"({"command": "minimize-gse",
    "model": {"m": 1, "terms": [{"p": 2, "beta": [1.0]}]}})"));
  REQUIRE(res.status == cli::kOk);
  CHECK(res.report["result"]["value"].get<double>() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-4));
}

TEST_CASE("exit codes") {
  CHECK(run(json::parse(R"({"command": "nope"})")).status == cli::kValidation);
  const auto missing = run(json::parse(R"({"command": "eval-cs", "model": {"m": 1, "terms": []}})"));
  CHECK(missing.status == cli::kValidation);
  CHECK(missing.report["error"]["message"].get<std::string>().find("/order_param") != std::string::npos);
  const auto bad = run(json::parse(R"({"command": "verify-rs",
    "model": {"m": 2, "terms": [{"p": 2, "beta": [1.0, "x"]}]}})"));
  CHECK(bad.status == cli::kValidation);
  CHECK(bad.report["error"]["message"].get<std::string>().find("/model/terms/0/beta/1") != std::string::npos);
  // singular Q: numerical failure
  const auto sing = run(json::parse(R"({"command": "minimize",
    "model": {"m": 2, "terms": [{"p": 2, "beta": [1.0, 1.0]}]},
    "Q": [[1.0, 1.0], [1.0, 1.0]], "optimizer": {"restarts": 1, "r_schedule": [2]}})"));
  CHECK(sing.status == cli::kNumerical);
  const auto fit = run(json::parse(R"({"command": "extrapolate", "values": [[100, 1.0], [200, 1.1]]})"));
  CHECK(fit.status == cli::kNumerical);
}

TEST_CASE("emitted order parameter re-evaluates to the same value") {
  const json cfg = json::parse(R"({"command": "minimize",
    "model": {"m": 2, "terms": [{"p": 2, "beta": [1.0, 0.8]}, {"p": 4, "beta": [0.5, 0.4]}], "h": [0.2, 0.1]},
    "Q": [[1.0, 0.2], [0.2, 1.0]], "optimizer": {"restarts": 2, "r_schedule": [2, 3]}})");
  const auto res = run(cfg);
  REQUIRE(res.status == cli::kOk);
  json ev = {{"command", "eval-cs"}, {"model", cfg["model"]}, {"order_param", res.report["result"]["argmin"]}};
  const auto back = run(json::parse(ev.dump()));
  REQUIRE(back.status == cli::kOk);
  const double v = res.report["result"]["best_value"].get<double>();
  CHECK(std::abs(back.report["result"]["discrete"].get<double>() - v) <= 1e-12 * (1.0 + std::abs(v)));
}

TEST_CASE("reports are deterministic apart from timing") {
  const json cfg = json::parse(R"({"command": "simulate", "seed": 5,
    "model": {"m": 1, "terms": [{"p": 2, "beta": [1.0]}]},
    "N": [10, 14, 20], "draws": 2, "restarts": 2, "max_iters": 200})");
  auto a = run(cfg);
  auto b = run(cfg);
  REQUIRE(a.status == cli::kOk);
  a.report.erase("timing_seconds");
  b.report.erase("timing_seconds");
  CHECK(a.report == b.report);
  CHECK(a.report["result"].contains("extrapolation"));
  CHECK(a.table.header == std::vector<std::string>{"N", "seed", "restart", "energy"});
  CHECK(a.table.rows.size() == 12);
  auto c = run(cfg, 6);
  CHECK(c.report["result"] != a.report["result"]);
}

TEST_CASE("csv uses round-trip precision") {
  cli::Table t{{"a", "b"}, {{0.1, std::string("x,y")}}};
  CHECK(cli::to_csv(t) == "a,b\n0.10000000000000001,\"x,y\"\n");
  CHECK(std::stod(cli::format_number(M_PI)) == M_PI);
}

}  // TEST_SUITE
