#include "vecspin_cli/run.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
  using namespace vecspin::cli;

  CLI::App app{"Variational ground-state and free-energy tools for vector spin glasses"};
  std::string config_path;
  std::string output_path;
  std::string format = "json";
  std::uint64_t seed = 0;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--output", output_path, "report file (stdout if omitted)");
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}));
  auto* seed_opt = app.add_option("--seed", seed, "seed overriding the config");
  app.add_flag("--quiet", quiet, "suppress the summary on stderr");
  app.set_version_flag("--version", std::string(version()));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kValidation;
  }

  vecspin::json doc;
  {
    std::ifstream in(config_path);
    try {
      doc = vecspin::json::parse(in);
    } catch (const vecspin::json::parse_error& e) {
      std::cerr << "config: " << e.what() << '\n';
      return kValidation;
    }
  }

  const RunResult res = run(doc, seed_opt->count() ? std::optional<std::uint64_t>(seed) : std::nullopt);
  const std::string body = format == "csv" ? to_csv(res.table) : res.report.dump(2) + "\n";
  if (output_path.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(output_path);
    if (!out) {
      std::cerr << "cannot write " << output_path << '\n';
      return kInternal;
    }
    out << body;
  }
  if (!quiet) {
    if (res.report.contains("error"))
      std::cerr << res.report["error"]["message"].get<std::string>() << '\n';
    else
      std::cerr << res.report["command"].get<std::string>() << ": done in "
                << res.report["timing_seconds"].get<double>() << " s\n";
  }
  return res.status;
}
