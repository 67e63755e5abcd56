#pragma once

#include "vecspin/serialize.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vecspin::cli {

enum class Format { json, csv };

// Exit statuses of run().
inline constexpr int kOk = 0;
inline constexpr int kInternal = 1;
inline constexpr int kValidation = 2;
inline constexpr int kNumerical = 3;

struct RunConfig {
  std::string command;
  json document;  // full config, echoed into the report
  std::optional<std::uint64_t> seed;
};

// Checks the command name and its required fields. Throws Error(Validation).
RunConfig parse_run_config(const json& doc, std::optional<std::uint64_t> seed_override = {});

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<json>> rows;
};

struct RunResult {
  int status = kOk;
  json report;  // {"command", "version", "inputs", "result" | "error", "timing_seconds"}
  Table table;
};

RunResult run(const RunConfig& config);
// Parses and runs; schema errors map to kValidation.
RunResult run(const json& doc, std::optional<std::uint64_t> seed_override = {});

std::string to_csv(const Table& t);
std::string format_number(double v);
std::string_view version() noexcept;

}  // namespace vecspin::cli
