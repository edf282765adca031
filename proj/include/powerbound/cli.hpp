#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "powerbound/scenarios.hpp"

namespace powerbound {

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutputDirEnv = "POWERBOUND_OUTPUT_DIR";

/// Schema tag written into every report.
inline constexpr const char* kReportSchema = "powerbound-report/1";

/// A validated run request: global settings plus at least one scenario.
/// Produced by parse_config; global hbar / emit_distributions / tolerances
/// have already been folded into the individual scenario specs.
struct RunConfig {
  double hbar = 1.0;
  bool emit_distributions = false;
  std::string output_dir = ".";
  int workers = 0;  ///< 0: one thread per scenario up to the hardware limit
  std::vector<ScenarioSpec> scenarios;
};

/// Config rejection with one message per offence. Messages carry the JSON
/// pointer of the offending key and, when known, its line and column.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> items);
  const std::vector<std::string>& items() const { return items_; }

 private:
  std::vector<std::string> items_;
};

/// Parses and validates a config document. Returns the validated config or
/// throws ConfigError listing every detected problem. `source` is used only
/// to label the error messages.
RunConfig parse_config(const std::string& text, const std::string& source = "config");

/// Reads the file and delegates to parse_config. A missing or unreadable
/// file is a ConfigError.
RunConfig load_config(const std::string& path);

/// One executed (or crashed) scenario inside a report.
struct RunEntry {
  int index = 0;
  ScenarioOutcome outcome;
  bool crashed = false;
  std::string error;      ///< exception text when crashed
  double seconds = 0.0;   ///< wall-clock duration (a timing field)
};

struct RunReport {
  std::string schema = kReportSchema;
  bool overall_pass = true;
  double total_seconds = 0.0;  ///< wall-clock duration (a timing field)
  std::vector<RunEntry> entries;
  std::vector<DataTable> tables;  ///< run-level tables (sweep points)
};

struct RunOptions {
  /// Highest-precedence output directory (the command-line flag). When empty
  /// the POWERBOUND_OUTPUT_DIR environment variable is consulted, then the
  /// config value.
  std::string output_dir_override;
  bool write_files = true;  ///< false: compute the report only
};

/// Executes every scenario (concurrently up to the worker count), assembles
/// the report in scenario order, and writes report.json plus one CSV per
/// scenario table into the output directory. A scenario that throws becomes
/// a failed entry; the run itself only throws on I/O failure.
RunReport run(const RunConfig& config, const RunOptions& options = {});

/// Reruns the single scenario in `config` once per value, overriding the
/// named parameter (a list-valued parameter is replaced by a one-element
/// list). Adds a "sweep" table with one row per value. A parameter name that
/// does not belong to the scenario kind, a multi-scenario config, or an
/// empty value list is a ConfigError.
RunReport sweep(const RunConfig& config, const std::string& param,
                const std::vector<double>& values, const RunOptions& options = {});

/// Deterministic serialization of a report: keys in fixed order, floats with
/// up to 17 significant digits (lossless round-trip), two-space indent.
/// Serializing, parsing and serializing again is byte-identical.
std::string report_json(const RunReport& report);

/// Parses a JSON document and re-serializes it with the writer used by
/// report_json (fixed float formatting, preserved key order).
std::string canonical_json(const std::string& text);

/// The same document with every timing line removed: the byte-comparable
/// form two runs of the same config must agree on.
std::string strip_timing_fields(const std::string& report_json_text);

/// CSV text for one table: header row, then one line per row with floats at
/// up to 17 significant digits.
std::string csv_text(const DataTable& table);

/// 0 when every entry passes, 1 otherwise. (Expected violations on
/// non-autonomous scenarios do not fail their entry, so they never reach the
/// exit code.) Config errors are reported as exit code 2 by the tool.
int exit_code(const RunReport& report);

}  // namespace powerbound
