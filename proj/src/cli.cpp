#include "powerbound/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace powerbound {

using ojson = nlohmann::ordered_json;

namespace {

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

// --------------------------------------------------------------------------
// Position index: JSON pointer -> line and column in the source text.
//
// nlohmann reports positions only for syntax errors; semantic errors (an
// unknown key, a wrong type) land after parsing, when positions are gone.
// This scanner re-walks the raw text -- which the strict parser has already
// accepted -- and records where every object key and array element begins.
// --------------------------------------------------------------------------

std::string pointer_escape(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

class PositionIndex {
 public:
  explicit PositionIndex(const std::string& text) : text_(text) { value(""); }

  /// " (line L, column C)" when the path was seen, else "".
  std::string suffix(const std::string& path) const {
    auto it = offsets_.find(path);
    if (it == offsets_.end()) return "";
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < it->second && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return " (line " + std::to_string(line) + ", column " + std::to_string(col) + ")";
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  // pos_ sits on the opening quote; returns the decoded key text.
  std::string string_token() {
    std::string out;
    ++pos_;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_];
      if (c == '\\' && pos_ + 1 < text_.size()) {
        char e = text_[pos_ + 1];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case 'b': out += '\b'; break;
          case 'f': out += '\f'; break;
          case 'u': out += '?'; pos_ += 4; break;  // positions only; no decode
          default: out += e; break;
        }
        pos_ += 2;
      } else {
        out += c;
        ++pos_;
      }
    }
    if (pos_ < text_.size()) ++pos_;  // closing quote
    return out;
  }

  void value(const std::string& path) {
    skip_ws();
    if (pos_ >= text_.size()) return;
    offsets_.emplace(path, pos_);  // keep a key's position if already set
    char c = text_[pos_];
    if (c == '{') {
      object(path);
    } else if (c == '[') {
      array(path);
    } else if (c == '"') {
      string_token();
    } else {
      while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '}' &&
             text_[pos_] != ']' &&
             !std::isspace(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
    }
  }

  void object(const std::string& path) {
    ++pos_;
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '}') {
      ++pos_;
      return;
    }
    while (pos_ < text_.size()) {
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != '"') return;
      const std::size_t key_at = pos_;
      const std::string child = path + "/" + pointer_escape(string_token());
      offsets_[child] = key_at;
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == ':') ++pos_;
      value(child);
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (pos_ < text_.size() && text_[pos_] == '}') ++pos_;
      return;
    }
  }

  void array(const std::string& path) {
    ++pos_;
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ']') {
      ++pos_;
      return;
    }
    std::size_t index = 0;
    while (pos_ < text_.size()) {
      value(path + "/" + std::to_string(index++));
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (pos_ < text_.size() && text_[pos_] == ']') ++pos_;
      return;
    }
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  std::map<std::string, std::size_t> offsets_;
};

// --------------------------------------------------------------------------
// Config parsing
// --------------------------------------------------------------------------

struct ErrorList {
  const std::string& source;
  const PositionIndex& where;
  std::vector<std::string> items;

  void add(const std::string& path, const std::string& message) {
    std::string line = source;
    if (!path.empty()) line += ": " + path;
    line += ": " + message + where.suffix(path);
    items.push_back(std::move(line));
  }
};

bool finite_number(const ojson& v, double& out) {
  if (!v.is_number()) return false;
  const double d = v.get<double>();
  if (!std::isfinite(d)) return false;
  out = d;
  return true;
}

std::string known_parameters(const std::string& kind) {
  std::vector<std::string> names;
  for (const ParamDoc& doc : scenario_parameters(kind)) names.push_back(doc.name);
  return join(names, ", ");
}

void parse_scenario_tolerances(const ojson& node, const std::string& path,
                               const std::string& kind, ErrorList& errors,
                               std::map<std::string, double>& out) {
  if (!node.is_object()) {
    errors.add(path, "must be an object of check-name to tolerance");
    return;
  }
  const std::vector<std::string>& known = scenario_check_names(kind);
  for (const auto& [key, value] : node.items()) {
    const std::string kpath = path + "/" + pointer_escape(key);
    double tol = 0.0;
    if (!finite_number(value, tol) || tol < 0.0) {
      errors.add(kpath, "must be a finite non-negative number");
      continue;
    }
    if (key != "bound_inequality" &&
        std::find(known.begin(), known.end(), key) == known.end()) {
      errors.add(kpath, "does not name a check of kind '" + kind +
                            "' (valid: bound_inequality, " + join(known, ", ") + ")");
      continue;
    }
    out[key] = tol;
  }
}

void parse_scenario_params(const ojson& node, const std::string& path,
                           const std::string& kind, ErrorList& errors,
                           ScenarioSpec& spec) {
  if (!node.is_object()) {
    errors.add(path, "must be an object of parameter values");
    return;
  }
  const std::vector<ParamDoc>& docs = scenario_parameters(kind);
  for (const auto& [key, value] : node.items()) {
    const std::string kpath = path + "/" + pointer_escape(key);
    auto doc = std::find_if(docs.begin(), docs.end(),
                            [&](const ParamDoc& d) { return d.name == key; });
    if (doc == docs.end()) {
      errors.add(kpath, "unknown parameter for kind '" + kind + "' (valid: " +
                            known_parameters(kind) + ")");
      continue;
    }
    if (doc->kind == ParamDoc::Kind::List) {
      if (!value.is_array() || value.empty()) {
        errors.add(kpath, "must be a non-empty array of numbers");
        continue;
      }
      std::vector<double> list;
      bool ok = true;
      for (const auto& item : value) {
        double d = 0.0;
        if (!finite_number(item, d)) {
          ok = false;
          break;
        }
        list.push_back(d);
      }
      if (!ok) {
        errors.add(kpath, "must be a non-empty array of numbers");
        continue;
      }
      spec.lists[key] = std::move(list);
      continue;
    }
    double d = 0.0;
    if (!finite_number(value, d)) {
      errors.add(kpath, "must be a number");
      continue;
    }
    if (doc->kind == ParamDoc::Kind::Integer && d != std::floor(d)) {
      errors.add(kpath, "must be an integer");
      continue;
    }
    spec.numbers[key] = d;
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> items)
    : std::runtime_error(join(items, "\n")), items_(std::move(items)) {}

RunConfig parse_config(const std::string& text, const std::string& source) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::string message = e.what();
    const auto tag_end = message.find("] ");
    if (tag_end != std::string::npos) message = message.substr(tag_end + 2);
    throw ConfigError({source + ": " + message});
  }

  const PositionIndex where(text);
  ErrorList errors{source, where, {}};

  if (!doc.is_object()) {
    errors.add("", "top level must be an object");
    throw ConfigError(std::move(errors.items));
  }

  static const std::set<std::string> top_keys = {
      "hbar", "emit_distributions", "output_dir", "workers", "tolerances",
      "scenarios"};
  for (const auto& [key, value] : doc.items()) {
    if (!top_keys.count(key))
      errors.add("/" + pointer_escape(key),
                 "unknown key (valid: " +
                     join({top_keys.begin(), top_keys.end()}, ", ") + ")");
  }

  RunConfig config;
  if (doc.contains("hbar")) {
    double h = 0.0;
    if (!finite_number(doc["hbar"], h) || h <= 0.0)
      errors.add("/hbar", "must be a positive number");
    else
      config.hbar = h;
  }
  if (doc.contains("emit_distributions")) {
    if (!doc["emit_distributions"].is_boolean())
      errors.add("/emit_distributions", "must be a boolean");
    else
      config.emit_distributions = doc["emit_distributions"].get<bool>();
  }
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string() ||
        doc["output_dir"].get<std::string>().empty())
      errors.add("/output_dir", "must be a non-empty string");
    else
      config.output_dir = doc["output_dir"].get<std::string>();
  }
  if (doc.contains("workers")) {
    const ojson& w = doc["workers"];
    if (!w.is_number_integer() || w.get<long long>() < 1 ||
        w.get<long long>() > 1024)
      errors.add("/workers", "must be an integer between 1 and 1024");
    else
      config.workers = static_cast<int>(w.get<long long>());
  }

  std::map<std::string, double> global_tolerances;
  if (doc.contains("tolerances")) {
    if (!doc["tolerances"].is_object()) {
      errors.add("/tolerances", "must be an object of check-name to tolerance");
    } else {
      for (const auto& [key, value] : doc["tolerances"].items()) {
        const std::string kpath = "/tolerances/" + pointer_escape(key);
        double tol = 0.0;
        if (!finite_number(value, tol) || tol < 0.0)
          errors.add(kpath, "must be a finite non-negative number");
        else
          global_tolerances[key] = tol;
      }
    }
  }

  if (!doc.contains("scenarios") || !doc["scenarios"].is_array() ||
      doc["scenarios"].empty()) {
    errors.add("/scenarios", "at least one scenario is required");
    throw ConfigError(std::move(errors.items));
  }

  static const std::set<std::string> scenario_keys = {
      "kind", "name", "hbar", "emit_distributions", "seed", "params",
      "tolerances"};
  const std::vector<std::string>& kinds = scenario_kinds();

  std::map<std::string, std::string> names_seen;  // name -> path of first use
  int index = 0;
  for (const auto& node : doc["scenarios"]) {
    const std::string sp = "/scenarios/" + std::to_string(index++);
    if (!node.is_object()) {
      errors.add(sp, "must be an object");
      continue;
    }
    for (const auto& [key, value] : node.items()) {
      if (!scenario_keys.count(key))
        errors.add(sp + "/" + pointer_escape(key),
                   "unknown key (valid: " +
                       join({scenario_keys.begin(), scenario_keys.end()}, ", ") +
                       ")");
    }
    if (!node.contains("kind") || !node["kind"].is_string()) {
      errors.add(sp, "missing required string key 'kind'");
      continue;
    }
    ScenarioSpec spec;
    spec.kind = node["kind"].get<std::string>();
    if (std::find(kinds.begin(), kinds.end(), spec.kind) == kinds.end()) {
      errors.add(sp + "/kind",
                 "unknown scenario kind '" + spec.kind + "' (valid: " +
                     join(kinds, ", ") + ")");
      continue;
    }

    spec.hbar = config.hbar;
    if (node.contains("hbar")) {
      double h = 0.0;
      if (!finite_number(node["hbar"], h) || h <= 0.0)
        errors.add(sp + "/hbar", "must be a positive number");
      else
        spec.hbar = h;
    }
    spec.emit_distributions = config.emit_distributions;
    if (node.contains("emit_distributions")) {
      if (!node["emit_distributions"].is_boolean())
        errors.add(sp + "/emit_distributions", "must be a boolean");
      else
        spec.emit_distributions = node["emit_distributions"].get<bool>();
    }
    if (node.contains("name")) {
      if (!node["name"].is_string() || node["name"].get<std::string>().empty())
        errors.add(sp + "/name", "must be a non-empty string");
      else
        spec.name = node["name"].get<std::string>();
    }
    if (node.contains("seed")) {
      const ojson& s = node["seed"];
      if (!scenario_needs_seed(spec.kind))
        errors.add(sp + "/seed",
                   "scenario kind '" + spec.kind + "' does not take a seed");
      else if (!s.is_number_integer() && !s.is_number_unsigned())
        errors.add(sp + "/seed", "must be a non-negative integer");
      else if (s.is_number_integer() && s.get<long long>() < 0)
        errors.add(sp + "/seed", "must be a non-negative integer");
      else {
        spec.has_seed = true;
        spec.seed = s.get<std::uint64_t>();
      }
    } else if (scenario_needs_seed(spec.kind)) {
      errors.add(sp, "missing required key 'seed' for kind '" + spec.kind + "'");
      continue;
    }
    if (node.contains("params"))
      parse_scenario_params(node["params"], sp + "/params", spec.kind, errors, spec);
    if (node.contains("tolerances"))
      parse_scenario_tolerances(node["tolerances"], sp + "/tolerances",
                                spec.kind, errors, spec.tolerances);

    // Global tolerances apply wherever the named check exists; the
    // scenario's own entries win.
    const std::vector<std::string>& checks = scenario_check_names(spec.kind);
    for (const auto& [key, tol] : global_tolerances) {
      if (key != "bound_inequality" &&
          std::find(checks.begin(), checks.end(), key) == checks.end())
        continue;
      spec.tolerances.emplace(key, tol);
    }

    if (spec.name.empty()) spec.name = spec.kind;
    auto [it, inserted] = names_seen.emplace(spec.name, sp);
    if (!inserted)
      errors.add(sp, "duplicate scenario name '" + spec.name +
                         "' (also used at " + it->second +
                         "); give the scenarios distinct names");

    try {
      validate_scenario_spec(spec);
    } catch (const std::exception& e) {
      errors.add(sp, e.what());
      continue;
    }
    config.scenarios.push_back(std::move(spec));
  }

  // A global tolerance that applies to no scenario in this config is a typo.
  // Only judged on otherwise clean configs: a rejected scenario may have been
  // the intended consumer.
  if (errors.items.empty()) {
    for (const auto& [key, tol] : global_tolerances) {
      (void)tol;
      if (key == "bound_inequality") continue;
      bool used = false;
      for (const ScenarioSpec& spec : config.scenarios) {
        const std::vector<std::string>& checks = scenario_check_names(spec.kind);
        used = used ||
               std::find(checks.begin(), checks.end(), key) != checks.end();
      }
      if (!used)
        errors.add("/tolerances/" + pointer_escape(key),
                   "does not name a check of any scenario in this config");
    }
  }

  if (!errors.items.empty()) throw ConfigError(std::move(errors.items));
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({path + ": cannot open config file"});
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

// --------------------------------------------------------------------------
// Deterministic serialization
// --------------------------------------------------------------------------

namespace {

// Up to 17 significant digits: enough for a lossless double round-trip, and
// a fixed choice so reruns produce identical bytes. Zero is canonicalized
// (no "-0") and non-finite values become null, which JSON cannot represent.
std::string fmt17(double v) {
  if (v == 0.0) return "0";
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Shortest digit string that parses back to exactly v; used for labels where
// readability matters more than a fixed digit count.
std::string shortest_digits(double v) {
  char buf[32];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

void dump_string(const std::string& s, std::string& out) {
  out += '"';
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
}

void dump_value(const ojson& v, std::string& out, int depth) {
  const std::string pad(2 * static_cast<std::size_t>(depth), ' ');
  const std::string inner(2 * static_cast<std::size_t>(depth + 1), ' ');
  switch (v.type()) {
    case ojson::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (const auto& [key, child] : v.items()) {
        out += inner;
        dump_string(key, out);
        out += ": ";
        dump_value(child, out, depth + 1);
        if (++i < v.size()) out += ',';
        out += '\n';
      }
      out += pad + "}";
      return;
    }
    case ojson::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        out += inner;
        dump_value(v[i], out, depth + 1);
        if (i + 1 < v.size()) out += ',';
        out += '\n';
      }
      out += pad + "]";
      return;
    }
    case ojson::value_t::string:
      dump_string(v.get<std::string>(), out);
      return;
    case ojson::value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      return;
    case ojson::value_t::number_float:
      out += fmt17(v.get<double>());
      return;
    case ojson::value_t::number_integer:
      out += std::to_string(v.get<long long>());
      return;
    case ojson::value_t::number_unsigned:
      out += std::to_string(v.get<unsigned long long>());
      return;
    default:
      out += "null";
      return;
  }
}

std::string dump_document(const ojson& doc) {
  std::string out;
  dump_value(doc, out, 0);
  out += '\n';
  return out;
}

std::string sanitize_filename(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' ||
                    c == '-' || c == '_';
    out += ok ? c : '_';
  }
  return out.empty() ? std::string("unnamed") : out;
}

std::string table_filename(const std::string& owner, const DataTable& table) {
  if (owner.empty()) return sanitize_filename(table.name) + ".csv";
  return sanitize_filename(owner) + "_" + sanitize_filename(table.name) + ".csv";
}

ojson bound_report_json(const BoundReport& rep) {
  ojson j;
  j["work"] = rep.work;
  j["power"] = rep.power;
  j["tau"] = rep.tau;
  j["hbar"] = rep.hbar;
  j["h_s_norm"] = rep.h_s_norm;
  j["delta_h_a"] = rep.delta_h_a;
  j["comm_norm"] = rep.comm_norm;
  j["rhs_fluctuation"] = rep.rhs_fluctuation;
  j["rhs_commutator"] = rep.rhs_commutator;
  j["saturation_fluctuation"] = rep.saturation_fluctuation;
  j["saturation_commutator"] = rep.saturation_commutator;
  j["timescale_estimate"] = rep.timescale_estimate;
  j["tolerance"] = rep.tolerance;
  j["condition1_ok"] = rep.condition1_ok;
  j["bound_violated"] = rep.bound_violated;
  j["violation_expected"] = rep.violation_expected;
  j["pass"] = rep.pass;
  if (!rep.note.empty()) j["note"] = rep.note;
  return j;
}

ojson check_json(const CheckReport& check) {
  ojson j;
  j["name"] = check.name;
  j["pass"] = check.pass;
  j["residual"] = check.residual;
  j["tolerance"] = check.tolerance;
  if (!check.detail.empty()) j["detail"] = check.detail;
  if (!check.values.empty()) {
    ojson values;
    for (const auto& [key, value] : check.values) values[key] = value;
    j["values"] = values;
  }
  return j;
}

ojson entry_json(const RunEntry& entry) {
  ojson j;
  j["index"] = entry.index;
  j["kind"] = entry.outcome.kind;
  j["name"] = entry.outcome.name;
  j["pass"] = entry.outcome.pass;
  if (entry.crashed) {
    j["error"] = entry.error;
    j["seconds"] = entry.seconds;
    return j;
  }
  j["autonomous"] = entry.outcome.autonomous;
  if (!entry.outcome.note.empty()) j["note"] = entry.outcome.note;
  j["seconds"] = entry.seconds;
  j["bound_report"] = bound_report_json(entry.outcome.bound_report);
  ojson checks = ojson::array();
  for (const CheckReport& check : entry.outcome.checks)
    checks.push_back(check_json(check));
  j["checks"] = std::move(checks);
  ojson artifacts = ojson::array();
  for (const std::string& name : entry.outcome.artifacts) artifacts.push_back(name);
  j["artifacts"] = std::move(artifacts);
  return j;
}

}  // namespace

std::string report_json(const RunReport& report) {
  ojson j;
  j["schema"] = report.schema;
  j["overall_pass"] = report.overall_pass;
  j["scenario_count"] = static_cast<long long>(report.entries.size());
  j["total_seconds"] = report.total_seconds;
  ojson artifacts = ojson::array();
  for (const DataTable& table : report.tables)
    artifacts.push_back(table_filename("", table));
  j["artifacts"] = std::move(artifacts);
  ojson scenarios = ojson::array();
  for (const RunEntry& entry : report.entries)
    scenarios.push_back(entry_json(entry));
  j["scenarios"] = std::move(scenarios);
  return dump_document(j);
}

std::string canonical_json(const std::string& text) {
  return dump_document(ojson::parse(text));
}

std::string strip_timing_fields(const std::string& report_json_text) {
  std::istringstream in(report_json_text);
  std::string out;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(' ');
    const std::string trimmed =
        first == std::string::npos ? std::string() : line.substr(first);
    if (trimmed.rfind("\"seconds\":", 0) == 0 ||
        trimmed.rfind("\"total_seconds\":", 0) == 0)
      continue;
    out += line;
    out += '\n';
  }
  return out;
}

std::string csv_text(const DataTable& table) {
  std::string out = join(table.columns, ",");
  out += '\n';
  for (const std::vector<double>& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += fmt17(row[i]);
    }
    out += '\n';
  }
  return out;
}

int exit_code(const RunReport& report) { return report.overall_pass ? 0 : 1; }

// --------------------------------------------------------------------------
// Execution
// --------------------------------------------------------------------------

namespace {

std::string resolve_output_dir(const RunConfig& config, const RunOptions& options) {
  if (!options.output_dir_override.empty()) return options.output_dir_override;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return config.output_dir;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed while writing " + path.string());
}

void write_outputs(const RunReport& report, const std::string& dir) {
  const std::filesystem::path base(dir);
  std::filesystem::create_directories(base);
  for (const RunEntry& entry : report.entries) {
    for (std::size_t t = 0; t < entry.outcome.tables.size(); ++t)
      write_text_file(base / entry.outcome.artifacts[t],
                      csv_text(entry.outcome.tables[t]));
  }
  for (const DataTable& table : report.tables)
    write_text_file(base / table_filename("", table), csv_text(table));
  write_text_file(base / "report.json", report_json(report));
}

RunReport execute(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = config.scenarios.size();
  RunReport report;
  report.entries.resize(n);

  int workers = config.workers;
  if (workers <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    workers = hw > 0 ? static_cast<int>(hw) : 1;
  }
  workers = std::clamp<int>(workers, 1, static_cast<int>(n));

  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      RunEntry& entry = report.entries[i];
      entry.index = static_cast<int>(i);
      const auto t0 = std::chrono::steady_clock::now();
      try {
        entry.outcome = run_scenario(config.scenarios[i]);
      } catch (const std::exception& e) {
        entry.crashed = true;
        entry.error = e.what();
        entry.outcome.kind = config.scenarios[i].kind;
        entry.outcome.name = config.scenarios[i].name.empty()
                                 ? config.scenarios[i].kind
                                 : config.scenarios[i].name;
        entry.outcome.pass = false;
      }
      entry.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
    }
  };

  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (std::thread& t : pool) t.join();
  }

  // Single-threaded assembly, in scenario order.
  report.overall_pass = true;
  for (RunEntry& entry : report.entries) {
    entry.outcome.artifacts.clear();
    for (const DataTable& table : entry.outcome.tables)
      entry.outcome.artifacts.push_back(table_filename(entry.outcome.name, table));
    report.overall_pass = report.overall_pass && entry.outcome.pass;
  }
  report.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

}  // namespace

RunReport run(const RunConfig& config, const RunOptions& options) {
  if (config.scenarios.empty())
    throw ConfigError({"config: at least one scenario is required"});
  RunReport report = execute(config);
  if (options.write_files) write_outputs(report, resolve_output_dir(config, options));
  return report;
}

RunReport sweep(const RunConfig& config, const std::string& param,
                const std::vector<double>& values, const RunOptions& options) {
  if (config.scenarios.size() != 1)
    throw ConfigError({"sweep: the config must contain exactly one scenario, got " +
                       std::to_string(config.scenarios.size())});
  if (values.empty()) throw ConfigError({"sweep: at least one value is required"});

  const ScenarioSpec& base = config.scenarios.front();
  const std::vector<ParamDoc>& docs = scenario_parameters(base.kind);
  const auto doc = std::find_if(docs.begin(), docs.end(),
                                [&](const ParamDoc& d) { return d.name == param; });
  if (doc == docs.end())
    throw ConfigError({"sweep: '" + param + "' does not name a parameter of kind '" +
                       base.kind + "' (valid: " + known_parameters(base.kind) + ")"});

  RunConfig points = config;
  points.scenarios.clear();
  std::vector<std::string> errors;
  for (double value : values) {
    ScenarioSpec spec = base;
    if (doc->kind == ParamDoc::Kind::List) {
      spec.lists[param] = {value};
    } else {
      if (doc->kind == ParamDoc::Kind::Integer && value != std::floor(value)) {
        errors.push_back("sweep: " + param + " = " + fmt17(value) +
                         ": must be an integer");
        continue;
      }
      spec.numbers[param] = value;
    }
    const std::string base_name = base.name.empty() ? base.kind : base.name;
    spec.name = base_name + "_" + param + "_" + shortest_digits(value);
    try {
      validate_scenario_spec(spec);
    } catch (const std::exception& e) {
      errors.push_back("sweep: " + param + " = " + fmt17(value) + ": " + e.what());
      continue;
    }
    points.scenarios.push_back(std::move(spec));
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));

  RunReport report = execute(points);
  DataTable table;
  table.name = "sweep";
  table.columns = {param, "work", "power", "rhs_fluctuation", "rhs_commutator",
                   "saturation"};
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    const RunEntry& entry = report.entries[i];
    if (entry.crashed) continue;
    const BoundReport& rep = entry.outcome.bound_report;
    table.rows.push_back({values[i], rep.work, rep.power, rep.rhs_fluctuation,
                          rep.rhs_commutator, rep.saturation_fluctuation});
  }
  report.tables.push_back(std::move(table));
  if (options.write_files) write_outputs(report, resolve_output_dir(config, options));
  return report;
}

}  // namespace powerbound
