#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "powerbound/cli.hpp"
#include "powerbound/scenarios.hpp"

using namespace powerbound;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

const char* kTinyConfig = R"({
  "hbar": 1.0,
  "scenarios": [
    {"kind": "twin_oscillator", "name": "swap"},
    {"kind": "commuting_triviality", "name": "inert", "seed": 3}
  ]
})";

std::vector<std::string> error_items(const std::string& text) {
  try {
    parse_config(text, "test");
  } catch (const ConfigError& e) {
    return e.items();
  }
  REQUIRE_MESSAGE(false, "expected the config to be rejected");
  return {};
}

bool any_item_contains(const std::vector<std::string>& items, const std::string& needle) {
  for (const std::string& item : items)
    if (item.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("a minimal config parses with defaults and inheritance") {
  const RunConfig config = parse_config(R"({
    "hbar": 2.0,
    "emit_distributions": true,
    "output_dir": "somewhere",
    "workers": 3,
    "scenarios": [
      {"kind": "twin_oscillator"},
      {"kind": "qubit_saturation", "hbar": 1.0, "emit_distributions": false}
    ]
  })");
  CHECK(config.hbar == 2.0);
  CHECK(config.output_dir == "somewhere");
  CHECK(config.workers == 3);
  REQUIRE(config.scenarios.size() == 2);
  CHECK(config.scenarios[0].hbar == 2.0);                 // inherited
  CHECK(config.scenarios[0].emit_distributions == true);  // inherited
  CHECK(config.scenarios[0].name == "twin_oscillator");   // defaults to kind
  CHECK(config.scenarios[1].hbar == 1.0);                 // overridden
  CHECK(config.scenarios[1].emit_distributions == false);
}

TEST_CASE("parameters are typed and validated at parse time") {
  const RunConfig config = parse_config(R"({
    "scenarios": [
      {"kind": "twin_oscillator",
       "params": {"g": 2.0, "n_trunc": 3, "rho_weights": [0.0, 1.0]}}
    ]
  })");
  REQUIRE(config.scenarios.size() == 1);
  CHECK(config.scenarios[0].numbers.at("g") == 2.0);
  CHECK(config.scenarios[0].numbers.at("n_trunc") == 3.0);
  REQUIRE(config.scenarios[0].lists.count("rho_weights") == 1);
  CHECK(config.scenarios[0].lists.at("rho_weights") ==
        std::vector<double>{0.0, 1.0});
}

TEST_CASE("config rejection is itemized with json pointers and positions") {
  SUBCASE("unknown top-level key") {
    const auto items = error_items(R"({"scenarios": [{"kind": "twin_oscillator"}], "typo": 1})");
    CHECK(any_item_contains(items, "/typo"));
    CHECK(any_item_contains(items, "line 1"));
  }
  SUBCASE("unknown parameter lists the valid ones") {
    const auto items = error_items(R"({
      "scenarios": [{"kind": "twin_oscillator", "params": {"coupling": 1}}]
    })");
    CHECK(any_item_contains(items, "coupling"));
    CHECK(any_item_contains(items, "omega"));  // the valid names are offered
  }
  SUBCASE("integer parameters must be integral") {
    const auto items = error_items(R"({
      "scenarios": [{"kind": "twin_oscillator", "params": {"n_trunc": 2.5}}]
    })");
    CHECK(any_item_contains(items, "n_trunc"));
    CHECK(any_item_contains(items, "integer"));
  }
  SUBCASE("seeded kinds require a seed") {
    const auto items = error_items(R"({
      "scenarios": [{"kind": "random_clock_ensemble"}]
    })");
    CHECK(any_item_contains(items, "seed"));
  }
  SUBCASE("unseeded kinds reject a seed") {
    const auto items = error_items(R"({
      "scenarios": [{"kind": "twin_oscillator", "seed": 5}]
    })");
    CHECK(any_item_contains(items, "seed"));
  }
  SUBCASE("duplicate scenario names collide") {
    const auto items = error_items(R"({
      "scenarios": [
        {"kind": "twin_oscillator", "name": "x"},
        {"kind": "nonautonomous_control", "name": "x"}
      ]
    })");
    CHECK(any_item_contains(items, "duplicate"));
  }
  SUBCASE("empty scenario arrays are rejected") {
    const auto items = error_items(R"({"scenarios": []})");
    CHECK(any_item_contains(items, "scenarios"));
  }
  SUBCASE("unknown tolerance keys are rejected") {
    const auto items = error_items(R"({
      "scenarios": [{"kind": "twin_oscillator",
                     "tolerances": {"no_such_check": 1.0}}]
    })");
    CHECK(any_item_contains(items, "no_such_check"));
  }
  SUBCASE("global tolerances must apply somewhere") {
    const auto items = error_items(R"({
      "tolerances": {"distribution_mean_shift": 1.0},
      "scenarios": [{"kind": "twin_oscillator"}]
    })");
    CHECK(any_item_contains(items, "distribution_mean_shift"));
  }
  SUBCASE("syntax errors carry the parser position") {
    try {
      parse_config("{\"scenarios\": [\n  {\"kind\": }\n]}");
      CHECK(false);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
  }
}

TEST_CASE("global tolerances merge into the scenarios that carry the check") {
  const RunConfig config = parse_config(R"({
    "tolerances": {"work_closed_form": 0.5},
    "scenarios": [
      {"kind": "twin_oscillator"},
      {"kind": "twin_oscillator", "name": "strict",
       "tolerances": {"work_closed_form": 1e-12}}
    ]
  })");
  CHECK(config.scenarios[0].tolerances.at("work_closed_form") == 0.5);
  CHECK(config.scenarios[1].tolerances.at("work_closed_form") == 1e-12);
}

TEST_CASE("reports serialize canonically and deterministically") {
  RunConfig config = parse_config(kTinyConfig);
  RunOptions options;
  options.write_files = false;
  const RunReport first = run(config, options);
  CHECK(first.schema == std::string(kReportSchema));
  CHECK(first.overall_pass);
  REQUIRE(first.entries.size() == 2);
  CHECK(first.entries[0].outcome.name == "swap");
  CHECK(first.entries[1].outcome.name == "inert");
  CHECK_FALSE(first.entries[0].crashed);

  const std::string text = report_json(first);
  CHECK(canonical_json(text) == text);
  CHECK(text.find("\"schema\": \"powerbound-report/1\"") != std::string::npos);

  const RunReport second = run(config, options);
  CHECK(strip_timing_fields(report_json(second)) == strip_timing_fields(text));
  CHECK(exit_code(first) == 0);
}

TEST_CASE("failures drive the exit code and overall verdict") {
  RunConfig config = parse_config(R"({
    "scenarios": [
      {"kind": "twin_oscillator",
       "params": {"omega": 0.9, "g": 1.1, "tau": 0.7},
       "tolerances": {"work_closed_form": 0.0}}
    ]
  })");
  // Off the symmetric defaults the closed-form residual is roundoff-sized but
  // nonzero, so a zero tolerance must fail the check, the scenario, the run.
  RunOptions options;
  options.write_files = false;
  const RunReport report = run(config, options);
  CHECK_FALSE(report.overall_pass);
  CHECK(exit_code(report) == 1);
}

TEST_CASE("crashing scenarios become failed entries instead of aborting the run") {
  RunConfig config = parse_config(R"({
    "scenarios": [
      {"kind": "twin_oscillator", "name": "fine"},
      {"kind": "twin_oscillator", "name": "broken",
       "params": {"n_trunc": 2, "rho_weights": [0, 0, 0, 1]}}
    ]
  })");
  RunOptions options;
  options.write_files = false;
  const RunReport report = run(config, options);
  REQUIRE(report.entries.size() == 2);
  CHECK_FALSE(report.entries[0].crashed);
  CHECK(report.entries[1].crashed);
  CHECK_FALSE(report.entries[1].error.empty());
  CHECK_FALSE(report.overall_pass);
  CHECK(exit_code(report) == 1);
  const std::string text = report_json(report);
  CHECK(text.find("\"error\"") != std::string::npos);
}

TEST_CASE("run writes its artifacts under the resolved output directory") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "powerbound_cli_test_run";
  fs::remove_all(dir);

  RunConfig config = parse_config(R"({
    "output_dir": "ignored_because_overridden",
    "scenarios": [
      {"kind": "nonautonomous_control", "name": "drive"}
    ]
  })");
  RunOptions options;
  options.output_dir_override = dir.string();
  const RunReport report = run(config, options);
  CHECK(report.overall_pass);

  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "drive_power_scaling.csv"));
  const std::string written = slurp(dir / "report.json");
  CHECK(written == report_json(report));
  REQUIRE_FALSE(report.entries[0].outcome.artifacts.empty());
  CHECK(report.entries[0].outcome.artifacts.front() == "drive_power_scaling.csv");

  const std::string csv = slurp(dir / "drive_power_scaling.csv");
  CHECK(csv.rfind("g,tau,work,power,rhs_pb_f,rhs_pb_1\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("the environment variable supplies the output directory") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "powerbound_cli_test_env";
  fs::remove_all(dir);
  ::setenv(kOutputDirEnv, dir.c_str(), 1);

  RunConfig config = parse_config(R"({
    "output_dir": "should_lose_to_env",
    "scenarios": [{"kind": "twin_oscillator"}]
  })");
  const RunReport report = run(config);
  ::unsetenv(kOutputDirEnv);
  CHECK(report.overall_pass);
  CHECK(fs::exists(dir / "report.json"));
  CHECK_FALSE(fs::exists(fs::path("should_lose_to_env") / "report.json"));
  fs::remove_all(dir);
}

TEST_CASE("strip_timing_fields removes exactly the timing lines") {
  const std::string text =
      "{\n  \"total_seconds\": 0.25,\n  \"value\": 1,\n  \"seconds\": 3,\n  \"plain\": \"seconds\"\n}\n";
  const std::string stripped = strip_timing_fields(text);
  CHECK(stripped.find("total_seconds") == std::string::npos);
  CHECK(stripped.find("\"seconds\": 3") == std::string::npos);
  CHECK(stripped.find("\"value\": 1") != std::string::npos);
  CHECK(stripped.find("\"plain\": \"seconds\"") != std::string::npos);
}

TEST_CASE("csv serialization prints full-precision rows") {
  DataTable table;
  table.name = "t";
  table.columns = {"a", "b"};
  table.rows = {{1.0, 0.1}, {2.5, -3.0}};
  const std::string csv = csv_text(table);
  CHECK(csv ==
        "a,b\n1,0.10000000000000001\n2.5,-3\n");
}

TEST_CASE("sweep varies one parameter and tabulates the headline numbers") {
  RunConfig config = parse_config(R"({
    "scenarios": [
      {"kind": "qubit_saturation", "name": "qubit",
       "params": {"psi_points": 201, "profile_steps": 128}}
    ]
  })");
  RunOptions options;
  options.write_files = false;
  const RunReport report = sweep(config, "k_over_l", {0.5, 0.1}, options);
  REQUIRE(report.entries.size() == 2);
  CHECK(report.entries[0].outcome.name == "qubit_k_over_l_0.5");
  CHECK(report.entries[1].outcome.name == "qubit_k_over_l_0.1");
  REQUIRE(report.tables.size() == 1);
  const DataTable& table = report.tables.front();
  CHECK(table.name == "sweep");
  REQUIRE(table.columns.size() == 6);
  CHECK(table.columns[0] == "k_over_l");
  REQUIRE(table.rows.size() == 2);
  // Narrower windows saturate harder.
  const std::size_t sat = 5;
  CHECK(table.rows[1][sat] >= table.rows[0][sat]);

  // A one-point sweep reproduces the plain run's headline numbers.
  const RunReport plain = run(config, options);
  const RunReport point = sweep(config, "k_over_l", {0.01}, options);
  CHECK(point.entries[0].outcome.bound_report.work ==
        plain.entries[0].outcome.bound_report.work);
  CHECK(point.entries[0].outcome.bound_report.saturation_fluctuation ==
        plain.entries[0].outcome.bound_report.saturation_fluctuation);
}

TEST_CASE("sweep rejects unknown parameters and multi-scenario configs") {
  RunConfig config = parse_config(R"({
    "scenarios": [{"kind": "qubit_saturation"}]
  })");
  CHECK_THROWS_AS((void)sweep(config, "does_not_exist", {1.0}), ConfigError);
  CHECK_THROWS_AS((void)sweep(config, "k_over_l", {}), ConfigError);

  RunConfig two = parse_config(kTinyConfig);
  CHECK_THROWS_AS((void)sweep(two, "g", {1.0}), ConfigError);
}

TEST_CASE("sweeping a list parameter wraps each value") {
  RunConfig config = parse_config(R"({
    "scenarios": [{"kind": "nonautonomous_control", "name": "drive"}]
  })");
  RunOptions options;
  options.write_files = false;
  const RunReport report = sweep(config, "g_list", {2.0, 4.0}, options);
  REQUIRE(report.entries.size() == 2);
  CHECK(report.entries[0].outcome.pass);
  // One coupling per point: the scaling table has a single row.
  REQUIRE(report.entries[0].outcome.tables.size() == 1);
  CHECK(report.entries[0].outcome.tables.front().rows.size() == 1);
}

TEST_CASE("load_config reports missing files as config errors") {
  CHECK_THROWS_AS((void)load_config("/nonexistent/path/config.json"), ConfigError);
}

}  // TEST_SUITE
