#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "powerbound/cli.hpp"

namespace {

constexpr int kConfigErrorExit = 2;

void print_config_error(const powerbound::ConfigError& error) {
  std::fprintf(stderr, "config error:\n");
  for (const std::string& item : error.items())
    std::fprintf(stderr, "  %s\n", item.c_str());
}

void print_summary(const powerbound::RunReport& report, const std::string& dir) {
  for (const powerbound::RunEntry& entry : report.entries) {
    const char* verdict = entry.outcome.pass ? "pass" : "FAIL";
    if (entry.crashed) {
      std::printf("[%s] %-32s error: %s\n", verdict,
                  entry.outcome.name.c_str(), entry.error.c_str());
      continue;
    }
    const powerbound::BoundReport& rep = entry.outcome.bound_report;
    std::printf("[%s] %-32s W = %- .6g  P = %- .6g  saturation = %.6g%s\n",
                verdict, entry.outcome.name.c_str(), rep.work, rep.power,
                rep.saturation_fluctuation,
                rep.violation_expected ? "  (expected violation)" : "");
  }
  std::printf("%s: %zu scenario(s), %.2f s, report written to %s/report.json\n",
              report.overall_pass ? "pass" : "FAIL", report.entries.size(),
              report.total_seconds, dir.c_str());
}

std::string effective_dir(const powerbound::RunConfig& config,
                          const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(powerbound::kOutputDirEnv); env && *env)
    return env;
  return config.output_dir;
}

void list_scenarios() {
  for (const std::string& kind : powerbound::scenario_kinds()) {
    std::printf("%s%s\n", kind.c_str(),
                powerbound::scenario_needs_seed(kind) ? "  (requires a seed)" : "");
    for (const powerbound::ParamDoc& doc : powerbound::scenario_parameters(kind)) {
      const char* type = doc.kind == powerbound::ParamDoc::Kind::Number ? "number"
                         : doc.kind == powerbound::ParamDoc::Kind::Integer
                             ? "integer"
                             : "list";
      std::printf("  %-16s %-8s default %-14s %s\n", doc.name.c_str(), type,
                  doc.fallback.c_str(), doc.help.c_str());
    }
    std::string checks;
    for (const std::string& name : powerbound::scenario_check_names(kind)) {
      if (!checks.empty()) checks += ", ";
      checks += name;
    }
    std::printf("  checks: %s\n\n", checks.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"powerbound: certify quantum machines against the power bounds"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  int workers = 0;

  CLI::App* cmd_run = app.add_subcommand("run", "execute every scenario in a config");
  cmd_run->add_option("config", config_path, "config file (JSON)")->required();
  cmd_run->add_option("--output-dir", output_dir,
                      "output directory (overrides config and environment)");
  cmd_run->add_option("--workers", workers, "worker thread count");

  std::string sweep_param;
  std::vector<double> sweep_values;
  CLI::App* cmd_sweep = app.add_subcommand(
      "sweep", "rerun a single-scenario config across parameter values");
  cmd_sweep->add_option("config", config_path, "config file (JSON)")->required();
  cmd_sweep->add_option("--param", sweep_param, "parameter name to sweep")
      ->required();
  cmd_sweep
      ->add_option("--values", sweep_values, "comma-separated parameter values")
      ->required()
      ->delimiter(',');
  cmd_sweep->add_option("--output-dir", output_dir,
                        "output directory (overrides config and environment)");

  CLI::App* cmd_list =
      app.add_subcommand("list-scenarios", "describe every scenario kind");

  CLI::App* cmd_validate =
      app.add_subcommand("validate", "check a config without running it");
  cmd_validate->add_option("config", config_path, "config file (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_list->parsed()) {
      list_scenarios();
      return 0;
    }
    if (cmd_validate->parsed()) {
      const powerbound::RunConfig config = powerbound::load_config(config_path);
      std::printf("ok: %zu scenario(s)\n", config.scenarios.size());
      return 0;
    }
    if (cmd_run->parsed()) {
      powerbound::RunConfig config = powerbound::load_config(config_path);
      if (workers > 0) config.workers = workers;
      powerbound::RunOptions options;
      options.output_dir_override = output_dir;
      const powerbound::RunReport report = powerbound::run(config, options);
      print_summary(report, effective_dir(config, output_dir));
      return powerbound::exit_code(report);
    }
    // sweep
    const powerbound::RunConfig config = powerbound::load_config(config_path);
    powerbound::RunOptions options;
    options.output_dir_override = output_dir;
    const powerbound::RunReport report =
        powerbound::sweep(config, sweep_param, sweep_values, options);
    print_summary(report, effective_dir(config, output_dir));
    return powerbound::exit_code(report);
  } catch (const powerbound::ConfigError& e) {
    print_config_error(e);
    return kConfigErrorExit;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigErrorExit;
  }
}
