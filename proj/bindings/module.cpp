// Python bindings for the high-level entry points: scenario execution,
// config-driven runs, direct model verification, and the clock-packet
// helpers. Reports come back as plain dicts / JSON text so callers can
// feed them to json, pandas, or asserts without wrapper classes.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <exception>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "powerbound/bounds.hpp"
#include "powerbound/cli.hpp"
#include "powerbound/clockwork.hpp"
#include "powerbound/machine.hpp"
#include "powerbound/operators.hpp"
#include "powerbound/scenarios.hpp"

namespace py = pybind11;

namespace powerbound {
namespace {

py::dict to_dict(const BoundReport& rep) {
  py::dict d;
  d["work"] = rep.work;
  d["power"] = rep.power;
  d["tau"] = rep.tau;
  d["hbar"] = rep.hbar;
  d["h_s_norm"] = rep.h_s_norm;
  d["delta_h_a"] = rep.delta_h_a;
  d["comm_norm"] = rep.comm_norm;
  d["rhs_fluctuation"] = rep.rhs_fluctuation;
  d["rhs_commutator"] = rep.rhs_commutator;
  d["saturation_fluctuation"] = rep.saturation_fluctuation;
  d["saturation_commutator"] = rep.saturation_commutator;
  d["timescale_estimate"] = rep.timescale_estimate;
  d["tolerance"] = rep.tolerance;
  d["condition1_ok"] = rep.condition1_ok;
  d["bound_violated"] = rep.bound_violated;
  d["violation_expected"] = rep.violation_expected;
  d["pass"] = rep.pass;
  d["note"] = rep.note;
  return d;
}

py::dict to_dict(const CheckReport& check) {
  py::dict d;
  d["name"] = check.name;
  d["pass"] = check.pass;
  d["residual"] = check.residual;
  d["tolerance"] = check.tolerance;
  d["detail"] = check.detail;
  py::dict values;
  for (const auto& [key, value] : check.values) values[py::str(key)] = value;
  d["values"] = values;
  return d;
}

py::dict to_dict(const DataTable& table) {
  py::dict d;
  d["name"] = table.name;
  d["columns"] = table.columns;
  d["rows"] = table.rows;
  return d;
}

py::dict to_dict(const ScenarioOutcome& outcome) {
  py::dict d;
  d["kind"] = outcome.kind;
  d["name"] = outcome.name;
  d["pass"] = outcome.pass;
  d["autonomous"] = outcome.autonomous;
  d["note"] = outcome.note;
  d["bound_report"] = to_dict(outcome.bound_report);
  py::list checks;
  for (const CheckReport& check : outcome.checks) checks.append(to_dict(check));
  d["checks"] = checks;
  py::list tables;
  for (const DataTable& table : outcome.tables) tables.append(to_dict(table));
  d["tables"] = tables;
  return d;
}

const char* kind_name(ParamDoc::Kind kind) {
  switch (kind) {
    case ParamDoc::Kind::Integer:
      return "integer";
    case ParamDoc::Kind::List:
      return "list";
    default:
      return "number";
  }
}

py::list list_scenarios_py() {
  py::list out;
  for (const std::string& kind : scenario_kinds()) {
    py::dict d;
    d["kind"] = kind;
    d["needs_seed"] = scenario_needs_seed(kind);
    d["checks"] = scenario_check_names(kind);
    py::list params;
    for (const ParamDoc& doc : scenario_parameters(kind)) {
      py::dict p;
      p["name"] = doc.name;
      p["type"] = kind_name(doc.kind);
      p["default"] = doc.fallback;
      p["help"] = doc.help;
      params.append(p);
    }
    d["parameters"] = params;
    out.append(d);
  }
  return out;
}

py::dict run_scenario_py(const std::string& kind, const std::string& name,
                         double hbar, bool emit_distributions,
                         const py::object& seed, const py::object& params,
                         const py::object& tolerances) {
  ScenarioSpec spec;
  spec.kind = kind;
  spec.name = name.empty() ? kind : name;
  spec.hbar = hbar;
  spec.emit_distributions = emit_distributions;
  if (!seed.is_none()) {
    spec.has_seed = true;
    spec.seed = seed.cast<std::uint64_t>();
  }
  if (!params.is_none()) {
    for (const auto& item : params.cast<py::dict>()) {
      const std::string key = item.first.cast<std::string>();
      // A scalar sets a number parameter, a sequence a list parameter.
      try {
        spec.numbers[key] = item.second.cast<double>();
      } catch (const py::cast_error&) {
        spec.lists[key] = item.second.cast<std::vector<double>>();
      }
    }
  }
  if (!tolerances.is_none())
    spec.tolerances = tolerances.cast<std::map<std::string, double>>();
  validate_scenario_spec(spec);
  ScenarioOutcome outcome;
  {
    py::gil_scoped_release release;
    outcome = run_scenario(spec);
  }
  return to_dict(outcome);
}

std::string run_config_py(const std::string& text) {
  const RunConfig config = parse_config(text, "config");
  RunOptions options;
  options.write_files = false;
  RunReport report;
  {
    py::gil_scoped_release release;
    report = run(config, options);
  }
  return report_json(report);
}

std::string sweep_config_py(const std::string& text, const std::string& param,
                            const std::vector<double>& values) {
  const RunConfig config = parse_config(text, "config");
  RunOptions options;
  options.write_files = false;
  RunReport report;
  {
    py::gil_scoped_release release;
    report = sweep(config, param, values, options);
  }
  return report_json(report);
}

py::dict verify_model_py(const Matrix& h_s, const Matrix& h_a, const Matrix& v,
                         const Matrix& rho_s, const Matrix& sigma_a, double tau,
                         double hbar) {
  BipartiteModel model(Operator(h_s), Operator(h_a),
                       Operator(v, {h_s.rows(), h_a.rows()}),
                       DensityMatrix(rho_s), DensityMatrix(sigma_a), tau, hbar);
  BoundReport report;
  {
    py::gil_scoped_release release;
    report = verify(model);
  }
  return to_dict(report);
}

double bound_fluctuation_py(const Matrix& h_s, const Matrix& h_a,
                            const Matrix& sigma_a, double hbar) {
  return bound_fluctuation(Operator(h_s), Operator(h_a), DensityMatrix(sigma_a),
                           hbar);
}

double bound_commutator_py(const Matrix& h_s, const Matrix& h_a,
                           const Matrix& sigma_a, double hbar) {
  return bound_commutator(Operator(h_s), Operator(h_a), DensityMatrix(sigma_a),
                          hbar);
}

double detectability_timescale_py(const Matrix& h_s, double hbar) {
  return detectability_timescale(Operator(h_s), hbar);
}

py::tuple packet_arrays(const ClockWavefunction& psi) {
  RealVector x(psi.points());
  for (int j = 0; j < psi.points(); ++j) x[j] = psi.x(j);
  return py::make_tuple(std::move(x), psi.amplitudes);
}

py::tuple momentum_moments_py(double left, double right,
                              const Vector& amplitudes, double hbar) {
  ClockWavefunction psi;
  psi.left = left;
  psi.right = right;
  psi.amplitudes = amplitudes;
  const MomentumMoments moments = clock_momentum_moments(psi, hbar);
  return py::make_tuple(moments.mean, moments.second);
}

}  // namespace
}  // namespace powerbound

PYBIND11_MODULE(_powerbound, m) {
  using namespace powerbound;

  m.doc() =
      "Work and power bounds for autonomous quantum machines: scenario "
      "runners, config-driven reports, and direct model verification.";

  m.attr("REPORT_SCHEMA") = kReportSchema;
  m.attr("OUTPUT_DIR_ENV") = kOutputDirEnv;

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      std::string message;
      for (const std::string& item : e.items()) {
        if (!message.empty()) message += "\n";
        message += item;
      }
      PyErr_SetString(PyExc_ValueError, message.c_str());
    }
  });

  m.def("list_scenarios", &list_scenarios_py,
        "Catalogue of scenario kinds with their parameters, check names, and "
        "whether a seed is required.");

  m.def("run_scenario", &run_scenario_py, py::arg("kind"), py::kw_only(),
        py::arg("name") = "", py::arg("hbar") = 1.0,
        py::arg("emit_distributions") = false, py::arg("seed") = py::none(),
        py::arg("params") = py::none(), py::arg("tolerances") = py::none(),
        "Run one scenario and return its outcome as a dict. `params` maps "
        "parameter names to numbers or lists of numbers; `tolerances` maps "
        "check names to override values.");

  m.def("run_config", &run_config_py, py::arg("text"),
        "Run every scenario in a JSON config document and return the report "
        "as JSON text. No files are written.");

  m.def("sweep_config", &sweep_config_py, py::arg("text"), py::arg("param"),
        py::arg("values"),
        "Rerun the single scenario in the config once per value of `param` "
        "and return the combined report as JSON text. No files are written.");

  m.def("verify_model", &verify_model_py, py::arg("h_s"), py::arg("h_a"),
        py::arg("v"), py::arg("rho_s"), py::arg("sigma_a"), py::arg("tau"),
        py::arg("hbar") = 1.0,
        "Evolve the bipartite model over one interaction window and check "
        "the power bounds. `v` acts on the product space (dim of h_s times "
        "dim of h_a); states enter as density matrices.");

  m.def("bound_fluctuation", &bound_fluctuation_py, py::arg("h_s"),
        py::arg("h_a"), py::arg("sigma_a"), py::arg("hbar") = 1.0,
        "Power ceiling 2 ||h_s|| dH_A / hbar from the agent's energy spread.");

  m.def("bound_commutator", &bound_commutator_py, py::arg("h_s"),
        py::arg("h_a"), py::arg("sigma_a"), py::arg("hbar") = 1.0,
        "Power ceiling ||h_s|| ||[h_a, sigma_a]||_1 / hbar; never exceeds "
        "the fluctuation ceiling.");

  m.def("detectability_timescale", &detectability_timescale_py,
        py::arg("h_s"), py::arg("hbar") = 1.0,
        "hbar / (2 ||h_s||): the shortest time over which the system can "
        "register a change.");

  m.def(
      "optimal_wavefunction",
      [](double l, int n) { return packet_arrays(optimal_wavefunction(l, n)); },
      py::arg("l"), py::arg("n"),
      "Minimum-energy-spread clock packet sqrt(2/L) sin(-pi x/L) on [-L, 0], "
      "sampled on n grid points. Returns (x, amplitudes).");

  m.def(
      "variational_minimize",
      [](double l, int n) { return packet_arrays(variational_minimize(l, n)); },
      py::arg("l"), py::arg("n"),
      "Ground state of the discrete Dirichlet kinetic operator on [-L, 0]. "
      "Returns (x, amplitudes).");

  m.def("clock_momentum_moments", &momentum_moments_py, py::arg("left"),
        py::arg("right"), py::arg("amplitudes"), py::arg("hbar") = 1.0,
        "First and second moments of -i hbar d/dx for amplitudes sampled on "
        "the uniform grid over [left, right]. Returns (mean, second).");

  m.def(
      "trace_norm", [](const Matrix& m_in) { return trace_norm(m_in); },
      py::arg("m"), "Sum of singular values.");

  m.def(
      "operator_norm", [](const Matrix& m_in) { return operator_norm(m_in); },
      py::arg("m"), "Largest singular value.");
}
