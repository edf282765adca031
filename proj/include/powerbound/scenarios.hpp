#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "powerbound/bounds.hpp"
#include "powerbound/clockwork.hpp"
#include "powerbound/machine.hpp"

namespace powerbound {

/// One scenario request as it arrives from a config file: a kind tag plus
/// kind-specific numeric parameters. Unknown parameter keys are rejected.
struct ScenarioSpec {
  std::string kind;
  std::string name;  ///< report label; defaults to kind
  double hbar = 1.0;
  bool emit_distributions = false;
  bool has_seed = false;
  std::uint64_t seed = 0;
  std::map<std::string, double> numbers;
  std::map<std::string, std::vector<double>> lists;
  /// Per-check tolerance overrides, keyed by check name. A check overridden
  /// here passes iff residual <= tolerance. The reserved key
  /// "bound_inequality" instead re-assesses the bound report's inequality
  /// slack. Unknown keys are rejected at validation time.
  std::map<std::string, double> tolerances;
};

/// Parameter documentation, used for strict config validation and the
/// list-scenarios output.
struct ParamDoc {
  enum class Kind { Number, Integer, List };
  std::string name;
  Kind kind = Kind::Number;
  std::string fallback;  ///< human-readable default
  std::string help;
};

const std::vector<std::string>& scenario_kinds();
const std::vector<ParamDoc>& scenario_parameters(const std::string& kind);
bool scenario_needs_seed(const std::string& kind);
/// Names of the checks a scenario of this kind reports (the valid keys for
/// ScenarioSpec::tolerances besides "bound_inequality").
const std::vector<std::string>& scenario_check_names(const std::string& kind);

/// Plain numeric table; the runner serializes these as CSV artifacts.
struct DataTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ScenarioOutcome {
  std::string kind;
  std::string name;
  bool autonomous = true;  ///< switch-on condition satisfied by design
  BoundReport bound_report;
  std::vector<CheckReport> checks;
  std::vector<DataTable> tables;
  std::vector<std::string> artifacts;  ///< file names, filled by the writer
  bool pass = true;
  std::string note;
};

/// Resonant pair of truncated oscillators exchanging one excitation through
/// a^dag b + a b^dag, with the coupling externally active during [0, tau].
struct TwinOscillatorParams {
  double omega = 1.0;
  double g = 1.0;
  double tau = -1.0;  ///< <= 0 picks the full-swap time pi hbar / (2g)
  int n_trunc = 0;    ///< 0: total initial excitation + 1
  std::vector<double> rho_weights{0.0, 1.0};  ///< Fock-diagonal system weights
  std::vector<double> sigma_weights{1.0};     ///< Fock-diagonal storage weights
  double hbar = 1.0;
};

BipartiteModel make_twin_oscillator_model(const TwinOscillatorParams& p);
/// (<H_S> - <H_W>) (1 - cos(2 g tau / hbar)) / 2 for Fock-diagonal states.
double twin_oscillator_work_formula(const TwinOscillatorParams& p, double tau);
ScenarioOutcome twin_oscillator(const TwinOscillatorParams& p);

/// The unbounded-power counterexample: ground-state work storage (zero energy
/// fluctuation) with the swap rerun at increasing coupling.
struct NonautonomousControlParams {
  double omega = 1.0;
  std::vector<double> g_list{1.0, 2.0, 4.0, 8.0};
  std::vector<double> rho_weights{0.0, 1.0};
  double hbar = 1.0;
};

ScenarioOutcome nonautonomous_control(const NonautonomousControlParams& p);

/// Qubit flipped by an ideal clock: H_S = diag(-c, c), excited initial state,
/// sine packet on [-l, 0] sweeping a profile of width k_over_l * l that
/// integrates to a bit flip.
struct QubitSaturationParams {
  double c = 1.0;
  double l = 1.0;
  double k_over_l = 0.01;
  int psi_points = 2001;
  int profile_steps = 4096;
  int lattice_steps = 96;  ///< sweep resolution for emitted distributions
  bool emit_distributions = false;
  double hbar = 1.0;
};

ClockMachineSpec make_qubit_clock_spec(const QubitSaturationParams& p);
ScenarioOutcome qubit_saturation(const QubitSaturationParams& p);

/// Randomized clock machines: GUE system Hamiltonians, Haar target unitaries,
/// random smooth packets (occasionally two-packet mixtures), certified one by
/// one and aggregated.
struct RandomClockParams {
  int n_models = 20;
  int dim_min = 2;
  int dim_max = 6;
  double l_min = 0.5;
  double l_max = 2.0;
  double k_frac_min = 0.05;
  double k_frac_max = 0.3;
  double nu_min = 0.5;
  double nu_max = 2.0;
  double mixture_fraction = 0.25;
  int psi_points = 513;
  int profile_steps = 256;
  double hbar = 1.0;
  std::uint64_t seed = 1;
};

/// Deterministic single draw (used by the ensemble, the QSL-chain tests and
/// the lattice cross-checks).
ClockMachineSpec random_clock_spec(std::uint64_t model_seed, const RandomClockParams& p);
ScenarioOutcome random_clock_ensemble(const RandomClockParams& p);

/// Interaction commuting with the free Hamiltonian while the switch-on
/// condition holds: the evolution must stay factorized and move no energy.
/// A deliberately broken perturbation of the same interaction serves as the
/// sensitivity control.
struct CommutingTrivialityParams {
  int sites = 33;       ///< agent lattice sites (odd)
  double dx = 0.25;     ///< lattice spacing
  double coupling = 1.0;
  double tau = 1.0;
  double epsilon = 0.3;  ///< strength of the symmetry-breaking perturbation
  double hbar = 1.0;
  std::uint64_t seed = 1;
};

ScenarioOutcome commuting_triviality(const CommutingTrivialityParams& p);

/// Truncated Fock-space ladder operator (annihilation) and number operator.
Matrix ladder_lowering(Index dim);
Matrix number_matrix(Index dim);

/// Throws std::invalid_argument on unknown kind, unknown or missing
/// parameters, or out-of-range values. Cheap: does not run the scenario.
void validate_scenario_spec(const ScenarioSpec& spec);

/// Validates and executes. Exceptions from execution propagate; the runner
/// converts them into per-scenario failure entries.
ScenarioOutcome run_scenario(const ScenarioSpec& spec);

}  // namespace powerbound
