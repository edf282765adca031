#include "powerbound/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "powerbound/random.hpp"

namespace powerbound {

namespace {

constexpr double kPi = std::numbers::pi;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

void require(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

DensityMatrix fock_diagonal(const std::vector<double>& weights, Index dim,
                            const char* what) {
  require(!weights.empty(), std::string(what) + ": empty weight list");
  require(static_cast<Index>(weights.size()) <= dim,
          std::string(what) + ": weight list exceeds the truncation");
  double total = 0.0;
  for (double w : weights) {
    require(w >= 0.0, std::string(what) + ": negative Fock weight");
    total += w;
  }
  require(total > 0.0, std::string(what) + ": all Fock weights vanish");
  Matrix rho = Matrix::Zero(dim, dim);
  for (std::size_t n = 0; n < weights.size(); ++n)
    rho(static_cast<Index>(n), static_cast<Index>(n)) = weights[n] / total;
  return DensityMatrix(std::move(rho), {dim});
}

double mean_excitation(const std::vector<double>& weights) {
  double total = 0.0, first = 0.0;
  for (std::size_t n = 0; n < weights.size(); ++n) {
    total += weights[n];
    first += static_cast<double>(n) * weights[n];
  }
  return first / total;
}

int highest_occupied(const std::vector<double>& weights) {
  int top = 0;
  for (std::size_t n = 0; n < weights.size(); ++n)
    if (weights[n] > 0.0) top = static_cast<int>(n);
  return top;
}

}  // namespace

Matrix ladder_lowering(Index dim) {
  Matrix a = Matrix::Zero(dim, dim);
  for (Index n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Matrix number_matrix(Index dim) {
  Matrix n = Matrix::Zero(dim, dim);
  for (Index k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

// ---------------------------------------------------------------------------
// Twin oscillators
// ---------------------------------------------------------------------------

BipartiteModel make_twin_oscillator_model(const TwinOscillatorParams& p) {
  require(p.omega > 0.0 && p.g > 0.0 && p.hbar > 0.0,
          "twin_oscillator: omega, g and hbar must be positive");
  const int excitation =
      highest_occupied(p.rho_weights) + highest_occupied(p.sigma_weights);
  const Index dim = p.n_trunc > 0 ? p.n_trunc : excitation + 1;
  require(dim >= excitation + 1,
          "twin_oscillator: truncation overflow (n_trunc must exceed the total "
          "initial excitation)");

  const Matrix a = ladder_lowering(dim);
  const Matrix num = number_matrix(dim);
  Operator h_s(Matrix(p.hbar * p.omega * num), {dim});
  Operator h_w(Matrix(p.hbar * p.omega * num), {dim});
  const Operator v =
      tensor(Operator(Matrix(a.adjoint()), {dim}), Operator(a, {dim}));
  Operator coupling(Matrix(p.g * (v.entries() + v.entries().adjoint())),
                    {dim, dim});

  const double tau = p.tau > 0.0 ? p.tau : kPi * p.hbar / (2.0 * p.g);
  return BipartiteModel(std::move(h_s), std::move(h_w), std::move(coupling),
                        fock_diagonal(p.rho_weights, dim, "twin_oscillator rho"),
                        fock_diagonal(p.sigma_weights, dim, "twin_oscillator sigma"),
                        tau, p.hbar);
}

double twin_oscillator_work_formula(const TwinOscillatorParams& p, double tau) {
  const double gap = p.hbar * p.omega *
                     (mean_excitation(p.rho_weights) - mean_excitation(p.sigma_weights));
  return gap * (1.0 - std::cos(2.0 * p.g * tau / p.hbar)) / 2.0;
}

namespace {

// <N_tot> drift and the sector-restricted [N_tot, H] norm; truncation is
// exact iff both vanish.
void add_excitation_checks(const BipartiteModel& model, int excitation,
                           std::vector<CheckReport>& checks) {
  const Index dim = model.system_dim();
  const Operator n_tot =
      Operator(Matrix(tensor(Operator(number_matrix(dim), {dim}),
                             Operator(identity_matrix(dim), {dim}))
                          .entries() +
                      tensor(Operator(identity_matrix(dim), {dim}),
                             Operator(number_matrix(dim), {dim}))
                          .entries()),
               {dim, dim});

  const DensityMatrix initial = tensor(model.rho_s(), model.sigma_a());
  const EvolutionResult evolved = evolve_total(model, model.tau());
  CheckReport drift;
  drift.name = "excitation_conservation";
  drift.tolerance = 1e-12;
  drift.residual =
      std::abs(expectation(n_tot, evolved.theta) - expectation(n_tot, initial));
  drift.pass = drift.residual <= drift.tolerance;
  drift.detail = "total number-operator expectation before vs after the swap";
  checks.push_back(std::move(drift));

  // Project [N_tot, H] onto the dynamically reachable sector (total
  // excitation <= initial): the commutator must annihilate it.
  Matrix sector = Matrix::Zero(dim * dim, dim * dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j)
      if (i + j <= excitation) sector(i * dim + j, i * dim + j) = 1.0;
  const Matrix comm = commutator(n_tot, model.h_total()).entries();
  CheckReport structural;
  structural.name = "number_commutator_on_sector";
  structural.tolerance = 1e-12;
  structural.residual = (comm * sector).norm();
  structural.pass = structural.residual <= structural.tolerance;
  structural.detail =
      "Frobenius norm of [a^dag a + b^dag b, H] restricted to the reachable sector";
  checks.push_back(std::move(structural));
}

}  // namespace

ScenarioOutcome twin_oscillator(const TwinOscillatorParams& p) {
  const BipartiteModel model = make_twin_oscillator_model(p);
  ScenarioOutcome out;
  out.kind = "twin_oscillator";
  out.name = out.kind;
  out.autonomous = false;
  out.note = "externally switched exchange coupling; designed to fail the switch-on condition";
  out.bound_report = verify(model);

  CheckReport closed;
  closed.name = "work_closed_form";
  closed.tolerance = 1e-10;
  const double w_exact = twin_oscillator_work_formula(p, model.tau());
  closed.residual = std::abs(out.bound_report.work - w_exact);
  closed.pass = closed.residual <= closed.tolerance;
  closed.record("work_simulated", out.bound_report.work);
  closed.record("work_closed_form", w_exact);
  out.checks.push_back(std::move(closed));

  add_excitation_checks(model, highest_occupied(p.rho_weights) +
                                   highest_occupied(p.sigma_weights),
                        out.checks);

  {
    TwinOscillatorParams tiny = p;
    tiny.tau = 1e-7;
    const BipartiteModel short_model = make_twin_oscillator_model(tiny);
    CheckReport zero;
    zero.name = "zero_time_limit";
    zero.tolerance = 1e-10;
    zero.residual = std::abs(mean_work(short_model));
    zero.pass = zero.residual <= zero.tolerance;
    zero.detail = "W(tau -> 0) vanishes";
    out.checks.push_back(std::move(zero));
  }

  DataTable table;
  table.name = "work_vs_time";
  table.columns = {"tau", "work", "work_closed_form"};
  const double period = kPi * p.hbar / p.g;
  const double e0 = expectation(model.h_s(), model.rho_s());
  for (int i = 0; i <= 20; ++i) {
    const double t = period * i / 20.0;
    const EvolutionResult r = evolve_total(model, t);
    const double w = e0 - expectation(model.h_s(), r.rho_s_final);
    table.rows.push_back({t, w, twin_oscillator_work_formula(p, t)});
  }
  out.tables.push_back(std::move(table));

  out.pass = out.bound_report.pass;
  for (const CheckReport& c : out.checks) out.pass = out.pass && c.pass;
  return out;
}

// ---------------------------------------------------------------------------
// Non-autonomous control
// ---------------------------------------------------------------------------

ScenarioOutcome nonautonomous_control(const NonautonomousControlParams& p) {
  require(!p.g_list.empty(), "nonautonomous_control: empty g list");
  require(mean_excitation(p.rho_weights) > 0.0,
          "nonautonomous_control: system must start excited (mean excitation > 0)");

  ScenarioOutcome out;
  out.kind = "nonautonomous_control";
  out.name = out.kind;
  out.autonomous = false;
  out.note =
      "ground-state work storage with externally switched coupling: power grows "
      "with g while the fluctuation bound right-hand side stays zero";

  DataTable table;
  table.name = "power_scaling";
  table.columns = {"g", "tau", "work", "power", "rhs_pb_f", "rhs_pb_1"};

  const double delta_n = mean_excitation(p.rho_weights);
  double worst_power = 0.0, worst_rhs = 0.0;
  bool cond1_all_fail = true, violations_all_flagged = true;
  for (double g : p.g_list) {
    require(g > 0.0, "nonautonomous_control: couplings must be positive");
    TwinOscillatorParams tp;
    tp.omega = p.omega;
    tp.g = g;
    tp.rho_weights = p.rho_weights;
    tp.sigma_weights = {1.0};  // ground state, zero energy fluctuation
    tp.hbar = p.hbar;
    const BipartiteModel model = make_twin_oscillator_model(tp);
    const BoundReport rep = verify(model);
    table.rows.push_back(
        {g, rep.tau, rep.work, rep.power, rep.rhs_fluctuation, rep.rhs_commutator});
    worst_power = std::max(
        worst_power, std::abs(rep.power - 2.0 * g * p.omega * delta_n / kPi));
    worst_rhs = std::max(worst_rhs, rep.rhs_fluctuation);
    cond1_all_fail = cond1_all_fail && !rep.condition1_ok;
    violations_all_flagged = violations_all_flagged && rep.violation_expected;
    out.bound_report = rep;  // keep the largest-g run as the headline report
  }

  CheckReport scaling;
  scaling.name = "power_matches_2g_omega_over_pi";
  scaling.tolerance = 1e-9 * std::max(1.0, 2.0 * p.g_list.back() * p.omega * delta_n / kPi);
  scaling.residual = worst_power;
  scaling.pass = scaling.residual <= scaling.tolerance;
  scaling.detail = "P = 2 g omega <n> / pi at the full-swap time, for every g";
  out.checks.push_back(std::move(scaling));

  CheckReport flat;
  flat.name = "fluctuation_rhs_zero";
  flat.tolerance = 1e-12;
  flat.residual = worst_rhs;
  flat.pass = flat.residual <= flat.tolerance;
  flat.detail = "ground-state work storage has zero energy fluctuation";
  out.checks.push_back(std::move(flat));

  CheckReport cond;
  cond.name = "condition1_fails_as_designed";
  cond.tolerance = 0.0;
  cond.residual = cond1_all_fail ? 0.0 : 1.0;
  cond.pass = cond1_all_fail;
  out.checks.push_back(std::move(cond));

  CheckReport flagged;
  flagged.name = "violation_expected_flagged";
  flagged.tolerance = 0.0;
  flagged.residual = violations_all_flagged ? 0.0 : 1.0;
  flagged.pass = violations_all_flagged;
  out.checks.push_back(std::move(flagged));

  out.tables.push_back(std::move(table));
  out.pass = out.bound_report.pass;
  for (const CheckReport& c : out.checks) out.pass = out.pass && c.pass;
  return out;
}

// ---------------------------------------------------------------------------
// Qubit saturation
// ---------------------------------------------------------------------------

ClockMachineSpec make_qubit_clock_spec(const QubitSaturationParams& p) {
  require(p.c > 0.0 && p.l > 0.0 && p.hbar > 0.0,
          "qubit_saturation: c, l and hbar must be positive");
  require(p.k_over_l > 0.0 && p.k_over_l <= 1.0,
          "qubit_saturation: k_over_l must lie in (0, 1]");
  require(p.psi_points >= 101 && p.psi_points % 2 == 1,
          "qubit_saturation: psi_points must be odd and at least 101");
  require(p.profile_steps >= 16, "qubit_saturation: profile_steps must be at least 16");

  Matrix hs(2, 2);
  hs << -p.c, 0.0, 0.0, p.c;
  Matrix rho = Matrix::Zero(2, 2);
  rho(1, 1) = 1.0;  // excited eigenstate, energy +c

  const double k = p.k_over_l * p.l;
  Operator h_s(std::move(hs), {2});
  InteractionProfile profile = build_vs_from_unitary(
      UnitaryOperator(pauli_x(), {2}),
      [k](double s) { return raised_cosine_bump(s, 0.0, k); }, 0.0, k,
      p.profile_steps, h_s, p.hbar, 1.0);
  std::vector<WeightedWavefunction> ensemble;
  ensemble.push_back({1.0, optimal_wavefunction(p.l, p.psi_points)});
  return ClockMachineSpec{std::move(h_s), DensityMatrix(std::move(rho), {2}),
                          std::move(profile), std::move(ensemble), 1.0, p.hbar};
}

ScenarioOutcome qubit_saturation(const QubitSaturationParams& p) {
  const ClockMachineSpec spec = make_qubit_clock_spec(p);
  ScenarioOutcome out;
  out.kind = "qubit_saturation";
  out.name = out.kind;
  out.autonomous = true;
  out.bound_report = verify_clock(spec);
  const BoundReport& rep = out.bound_report;

  CheckReport work_window;
  work_window.name = "work_window";
  work_window.tolerance = 0.0;  // the window edges already carry the slack
  const double w_max = 2.0 * p.c;
  work_window.residual =
      std::max({0.0, (w_max - 1e-6) - rep.work, rep.work - w_max});
  work_window.pass = work_window.residual <= work_window.tolerance;
  work_window.record("work", rep.work);
  work_window.record("work_max", w_max);
  work_window.detail = "full population transfer: W in [2c - 1e-6, 2c]";
  out.checks.push_back(std::move(work_window));

  out.checks.push_back(check_clock_uncertainty(spec, 1e-6));

  {
    CheckReport near;
    near.name = "near_minimal_uncertainty";
    const double product = rep.tau * rep.delta_h_a;
    const double ceiling = kPi * p.hbar * (1.0 + p.k_over_l) * (1.0 + 1e-3);
    near.tolerance = 0.0;  // the ceiling already carries the slack
    near.residual = std::max(0.0, product - ceiling);
    near.pass = near.residual <= near.tolerance;
    near.record("product", product);
    near.record("ceiling", ceiling);
    near.detail = "tau * dH_A stays within the profile-width overhead of pi hbar";
    out.checks.push_back(std::move(near));
  }

  out.checks.push_back(check_condition1_clock(spec));

  {
    // Internal identity among the report fields: pi / saturation equals
    // pi * (tau dH_A / hbar) * (2||H_S|| / |W|) by definition of the ratio.
    CheckReport ident;
    ident.name = "saturation_identity_fields";
    const double u = rep.tau * rep.delta_h_a / rep.hbar;
    const double lhs = kPi / rep.saturation_fluctuation;
    const double exact = kPi * u * (2.0 * rep.h_s_norm / std::abs(rep.work));
    ident.tolerance = 1e-9;
    ident.residual = std::abs(lhs - exact) / lhs;
    ident.pass = ident.residual <= ident.tolerance;
    ident.record("pi_over_saturation", lhs);
    const double tau_min = kPi * rep.hbar / rep.delta_h_a;
    ident.record("tau_min", tau_min);
    ident.record("tau_min_over_timescale", tau_min / rep.timescale_estimate);
    ident.record("two_pi_h_s_norm_over_delta_h",
                 2.0 * kPi * rep.h_s_norm / rep.delta_h_a);
    ident.detail =
        "pi/saturation_fluctuation vs pi (tau dH_A / hbar)(2||H_S||/|W|), an "
        "exact rearrangement of the reported fields";
    out.checks.push_back(std::move(ident));

    // Because the transfer is complete (|W| = 2||H_S||), the exact form
    // collapses to pi * tau dH_A / hbar: the detectability margin is set by
    // the uncertainty product alone when saturation is near maximal.
    CheckReport minimal;
    minimal.name = "saturation_identity_minimal";
    const double near_max = kPi * u;
    minimal.tolerance = 1e-6;
    minimal.residual = std::abs(lhs - near_max) / lhs;
    minimal.pass = minimal.residual <= minimal.tolerance;
    minimal.record("pi_over_saturation", lhs);
    minimal.record("pi_uncertainty_product", near_max);
    minimal.detail =
        "pi/saturation_fluctuation vs pi tau dH_A / hbar at complete transfer";
    out.checks.push_back(std::move(minimal));
  }

  if (p.emit_distributions) {
    // The sweep realizes the flip exactly, so the final agent packet has a
    // closed form: the translated initial packet with the position-dependent
    // flip phase amp(x) = <0| U_dressed(x) |1> imprinted (|amp| = 1). The
    // lattice enters only as the spectral grid for the ring transform; its
    // spacing needs to resolve the packet phases, not the profile width.
    const UnitaryOperator u_eff =
        effective_unitary(spec.profile, spec.h_s, spec.hbar, spec.nu);
    const ClockWavefunction& psi0 = spec.ensemble.front().psi;
    const double travel = spec.nu * spec.tau();
    ClockWavefunction psi_f = make_wavefunction(
        psi0.left + travel, psi0.right + travel, psi0.points(),
        [&](double y) -> Complex {
          const int j = static_cast<int>(std::lround((y - travel - psi0.left) / psi0.dx()));
          const UnitaryOperator u =
              dressed_unitary(u_eff, psi0.x(j), spec.h_s, spec.hbar, spec.nu);
          return u.entries()(0, 1) * psi0.amplitudes(j);
        });
    psi_f.form = nullptr;  // construction-only sampler; interpolate afterwards

    const LatticeClock lattice = make_clock_lattice(spec, p.lattice_steps, 1.0);
    const LatticeDistribution before =
        momentum_distribution(psi0, lattice, spec.hbar, spec.nu);
    const LatticeDistribution after =
        momentum_distribution(psi_f, lattice, spec.hbar, spec.nu);

    auto mean_of = [](const LatticeDistribution& d) {
      return (d.energy.array() * d.probability.array()).sum();
    };
    CheckReport shift;
    shift.name = "distribution_mean_shift";
    shift.tolerance = 0.05 * std::max(1.0, std::abs(rep.work));
    shift.residual = std::abs((mean_of(after) - mean_of(before)) - rep.work);
    shift.pass = shift.residual <= shift.tolerance;
    shift.record("mean_before", mean_of(before));
    shift.record("mean_after", mean_of(after));
    shift.detail = "agent mean energy rises by the extracted work (ring spectral grid)";
    out.checks.push_back(std::move(shift));

    auto to_table = [](const char* name, const LatticeDistribution& d) {
      DataTable t;
      t.name = name;
      t.columns = {"energy", "probability"};
      for (Index i = 0; i < d.energy.size(); ++i)
        t.rows.push_back({d.energy(i), d.probability(i)});
      return t;
    };
    out.tables.push_back(to_table("agent_energy_before", before));
    out.tables.push_back(to_table("agent_energy_after", after));
  }

  out.pass = out.bound_report.pass;
  for (const CheckReport& c : out.checks) out.pass = out.pass && c.pass;
  return out;
}

// ---------------------------------------------------------------------------
// Random clock ensemble
// ---------------------------------------------------------------------------

namespace {

// Haar draws occasionally land an eigenphase on the logarithm branch cut;
// redraw deterministically until clear of it.
UnitaryOperator haar_unitary_off_cut(Index dim, Rng& rng) {
  for (int attempt = 0; attempt < 16; ++attempt) {
    UnitaryOperator u = haar_unitary(dim, rng);
    Eigen::ComplexEigenSolver<Matrix> es(u.entries(), false);
    double worst = kPi;
    for (Index i = 0; i < dim; ++i)
      worst = std::min(worst, kPi - std::abs(std::arg(es.eigenvalues()(i))));
    if (worst > 1e-6) return u;
  }
  throw std::runtime_error("random_clock_spec: could not draw a target unitary off the log branch cut");
}

ClockWavefunction random_packet(double l, int points, Rng& rng) {
  constexpr int kModes = 6;
  std::vector<Complex> coeff(kModes);
  for (int n = 0; n < kModes; ++n)
    coeff[n] = Complex{rng.normal(), rng.normal()} / std::pow(n + 1.0, 3.0);
  return make_wavefunction(-l, 0.0, points, [l, coeff](double x) {
    Complex v{0.0, 0.0};
    for (std::size_t n = 0; n < coeff.size(); ++n)
      v += coeff[n] * std::sin((n + 1) * kPi * (x + l) / l);
    return v;
  });
}

}  // namespace

ClockMachineSpec random_clock_spec(std::uint64_t model_seed, const RandomClockParams& p) {
  Rng rng(model_seed);
  const Index dim = rng.uniform_int(p.dim_min, p.dim_max);
  const double l = rng.uniform(p.l_min, p.l_max);
  const double k = l * rng.uniform(p.k_frac_min, p.k_frac_max);
  const double nu = rng.uniform(p.nu_min, p.nu_max);

  Operator h_s = gue(dim, rng);
  DensityMatrix rho_s = random_density(dim, rng);
  const UnitaryOperator target = haar_unitary_off_cut(dim, rng);
  InteractionProfile profile = build_vs_from_unitary(
      target, [k](double s) { return raised_cosine_bump(s, 0.0, k); }, 0.0, k,
      p.profile_steps, h_s, p.hbar, nu);

  std::vector<WeightedWavefunction> ensemble;
  if (rng.uniform() < p.mixture_fraction) {
    const double w = rng.uniform(0.3, 0.7);
    ensemble.push_back({w, random_packet(l, p.psi_points, rng)});
    ensemble.push_back({1.0 - w, random_packet(l, p.psi_points, rng)});
  } else {
    ensemble.push_back({1.0, random_packet(l, p.psi_points, rng)});
  }
  return ClockMachineSpec{std::move(h_s), std::move(rho_s), std::move(profile),
                          std::move(ensemble), nu, p.hbar};
}

ScenarioOutcome random_clock_ensemble(const RandomClockParams& p) {
  require(p.n_models >= 1, "random_clock_ensemble: n_models must be at least 1");
  require(p.dim_min >= 2 && p.dim_max >= p.dim_min,
          "random_clock_ensemble: dimension range must satisfy 2 <= dim_min <= dim_max");
  require(p.l_min > 0.0 && p.l_max >= p.l_min,
          "random_clock_ensemble: packet length range must be positive");
  require(p.k_frac_min > 0.0 && p.k_frac_max >= p.k_frac_min && p.k_frac_max <= 1.0,
          "random_clock_ensemble: profile fraction range must lie in (0, 1]");
  require(p.nu_min > 0.0 && p.nu_max >= p.nu_min,
          "random_clock_ensemble: speed range must be positive");
  require(p.psi_points >= 65 && p.psi_points % 2 == 1,
          "random_clock_ensemble: psi_points must be odd and at least 65");
  require(p.profile_steps >= 16,
          "random_clock_ensemble: profile_steps must be at least 16");
  require(p.mixture_fraction >= 0.0 && p.mixture_fraction <= 1.0,
          "random_clock_ensemble: mixture_fraction must lie in [0, 1]");

  ScenarioOutcome out;
  out.kind = "random_clock_ensemble";
  out.name = out.kind;
  out.autonomous = true;

  DataTable table;
  table.name = "ensemble";
  table.columns = {"model",    "dim",   "l",          "k",     "nu",
                   "mixture",  "tau",   "delta_h_a",  "comm_norm",
                   "work",     "power", "rhs_pb_f",   "rhs_pb_1",
                   "saturation_fluctuation", "uncertainty_product"};

  double worst_power_excess = 0.0;    // |P| - rhs_pb_1, clamped at 0
  double worst_ordering_excess = 0.0; // rhs_pb_1 - rhs_pb_f, clamped at 0
  double worst_floor_deficit = 0.0;   // pi hbar - tau dH_A, clamped at 0
  bool power_ok = true, ordering_ok = true, floor_ok = true, cond_ok = true;
  int best_index = 0;
  double best_saturation = -1.0;

  for (int i = 0; i < p.n_models; ++i) {
    const ClockMachineSpec spec = random_clock_spec(derive_seed(p.seed, i), p);
    const BoundReport rep = verify_clock(spec);
    const double product = rep.tau * rep.delta_h_a;

    worst_power_excess =
        std::max(worst_power_excess, std::abs(rep.power) - rep.rhs_commutator);
    worst_ordering_excess =
        std::max(worst_ordering_excess, rep.rhs_commutator - rep.rhs_fluctuation);
    worst_floor_deficit =
        std::max(worst_floor_deficit, kPi * rep.hbar - product);
    power_ok = power_ok &&
               std::abs(rep.power) <= rep.rhs_commutator + rep.tolerance;
    ordering_ok =
        ordering_ok && rep.rhs_commutator <= rep.rhs_fluctuation + rep.tolerance;
    floor_ok = floor_ok && product >= kPi * rep.hbar - 1e-6;
    cond_ok = cond_ok && rep.condition1_ok;

    if (rep.saturation_fluctuation > best_saturation) {
      best_saturation = rep.saturation_fluctuation;
      best_index = i;
      out.bound_report = rep;
    }

    const ClockWavefunction& psi = spec.ensemble.front().psi;
    table.rows.push_back({static_cast<double>(i),
                          static_cast<double>(spec.h_s.dim()), psi.span(),
                          spec.profile.span(), spec.nu,
                          spec.ensemble.size() > 1 ? 1.0 : 0.0, rep.tau,
                          rep.delta_h_a, rep.comm_norm, rep.work, rep.power,
                          rep.rhs_fluctuation, rep.rhs_commutator,
                          rep.saturation_fluctuation, product});
  }
  out.note = "headline bound report is the most saturating draw (model " +
             std::to_string(best_index) + ")";

  CheckReport power;
  power.name = "power_bound_all_models";
  power.tolerance = 1e-9;
  power.residual = std::max(0.0, worst_power_excess);
  power.pass = power_ok;
  power.detail = "|P| <= ||H_S|| ||[H_A, sigma_A]||_1 / hbar on every draw";
  out.checks.push_back(std::move(power));

  CheckReport ordering;
  ordering.name = "bound_ordering_all_models";
  ordering.tolerance = 1e-9;
  ordering.residual = std::max(0.0, worst_ordering_excess);
  ordering.pass = ordering_ok;
  ordering.detail = "commutator bound never exceeds the fluctuation bound";
  out.checks.push_back(std::move(ordering));

  CheckReport floor_check;
  floor_check.name = "uncertainty_floor_all_models";
  floor_check.tolerance = 1e-6;
  floor_check.residual = std::max(0.0, worst_floor_deficit);
  floor_check.pass = floor_ok;
  floor_check.detail = "tau * dH_A >= pi hbar on every draw";
  out.checks.push_back(std::move(floor_check));

  CheckReport cond;
  cond.name = "condition1_all_models";
  cond.tolerance = 0.0;
  cond.residual = cond_ok ? 0.0 : 1.0;
  cond.pass = cond_ok;
  out.checks.push_back(std::move(cond));

  {
    // Identity target: log(1) = 0 wipes the profile, so no work can flow.
    RandomClockParams ip = p;
    ip.dim_min = ip.dim_max = 2;
    ClockMachineSpec spec = random_clock_spec(derive_seed(p.seed, p.n_models), ip);
    const double span = spec.profile.span();
    spec.profile = build_vs_from_unitary(
        UnitaryOperator(identity_matrix(2), {2}),
        [span](double s) { return raised_cosine_bump(s, 0.0, span); }, 0.0, span,
        ip.profile_steps, spec.h_s, ip.hbar, spec.nu);
    CheckReport ident;
    ident.name = "identity_target_zero_power";
    ident.tolerance = 1e-12;
    ident.residual = std::abs(clock_work(spec));
    ident.pass = ident.residual <= ident.tolerance;
    out.checks.push_back(std::move(ident));
  }

  out.tables.push_back(std::move(table));
  out.pass = out.bound_report.pass;
  for (const CheckReport& c : out.checks) out.pass = out.pass && c.pass;
  return out;
}

// ---------------------------------------------------------------------------
// Commuting triviality
// ---------------------------------------------------------------------------

ScenarioOutcome commuting_triviality(const CommutingTrivialityParams& p) {
  require(p.sites >= 21 && p.sites % 2 == 1,
          "commuting_triviality: sites must be odd and at least 21");
  require(p.dx > 0.0 && p.coupling > 0.0 && p.tau > 0.0 && p.hbar > 0.0,
          "commuting_triviality: dx, coupling, tau and hbar must be positive");

  Rng rng(derive_seed(p.seed, 0));
  const int half = (p.sites - 1) / 2;
  const int low_top = half / 5;   // occupied momentum band |m| <= low_top
  const int high_bottom = half / 2;  // interaction band |m| >= high_bottom

  const LatticeClock lattice = make_lattice(half, half, p.dx);
  const Matrix modes = lattice_mode_matrix(lattice);

  auto band_vector = [&](int low, int high) {
    Vector v = Vector::Zero(p.sites);
    for (int m = low; m <= high; ++m) {
      const Complex c{rng.normal(), rng.normal()};
      v += c * modes.col(half + m);
      if (m != 0) v += std::conj(c) * modes.col(half - m);
    }
    return Vector(v / v.norm());
  };
  const Vector vec1 = band_vector(0, low_top);
  const Vector vec2 = band_vector(0, low_top);
  Matrix sigma = 0.6 * (vec1 * vec1.adjoint()) + 0.4 * (vec2 * vec2.adjoint());

  Matrix high_projector = Matrix::Zero(p.sites, p.sites);
  for (int m = high_bottom; m <= half; ++m) {
    high_projector += modes.col(half + m) * modes.col(half + m).adjoint();
    high_projector += modes.col(half - m) * modes.col(half - m).adjoint();
  }

  Matrix hs(2, 2);
  hs << -1.0, 0.0, 0.0, 1.0;
  Matrix b = Matrix::Zero(2, 2);
  b(0, 0) = 1.0;  // eigenprojector of H_S, so [H_S, B] = 0
  Matrix rho(2, 2);
  rho << 0.65, Complex{0.1, 0.05}, Complex{0.1, -0.05}, 0.35;

  const Operator h_s(std::move(hs), {2});
  const Operator h_a(Matrix(lattice_momentum(lattice, p.hbar)), {p.sites});
  const Operator v = tensor(Operator(Matrix(p.coupling * b), {2}),
                            Operator(high_projector, {p.sites}));
  const DensityMatrix rho_s(std::move(rho), {2});
  const DensityMatrix sigma_a(std::move(sigma), {p.sites});
  const BipartiteModel model(h_s, h_a, v, rho_s, sigma_a, p.tau, p.hbar);

  ScenarioOutcome out;
  out.kind = "commuting_triviality";
  out.name = out.kind;
  out.autonomous = true;
  out.note =
      "interaction = system eigenprojector (x) unoccupied momentum band: commutes "
      "with the free Hamiltonian and annihilates the initial state at all times";
  out.bound_report = verify(model);

  {
    CheckReport structure;
    structure.name = "free_hamiltonian_commutes";
    structure.tolerance = 1e-12;
    structure.residual = commutator(model.h_free(), model.v()).entries().norm();
    structure.pass = structure.residual <= structure.tolerance;
    out.checks.push_back(std::move(structure));
  }

  const std::vector<double> samples = {0.0, -0.25 * p.tau, -0.5 * p.tau,
                                       -0.75 * p.tau, -p.tau};
  out.checks.push_back(check_condition1(model, samples, 1e-10));
  out.checks.push_back(check_conservation_triviality(model, 1e-10));

  {
    CheckReport zero;
    zero.name = "zero_work";
    zero.tolerance = 1e-10;
    zero.residual = std::abs(mean_work(model));
    zero.pass = zero.residual <= zero.tolerance;
    out.checks.push_back(std::move(zero));
  }

  {
    // Break the commuting structure: couple the occupied band to the
    // interaction band through a system flip. Work must start to flow.
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_a.entries());
    const Vector occupied = es.eigenvectors().col(p.sites - 1);
    const Vector target = modes.col(half + high_bottom + 2);
    Matrix hop = target * occupied.adjoint();
    hop += hop.adjoint().eval();
    const Operator v_pert(
        Matrix(v.entries() +
               p.epsilon * tensor(Operator(pauli_x(), {2}),
                                  Operator(std::move(hop), {p.sites}))
                               .entries()),
        {2, p.sites});
    const BipartiteModel perturbed(h_s, h_a, v_pert, rho_s, sigma_a, p.tau, p.hbar);
    CheckReport pert;
    pert.name = "perturbation_sensitivity";
    pert.tolerance = 0.0;  // residual is the shortfall below the threshold
    const double threshold = 1e-4;
    const double w = mean_work(perturbed);
    pert.residual = std::max(0.0, threshold - std::abs(w));
    pert.pass = pert.residual <= pert.tolerance;
    pert.record("work_perturbed", w);
    pert.record("threshold", threshold);
    pert.detail = "breaking the commutation relation makes work flow again";
    out.checks.push_back(std::move(pert));
  }

  {
    const Operator v0(Matrix(Matrix::Zero(2 * p.sites, 2 * p.sites)), {2, p.sites});
    const BipartiteModel trivial(h_s, h_a, v0, rho_s, sigma_a, p.tau, p.hbar);
    CheckReport null_check = check_conservation_triviality(trivial, 1e-10);
    null_check.name = "null_interaction";
    out.checks.push_back(std::move(null_check));
  }

  out.pass = out.bound_report.pass;
  for (const CheckReport& c : out.checks) out.pass = out.pass && c.pass;
  return out;
}

// ---------------------------------------------------------------------------
// Spec-driven dispatch
// ---------------------------------------------------------------------------

namespace {

const std::vector<ParamDoc>& twin_docs() {
  static const std::vector<ParamDoc> docs = {
      {"omega", ParamDoc::Kind::Number, "1.0", "oscillator frequency"},
      {"g", ParamDoc::Kind::Number, "1.0", "exchange coupling strength"},
      {"tau", ParamDoc::Kind::Number, "pi*hbar/(2g)", "interaction duration"},
      {"n_trunc", ParamDoc::Kind::Integer, "total excitation + 1",
       "Fock truncation (dimension per oscillator)"},
      {"rho_weights", ParamDoc::Kind::List, "[0, 1]",
       "Fock-diagonal weights of the system state"},
      {"sigma_weights", ParamDoc::Kind::List, "[1]",
       "Fock-diagonal weights of the work-storage state"},
  };
  return docs;
}

const std::vector<ParamDoc>& control_docs() {
  static const std::vector<ParamDoc> docs = {
      {"omega", ParamDoc::Kind::Number, "1.0", "oscillator frequency"},
      {"g_list", ParamDoc::Kind::List, "[1, 2, 4, 8]", "couplings to scan"},
      {"rho_weights", ParamDoc::Kind::List, "[0, 1]",
       "Fock-diagonal weights of the system state"},
  };
  return docs;
}

const std::vector<ParamDoc>& qubit_docs() {
  static const std::vector<ParamDoc> docs = {
      {"c", ParamDoc::Kind::Number, "1.0", "qubit half-gap (H_S = diag(-c, c))"},
      {"l", ParamDoc::Kind::Number, "1.0", "packet support length"},
      {"k_over_l", ParamDoc::Kind::Number, "0.01",
       "interaction width as a fraction of the packet length"},
      {"psi_points", ParamDoc::Kind::Integer, "2001", "packet grid points (odd)"},
      {"profile_steps", ParamDoc::Kind::Integer, "4096",
       "time-ordering steps across the interaction"},
      {"lattice_steps", ParamDoc::Kind::Integer, "96",
       "sweep resolution for emitted distributions"},
  };
  return docs;
}

const std::vector<ParamDoc>& ensemble_docs() {
  static const std::vector<ParamDoc> docs = {
      {"n_models", ParamDoc::Kind::Integer, "20", "number of random machines"},
      {"dim_min", ParamDoc::Kind::Integer, "2", "smallest system dimension"},
      {"dim_max", ParamDoc::Kind::Integer, "6", "largest system dimension"},
      {"l_min", ParamDoc::Kind::Number, "0.5", "shortest packet support"},
      {"l_max", ParamDoc::Kind::Number, "2.0", "longest packet support"},
      {"k_frac_min", ParamDoc::Kind::Number, "0.05",
       "smallest profile width fraction"},
      {"k_frac_max", ParamDoc::Kind::Number, "0.3",
       "largest profile width fraction"},
      {"nu_min", ParamDoc::Kind::Number, "0.5", "slowest sweep speed"},
      {"nu_max", ParamDoc::Kind::Number, "2.0", "fastest sweep speed"},
      {"mixture_fraction", ParamDoc::Kind::Number, "0.25",
       "probability of a two-packet mixed agent state"},
      {"psi_points", ParamDoc::Kind::Integer, "513", "packet grid points (odd)"},
      {"profile_steps", ParamDoc::Kind::Integer, "256",
       "time-ordering steps across the interaction"},
  };
  return docs;
}

const std::vector<ParamDoc>& triviality_docs() {
  static const std::vector<ParamDoc> docs = {
      {"sites", ParamDoc::Kind::Integer, "33", "agent lattice sites (odd)"},
      {"dx", ParamDoc::Kind::Number, "0.25", "lattice spacing"},
      {"coupling", ParamDoc::Kind::Number, "1.0", "interaction strength"},
      {"tau", ParamDoc::Kind::Number, "1.0", "interaction duration"},
      {"epsilon", ParamDoc::Kind::Number, "0.3",
       "strength of the symmetry-breaking control perturbation"},
  };
  return docs;
}

// Strict parameter access: every provided key must be consumed.
class ParamReader {
 public:
  explicit ParamReader(const ScenarioSpec& spec) : spec_(spec) {}

  double number(const std::string& key, double fallback) {
    used_.insert(key);
    const auto it = spec_.numbers.find(key);
    return it == spec_.numbers.end() ? fallback : it->second;
  }

  int integer(const std::string& key, int fallback) {
    used_.insert(key);
    const auto it = spec_.numbers.find(key);
    if (it == spec_.numbers.end()) return fallback;
    const double v = it->second;
    if (v != std::floor(v) || std::abs(v) > 1e9)
      fail(spec_.kind + ": parameter '" + key + "' must be an integer");
    return static_cast<int>(v);
  }

  std::vector<double> list(const std::string& key, std::vector<double> fallback) {
    used_.insert(key);
    const auto it = spec_.lists.find(key);
    return it == spec_.lists.end() ? std::move(fallback) : it->second;
  }

  void finish() const {
    for (const auto& [key, value] : spec_.numbers)
      if (!used_.count(key))
        fail(spec_.kind + ": unknown parameter '" + key + "'");
    for (const auto& [key, value] : spec_.lists)
      if (!used_.count(key))
        fail(spec_.kind + ": unknown parameter '" + key + "'");
  }

 private:
  const ScenarioSpec& spec_;
  std::set<std::string> used_;
};

TwinOscillatorParams read_twin(const ScenarioSpec& spec) {
  ParamReader r(spec);
  TwinOscillatorParams p;
  p.omega = r.number("omega", p.omega);
  p.g = r.number("g", p.g);
  p.tau = r.number("tau", p.tau);
  p.n_trunc = r.integer("n_trunc", p.n_trunc);
  p.rho_weights = r.list("rho_weights", p.rho_weights);
  p.sigma_weights = r.list("sigma_weights", p.sigma_weights);
  p.hbar = spec.hbar;
  r.finish();
  require(p.omega > 0.0 && p.g > 0.0, spec.kind + ": omega and g must be positive");
  return p;
}

NonautonomousControlParams read_control(const ScenarioSpec& spec) {
  ParamReader r(spec);
  NonautonomousControlParams p;
  p.omega = r.number("omega", p.omega);
  p.g_list = r.list("g_list", p.g_list);
  p.rho_weights = r.list("rho_weights", p.rho_weights);
  p.hbar = spec.hbar;
  r.finish();
  require(p.omega > 0.0, spec.kind + ": omega must be positive");
  require(!p.g_list.empty(), spec.kind + ": g_list must not be empty");
  for (double g : p.g_list)
    require(g > 0.0, spec.kind + ": all couplings must be positive");
  return p;
}

QubitSaturationParams read_qubit(const ScenarioSpec& spec) {
  ParamReader r(spec);
  QubitSaturationParams p;
  p.c = r.number("c", p.c);
  p.l = r.number("l", p.l);
  p.k_over_l = r.number("k_over_l", p.k_over_l);
  p.psi_points = r.integer("psi_points", p.psi_points);
  p.profile_steps = r.integer("profile_steps", p.profile_steps);
  p.lattice_steps = r.integer("lattice_steps", p.lattice_steps);
  p.emit_distributions = spec.emit_distributions;
  p.hbar = spec.hbar;
  r.finish();
  require(p.c > 0.0 && p.l > 0.0, spec.kind + ": c and l must be positive");
  require(p.k_over_l > 0.0 && p.k_over_l <= 1.0,
          spec.kind + ": k_over_l must lie in (0, 1]");
  require(p.psi_points >= 101 && p.psi_points % 2 == 1,
          spec.kind + ": psi_points must be odd and at least 101");
  require(p.profile_steps >= 16, spec.kind + ": profile_steps must be at least 16");
  require(p.lattice_steps >= 8, spec.kind + ": lattice_steps must be at least 8");
  return p;
}

RandomClockParams read_ensemble(const ScenarioSpec& spec) {
  require(spec.has_seed, spec.kind + ": missing required parameter 'seed'");
  ParamReader r(spec);
  RandomClockParams p;
  p.n_models = r.integer("n_models", p.n_models);
  p.dim_min = r.integer("dim_min", p.dim_min);
  p.dim_max = r.integer("dim_max", p.dim_max);
  p.l_min = r.number("l_min", p.l_min);
  p.l_max = r.number("l_max", p.l_max);
  p.k_frac_min = r.number("k_frac_min", p.k_frac_min);
  p.k_frac_max = r.number("k_frac_max", p.k_frac_max);
  p.nu_min = r.number("nu_min", p.nu_min);
  p.nu_max = r.number("nu_max", p.nu_max);
  p.mixture_fraction = r.number("mixture_fraction", p.mixture_fraction);
  p.psi_points = r.integer("psi_points", p.psi_points);
  p.profile_steps = r.integer("profile_steps", p.profile_steps);
  p.hbar = spec.hbar;
  p.seed = spec.seed;
  r.finish();
  require(p.n_models >= 1, spec.kind + ": n_models must be positive");
  require(p.dim_min >= 2 && p.dim_max >= p.dim_min,
          spec.kind + ": dimension range must satisfy 2 <= dim_min <= dim_max");
  require(p.l_min > 0.0 && p.l_max >= p.l_min,
          spec.kind + ": packet length range must be positive");
  return p;
}

CommutingTrivialityParams read_triviality(const ScenarioSpec& spec) {
  require(spec.has_seed, spec.kind + ": missing required parameter 'seed'");
  ParamReader r(spec);
  CommutingTrivialityParams p;
  p.sites = r.integer("sites", p.sites);
  p.dx = r.number("dx", p.dx);
  p.coupling = r.number("coupling", p.coupling);
  p.tau = r.number("tau", p.tau);
  p.epsilon = r.number("epsilon", p.epsilon);
  p.hbar = spec.hbar;
  p.seed = spec.seed;
  r.finish();
  require(p.sites >= 21 && p.sites % 2 == 1,
          spec.kind + ": sites must be odd and at least 21");
  require(p.dx > 0.0 && p.coupling > 0.0 && p.tau > 0.0,
          spec.kind + ": dx, coupling and tau must be positive");
  return p;
}

}  // namespace

const std::vector<std::string>& scenario_kinds() {
  static const std::vector<std::string> kinds = {
      "twin_oscillator", "nonautonomous_control", "qubit_saturation",
      "random_clock_ensemble", "commuting_triviality"};
  return kinds;
}

const std::vector<ParamDoc>& scenario_parameters(const std::string& kind) {
  if (kind == "twin_oscillator") return twin_docs();
  if (kind == "nonautonomous_control") return control_docs();
  if (kind == "qubit_saturation") return qubit_docs();
  if (kind == "random_clock_ensemble") return ensemble_docs();
  if (kind == "commuting_triviality") return triviality_docs();
  fail("unknown scenario kind '" + kind + "'");
}

bool scenario_needs_seed(const std::string& kind) {
  return kind == "random_clock_ensemble" || kind == "commuting_triviality";
}

const std::vector<std::string>& scenario_check_names(const std::string& kind) {
  static const std::vector<std::string> twin = {
      "work_closed_form", "excitation_conservation",
      "number_commutator_on_sector", "zero_time_limit"};
  static const std::vector<std::string> control = {
      "power_matches_2g_omega_over_pi", "fluctuation_rhs_zero",
      "condition1_fails_as_designed", "violation_expected_flagged"};
  static const std::vector<std::string> qubit = {
      "work_window",
      "clock_uncertainty",
      "near_minimal_uncertainty",
      "condition1_clock",
      "saturation_identity_fields",
      "saturation_identity_minimal",
      "distribution_mean_shift"};
  static const std::vector<std::string> ensemble = {
      "power_bound_all_models", "bound_ordering_all_models",
      "uncertainty_floor_all_models", "condition1_all_models",
      "identity_target_zero_power"};
  static const std::vector<std::string> triviality = {
      "free_hamiltonian_commutes", "condition1", "conservation_triviality",
      "zero_work", "perturbation_sensitivity", "null_interaction"};
  if (kind == "twin_oscillator") return twin;
  if (kind == "nonautonomous_control") return control;
  if (kind == "qubit_saturation") return qubit;
  if (kind == "random_clock_ensemble") return ensemble;
  if (kind == "commuting_triviality") return triviality;
  fail("unknown scenario kind '" + kind + "'");
}

namespace {

void validate_tolerances(const ScenarioSpec& spec) {
  const std::vector<std::string>& known = scenario_check_names(spec.kind);
  for (const auto& [key, value] : spec.tolerances) {
    require(std::isfinite(value) && value >= 0.0,
            "scenario '" + spec.name + "': tolerance '" + key +
                "' must be a finite non-negative number");
    if (key == "bound_inequality") continue;
    require(std::find(known.begin(), known.end(), key) != known.end(),
            "scenario '" + spec.name + "': '" + key +
                "' does not name a check of kind '" + spec.kind + "'");
  }
}

// Re-judges the overridden checks (pass iff residual <= tolerance), then the
// headline bound report, then the scenario verdict.
void apply_tolerances(const ScenarioSpec& spec, ScenarioOutcome& out) {
  if (spec.tolerances.empty()) return;
  for (const auto& [key, value] : spec.tolerances) {
    if (key == "bound_inequality") {
      reassess(out.bound_report, value);
      continue;
    }
    for (CheckReport& check : out.checks) {
      if (check.name != key) continue;
      check.tolerance = value;
      check.pass = check.residual <= check.tolerance;
    }
  }
  out.pass = out.bound_report.pass;
  for (const CheckReport& c : out.checks) out.pass = out.pass && c.pass;
}

}  // namespace

void validate_scenario_spec(const ScenarioSpec& spec) {
  require(spec.hbar > 0.0, "scenario '" + spec.name + "': hbar must be positive");
  if (spec.kind == "twin_oscillator") {
    read_twin(spec);
  } else if (spec.kind == "nonautonomous_control") {
    read_control(spec);
  } else if (spec.kind == "qubit_saturation") {
    read_qubit(spec);
  } else if (spec.kind == "random_clock_ensemble") {
    read_ensemble(spec);
  } else if (spec.kind == "commuting_triviality") {
    read_triviality(spec);
  } else {
    fail("unknown scenario kind '" + spec.kind + "'");
  }
  validate_tolerances(spec);
}

ScenarioOutcome run_scenario(const ScenarioSpec& spec) {
  validate_scenario_spec(spec);
  ScenarioOutcome out;
  if (spec.kind == "twin_oscillator") {
    out = twin_oscillator(read_twin(spec));
  } else if (spec.kind == "nonautonomous_control") {
    out = nonautonomous_control(read_control(spec));
  } else if (spec.kind == "qubit_saturation") {
    out = qubit_saturation(read_qubit(spec));
  } else if (spec.kind == "random_clock_ensemble") {
    out = random_clock_ensemble(read_ensemble(spec));
  } else {
    out = commuting_triviality(read_triviality(spec));
  }
  if (!spec.name.empty()) out.name = spec.name;
  apply_tolerances(spec, out);
  return out;
}

}  // namespace powerbound
