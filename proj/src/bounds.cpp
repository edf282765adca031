#include "powerbound/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace powerbound {

double bound_fluctuation(const Operator& h_s, const Operator& h_a,
                         const DensityMatrix& sigma_a, double hbar) {
  const double dh = std::sqrt(variance(h_a, sigma_a));
  return 2.0 * operator_norm(h_s) * dh / hbar;
}

double bound_commutator(const Operator& h_s, const Operator& h_a,
                        const DensityMatrix& sigma_a, double hbar) {
  const Matrix c = h_a.entries() * sigma_a.entries() - sigma_a.entries() * h_a.entries();
  return operator_norm(h_s) * trace_norm(c) / hbar;
}

CheckReport check_commutator_fluctuation_relation(const Operator& h,
                                                  const DensityMatrix& sigma) {
  const Matrix c = h.entries() * sigma.entries() - sigma.entries() * h.entries();
  const double lhs = trace_norm(c);
  const double rhs = 2.0 * std::sqrt(variance(h, sigma));

  CheckReport rep;
  rep.name = "commutator_fluctuation_relation";
  rep.tolerance = 1e-10 * std::max(1.0, rhs);
  rep.residual = std::max(0.0, lhs - rhs);
  rep.pass = lhs <= rhs + rep.tolerance;
  rep.record("commutator_norm", lhs);
  rep.record("twice_fluctuation", rhs);
  return rep;
}

QslChainReport check_qsl_chain(const BipartiteModel& model, double tol) {
  QslChainReport rep;
  const double hbar = model.hbar();
  const double tau = model.tau();

  const Matrix& sigma0 = model.sigma_a().entries();
  const Matrix sigma_back = sigma_free(model, -tau).entries();
  const Matrix comm = model.h_a().entries() * sigma0 - sigma0 * model.h_a().entries();

  rep.comm_norm = trace_norm(comm);
  rep.agent_distance = trace_norm(Matrix(sigma0 - sigma_back));

  const EvolutionResult evo = evolve_total(model, tau);
  rep.system_distance =
      trace_norm(Matrix(evo.rho_s_final.entries() - evo.rho_s_free.entries()));
  const double work = expectation(model.h_s(), model.rho_s()) -
                      expectation(model.h_s(), evo.rho_s_final);
  const double h_s_norm = operator_norm(model.h_s());

  // Link 1: the free agent cannot outrun its own commutator speed.
  rep.speed_limit.name = "qsl_speed_limit";
  rep.speed_limit.tolerance = tol;
  rep.speed_limit.record("tau", tau);
  rep.speed_limit.record("agent_distance", rep.agent_distance);
  rep.speed_limit.record("comm_norm", rep.comm_norm);
  rep.free_evolution_case = rep.comm_norm <= tol;
  if (rep.free_evolution_case) {
    // [H_A, sigma_A] = 0: sigma never moves, so both distances must vanish.
    rep.speed_limit.residual = rep.agent_distance;
    rep.speed_limit.pass = rep.agent_distance <= tol;
    rep.speed_limit.detail = "degenerate free-evolution case: stationary agent state";
  } else {
    const double min_time = hbar * rep.agent_distance / rep.comm_norm;
    rep.speed_limit.residual = std::max(0.0, min_time - tau);
    rep.speed_limit.pass = tau + tol >= min_time;
    rep.speed_limit.record("min_time", min_time);
  }

  // Link 2: tracing out the system cannot increase distinguishability.
  rep.monotonicity.name = "qsl_monotonicity";
  rep.monotonicity.tolerance = tol;
  rep.monotonicity.residual = std::max(0.0, rep.system_distance - rep.agent_distance);
  rep.monotonicity.pass = rep.system_distance <= rep.agent_distance + tol;
  rep.monotonicity.record("agent_distance", rep.agent_distance);
  rep.monotonicity.record("system_distance", rep.system_distance);

  // Link 3: work is trace-norm continuous in the final system state.
  rep.work_distance.name = "qsl_work_distance";
  rep.work_distance.tolerance = tol;
  const double rhs = h_s_norm * rep.system_distance;
  rep.work_distance.residual = std::max(0.0, std::abs(work) - rhs);
  rep.work_distance.pass = std::abs(work) <= rhs + tol;
  rep.work_distance.record("work", work);
  rep.work_distance.record("h_s_norm_times_distance", rhs);

  rep.pass = rep.speed_limit.pass && rep.monotonicity.pass && rep.work_distance.pass;
  return rep;
}

double detectability_timescale(const Operator& h_s, double hbar) {
  return hbar / (2.0 * operator_norm(h_s));
}

// Saturation ratios, inequality checks and the pass/expected-violation logic
// shared by the bipartite and ideal-clock certification routes.
void reassess(BoundReport& rep, double inequality_tol) {
  const double tiny = 1e-300;
  rep.saturation_fluctuation =
      rep.rhs_fluctuation > tiny ? std::abs(rep.power) / rep.rhs_fluctuation : 0.0;
  rep.saturation_commutator =
      rep.rhs_commutator > tiny ? std::abs(rep.power) / rep.rhs_commutator : 0.0;

  const double slack = inequality_tol * std::max(1.0, rep.rhs_fluctuation);
  rep.tolerance = slack;
  const bool power_ok = std::abs(rep.power) <= rep.rhs_commutator + slack;
  const bool ordering_ok = rep.rhs_commutator <= rep.rhs_fluctuation + slack;
  rep.bound_violated = !(power_ok && ordering_ok);

  if (rep.condition1_ok) {
    rep.pass = !rep.bound_violated;
    rep.violation_expected = false;
    if (!rep.pass) rep.note = "bound violated on a model that satisfies the switch-on condition";
  } else {
    // Externally switched machine: the bounds need not apply, so a violation
    // is informative rather than an error.
    rep.pass = true;
    rep.violation_expected = rep.bound_violated;
    rep.note = rep.bound_violated
                   ? "non-autonomous model (switch-on condition fails); bound violation expected"
                   : "non-autonomous model (switch-on condition fails)";
  }
}

BoundReport verify(const BipartiteModel& model, const VerifyOptions& options) {
  BoundReport rep;
  rep.tau = model.tau();
  rep.hbar = model.hbar();
  rep.work = mean_work(model);
  rep.power = rep.work / rep.tau;
  rep.h_s_norm = operator_norm(model.h_s());
  rep.delta_h_a = std::sqrt(variance(model.h_a(), model.sigma_a()));
  const Matrix& sigma = model.sigma_a().entries();
  rep.comm_norm = trace_norm(
      Matrix(model.h_a().entries() * sigma - sigma * model.h_a().entries()));
  rep.rhs_fluctuation = 2.0 * rep.h_s_norm * rep.delta_h_a / rep.hbar;
  rep.rhs_commutator = rep.h_s_norm * rep.comm_norm / rep.hbar;
  rep.timescale_estimate = detectability_timescale(model.h_s(), rep.hbar);

  std::vector<double> samples = options.condition1_samples;
  if (samples.empty())
    samples = {0.0, -0.25 * rep.tau, -0.5 * rep.tau, -0.75 * rep.tau, -rep.tau};
  const CheckReport cond = check_condition1(model, samples, options.condition1_tol);
  rep.condition1_ok = cond.pass;

  reassess(rep, options.inequality_tol);
  return rep;
}

BoundReport verify_clock(const ClockMachineSpec& spec, const VerifyOptions& options) {
  validate_spec(spec);
  BoundReport rep;
  rep.tau = spec.tau();
  rep.hbar = spec.hbar;
  rep.work = clock_work(spec);
  rep.power = rep.work / rep.tau;
  rep.h_s_norm = operator_norm(spec.h_s);
  rep.delta_h_a = clock_delta_h_a(spec);
  rep.comm_norm = clock_commutator_norm(spec);
  rep.rhs_fluctuation = 2.0 * rep.h_s_norm * rep.delta_h_a / rep.hbar;
  rep.rhs_commutator = rep.h_s_norm * rep.comm_norm / rep.hbar;
  rep.timescale_estimate = detectability_timescale(spec.h_s, rep.hbar);
  rep.condition1_ok = check_condition1_clock(spec).pass;

  reassess(rep, options.inequality_tol);
  return rep;
}

}  // namespace powerbound
