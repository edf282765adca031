#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "powerbound/checks.hpp"
#include "powerbound/machine.hpp"
#include "powerbound/operators.hpp"

namespace powerbound {

/// Normalized wavepacket sampled on a uniform grid over its support
/// [left, right]. Amplitudes are forced to zero at the support boundary and
/// the vector is normalized so the composite-Simpson mass is exactly one
/// (grids therefore carry an odd number of points, at least five). An
/// optional closed form allows exact resampling onto other grids.
struct ClockWavefunction {
  double left = 0.0;
  double right = 0.0;
  Vector amplitudes;
  std::function<Complex(double)> form;  ///< optional; not serialized

  int points() const { return static_cast<int>(amplitudes.size()); }
  double dx() const { return (right - left) / (points() - 1); }
  double span() const { return right - left; }
  double x(int j) const { return left + j * dx(); }
};

ClockWavefunction make_wavefunction(double left, double right, int n,
                                    const std::function<Complex(double)>& sampler);

/// sqrt(2/L) sin(-pi x / L) on [-L, 0]: the minimum-energy-spread packet for
/// a given support length.
ClockWavefunction optimal_wavefunction(double l, int n);

/// Ground state of the discrete second-difference operator with Dirichlet
/// walls on [-L, 0] (real, nonnegative convention). Its Rayleigh quotient
/// converges to (pi/L)^2 at second order in the grid spacing.
ClockWavefunction variational_minimize(double l, int n);

/// First and second moments of the momentum operator -i hbar d/dx in psi,
/// via central differences (second-order one-sided stencils at the support
/// edges) and Simpson quadrature.
struct MomentumMoments {
  double mean = 0.0;    ///< <P>
  double second = 0.0;  ///< <P^2>
};
MomentumMoments clock_momentum_moments(const ClockWavefunction& psi, double hbar);

/// Variance of the clock Hamiltonian H_A = nu P in psi.
double clock_energy_variance(const ClockWavefunction& psi, double hbar, double nu = 1.0);

/// Interaction profile V_S(s) sampled at the midpoints of `steps` equal
/// subintervals of [left, right]; zero outside. Every sample is Hermitian.
/// An optional closed form allows evaluation at arbitrary positions (used
/// when embedding the profile on a lattice).
struct InteractionProfile {
  double left = 0.0;
  double right = 0.0;
  std::vector<Matrix> samples;
  std::function<Matrix(double)> form;  ///< optional; not serialized

  int steps() const { return static_cast<int>(samples.size()); }
  double ds() const { return (right - left) / steps(); }
  double span() const { return right - left; }
  double s(int k) const { return left + (k + 0.5) * ds(); }

  /// Closed form when available, otherwise piecewise-linear in the samples;
  /// zero outside [left, right].
  Matrix at(double s_eval, Index dim) const;
};

InteractionProfile make_profile(double left, double right, int steps,
                                const std::function<Matrix(double)>& sampler);

/// cos^2 window on [left, right] (unnormalized; vanishing value and slope at
/// the edges).
double raised_cosine_bump(double s, double left, double right);

/// Profile realizing a target unitary with a packet sweeping at speed nu:
/// V_S(s) = i hbar nu f(s) e^{-isH_S/(nu hbar)} log(u) e^{+isH_S/(nu hbar)},
/// where the window f is renormalized so its discrete midpoint sum equals one
/// exactly (s/nu is the arrival time at position s, nu scales the coupling so
/// the accumulated kick is speed-independent). The dressing inverts the
/// interaction-picture twirl, so feeding the result to effective_unitary at
/// the same nu reproduces u_target up to roundoff.
InteractionProfile build_vs_from_unitary(const UnitaryOperator& u_target,
                                         const std::function<double(double)>& window,
                                         double left, double right, int steps,
                                         const Operator& h_s, double hbar,
                                         double nu = 1.0);

/// Time-ordered product of midpoint-rule step exponentials of the
/// interaction-picture profile e^{+i(s/nu)H_S/hbar} V_S(s) e^{-i(s/nu)H_S/hbar}
/// over time steps ds/nu (second-order accurate in the step size; later steps
/// act from the left). The twirl sign is fixed by the Schroedinger equation
/// of H_S (x) 1 + 1 (x) nu P + V and verified against dense lattice
/// evolution, where the energy bookkeeping closes.
UnitaryOperator effective_unitary(const InteractionProfile& profile,
                                  const Operator& h_s, double hbar, double nu = 1.0);

/// e^{-i H_S (x/nu) / hbar} u e^{+i H_S (x/nu) / hbar}: the sweep unitary as
/// seen by the packet component that starts at coordinate x (arrival delayed
/// by the travel time |x|/nu, during which the component accumulates free
/// system phase).
UnitaryOperator dressed_unitary(const UnitaryOperator& u, double x,
                                const Operator& h_s, double hbar, double nu = 1.0);

struct WeightedWavefunction {
  double weight = 1.0;
  ClockWavefunction psi;
};

/// Clock-driven machine: a system (H_S, rho_S), an agent wavepacket (or
/// mixture of packets on a shared grid) moving at speed nu that sweeps the
/// interaction profile once. The interaction window is tau = (packet support
/// length) + (profile support length).
struct ClockMachineSpec {
  Operator h_s;
  DensityMatrix rho_s;
  InteractionProfile profile;
  std::vector<WeightedWavefunction> ensemble;
  double nu = 1.0;
  double hbar = 1.0;

  double psi_span() const { return ensemble.front().psi.span(); }
  /// Time for the packet to sweep its own support plus the profile support.
  double tau() const { return (psi_span() + profile.span()) / nu; }
};

/// Validates supports, grids, weights and dimensions; throws on violation.
void validate_spec(const ClockMachineSpec& spec);

/// rho_S'(tau) = sum_i p_i int dx |psi_i(x)|^2 e^{-i tau H_S/hbar} U(x) rho_S
/// U(x)^dag e^{+i tau H_S/hbar}, with U(x) the dressed effective unitary and
/// composite-Simpson quadrature on the packet grid.
DensityMatrix final_system_state(const ClockMachineSpec& spec);

/// tr[H_S rho_S'(tau)], computed directly from the quadrature form.
double final_energy(const ClockMachineSpec& spec);

/// Mean work extracted by one sweep: tr[H_S rho_S] - final_energy.
double clock_work(const ClockMachineSpec& spec);

/// Energy spread of the agent state (mixture-aware).
double clock_delta_h_a(const ClockMachineSpec& spec);

/// ||[H_A, sigma_A]||_1 for the agent state, evaluated on the span of the
/// packets and their derivatives (Gram-matrix reduction).
double clock_commutator_norm(const ClockMachineSpec& spec);

/// tau * dH_A >= pi hbar for every admissible packet mixture.
CheckReport check_clock_uncertainty(const ClockMachineSpec& spec, double tol);

/// Structural switch-on condition for clock machines: the packet support lies
/// left of the profile support and only translates further left for t <= 0,
/// so V (rho (x) sigma_A(t)) vanishes identically.
CheckReport check_condition1_clock(const ClockMachineSpec& spec);

/// Periodic position lattice: `sites` (odd) points x_j = x0 + j dx, with the
/// momentum operator diagonal in the discrete Fourier basis over the
/// symmetric band of modes. Free translations are exact at multiples of
/// dx/nu, so every lattice check samples time on that grid.
struct LatticeClock {
  int sites = 0;
  double dx = 0.0;
  double x0 = 0.0;

  double x(int j) const { return x0 + j * dx; }
  double length() const { return sites * dx; }
  bool is_commensurate(double t, double nu) const;
};

/// n_left sites below the origin, n_right above (site at 0 included).
LatticeClock make_lattice(int n_left, int n_right, double dx);

/// Lattice fitted to one machine sweep: dx = tau / steps_across_tau (so the
/// sweep time is exactly commensurate, and halving dx means doubling the step
/// count), sites covering packet + profile + swept region plus a buffer of
/// `margin_lengths` packet lengths against ring wrap-around.
LatticeClock make_clock_lattice(const ClockMachineSpec& spec, int steps_across_tau,
                                double margin_lengths = 1.0);

/// Dense momentum operator (exact spectral form on the ring).
Matrix lattice_momentum(const LatticeClock& lattice, double hbar);

/// Plane-wave eigenmodes of the ring as columns, ordered by ascending
/// momentum over the symmetric band m = -(sites-1)/2 .. +(sites-1)/2.
Matrix lattice_mode_matrix(const LatticeClock& lattice);

/// Packet sampled at the lattice sites (times sqrt(dx)), exactly normalized.
Vector lattice_embed(const LatticeClock& lattice, const ClockWavefunction& psi);

/// The clock machine as a closed bipartite model on the lattice:
/// H = H_S (x) 1 + 1 (x) nu P + sum_j V_S(x_j) (x) |j><j|.
BipartiteModel lattice_model(const ClockMachineSpec& spec, const LatticeClock& lattice);

/// Joint evolution over one sweep (t = tau) of the lattice model.
EvolutionResult lattice_simulate(const ClockMachineSpec& spec, const LatticeClock& lattice);

/// Longest switch-on-condition window the ring supports before the packet
/// wraps around: (sites - occupied) * dx / nu.
double max_condition_window(const ClockMachineSpec& spec, const LatticeClock& lattice);

struct LatticeDistribution {
  RealVector energy;       ///< hbar nu k_m, ascending
  RealVector probability;  ///< sums to one
};

LatticeDistribution momentum_distribution(const Vector& state, const LatticeClock& lattice,
                                          double hbar, double nu);
LatticeDistribution momentum_distribution(const DensityMatrix& state, const LatticeClock& lattice,
                                          double hbar, double nu);
LatticeDistribution momentum_distribution(const ClockWavefunction& psi, const LatticeClock& lattice,
                                          double hbar, double nu);

/// Composite-Simpson weights for an odd number of points spaced by dx.
RealVector simpson_weights(int n, double dx);

}  // namespace powerbound
