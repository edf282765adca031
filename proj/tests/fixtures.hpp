#pragma once

// Shared model builders for the unit suites.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

#include "oracles.hpp"
#include "powerbound/clockwork.hpp"
#include "powerbound/machine.hpp"
#include "powerbound/operators.hpp"
#include "powerbound/random.hpp"
#include "powerbound/scenarios.hpp"

namespace fixtures {

using namespace powerbound;

/// A genuinely autonomous machine (switch-on condition holds by construction):
/// a clock machine drawn from the randomized family and put on a lattice.
/// Commensurate times -- multiples of dx / nu -- are the ones at which the
/// ring translation underlying the agent's free motion is exact, so residual
/// checks sample there.
struct LatticeSample {
  BipartiteModel model;
  double time_step;  ///< dx / nu
  double dx;
};

constexpr int kStepsAcrossTau = 48;

inline std::vector<LatticeSample> autonomous_samples(int count, std::uint64_t seed) {
  RandomClockParams params;
  params.psi_points = 129;
  params.profile_steps = 64;
  // Keep the interaction window wide enough that the 48-cell lattice resolves
  // it; the residual checks below assume O(dx^2) discretization behavior.
  params.l_min = 0.8;
  params.k_frac_min = 0.15;
  std::vector<LatticeSample> samples;
  for (int i = 0; i < count; ++i) {
    const ClockMachineSpec spec = random_clock_spec(derive_seed(seed, i), params);
    const LatticeClock lattice = make_clock_lattice(spec, kStepsAcrossTau);
    samples.push_back(
        {lattice_model(spec, lattice), lattice.dx / spec.nu, lattice.dx});
  }
  return samples;
}

/// Hand-built machine with [H_free, V] = 0 *and* the switch-on condition:
/// V couples an H_S eigenprojector to an H_A eigenprojector whose band the
/// agent state never occupies, so V annihilates E (x) sigma_A(t) from both
/// sides at every time.
inline BipartiteModel commuting_inert_model(std::uint64_t seed) {
  Rng rng(seed);
  const Operator h_s = gue(3, rng);
  const Operator h_a = gue(4, rng);
  const Eigen::SelfAdjointEigenSolver<Matrix> es_s(h_s.entries());
  const Eigen::SelfAdjointEigenSolver<Matrix> es_a(h_a.entries());

  const Vector sys_mode = es_s.eigenvectors().col(1);
  const Matrix sys_projector = sys_mode * sys_mode.adjoint();
  const Vector empty_mode = es_a.eigenvectors().col(3);
  const Matrix band_projector = empty_mode * empty_mode.adjoint();

  Matrix sigma = Matrix::Zero(4, 4);
  const std::array<double, 3> weights{0.5, 0.3, 0.2};
  for (int i = 0; i < 3; ++i) {
    const Vector mode = es_a.eigenvectors().col(i);
    sigma += weights[static_cast<std::size_t>(i)] * (mode * mode.adjoint());
  }

  const Operator v(0.7 * oracles::naive_tensor(sys_projector, band_projector),
                   std::vector<Index>{3, 4});
  return BipartiteModel(h_s, h_a, v, random_density(3, rng), DensityMatrix(sigma),
                        1.0);
}

/// Agent state diagonal in the H_A eigenbasis: commutator norm exactly zero
/// while the energy spread stays strictly positive.
inline DensityMatrix stationary_mixture(const Operator& h_a, std::uint64_t seed) {
  Rng rng(seed);
  const Index n = h_a.dim();
  const Eigen::SelfAdjointEigenSolver<Matrix> es(h_a.entries());
  Matrix sigma = Matrix::Zero(n, n);
  double total = 0.0;
  std::vector<double> weights(static_cast<std::size_t>(n));
  for (double& w : weights) {
    w = rng.uniform(0.1, 1.0);
    total += w;
  }
  for (Index i = 0; i < n; ++i) {
    const Vector mode = es.eigenvectors().col(i);
    sigma += weights[static_cast<std::size_t>(i)] / total * (mode * mode.adjoint());
  }
  return DensityMatrix(sigma);
}

}  // namespace fixtures
