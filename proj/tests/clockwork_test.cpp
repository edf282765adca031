#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "powerbound/bounds.hpp"
#include "powerbound/clockwork.hpp"
#include "powerbound/machine.hpp"
#include "powerbound/operators.hpp"
#include "powerbound/random.hpp"
#include "powerbound/scenarios.hpp"

using namespace powerbound;

namespace {

/// Smooth random packet: a few Fourier-sine harmonics on [left, right], so the
/// boundary values vanish by construction.
ClockWavefunction random_packet(double left, double right, int n, Rng& rng) {
  const int harmonics = rng.uniform_int(1, 4);
  std::vector<Complex> coeffs;
  for (int k = 0; k < harmonics; ++k)
    coeffs.push_back(Complex{rng.normal(), rng.normal()});
  const double span = right - left;
  return make_wavefunction(left, right, n, [=](double x) {
    Complex value{0.0, 0.0};
    for (int k = 0; k < harmonics; ++k)
      value += coeffs[static_cast<std::size_t>(k)] *
               std::sin((k + 1) * M_PI * (x - left) / span);
    return value;
  });
}

/// Qubit machine H_S = diag(-c, c) flipped by a profile engineered from the
/// target u; the packet is the given one.
ClockMachineSpec qubit_spec_with_packet(const ClockWavefunction& psi, double c,
                                        double window, int steps) {
  Matrix hs(2, 2);
  hs << -c, 0.0, 0.0, c;
  Matrix rho = Matrix::Zero(2, 2);
  rho(1, 1) = 1.0;
  Operator h_s{Matrix(hs)};
  InteractionProfile profile = build_vs_from_unitary(
      UnitaryOperator(pauli_x()),
      [=](double s) { return raised_cosine_bump(s, 0.0, window); }, 0.0, window,
      steps, h_s, 1.0, 1.0);
  return ClockMachineSpec{std::move(h_s), DensityMatrix(std::move(rho)),
                          std::move(profile), {{1.0, psi}}, 1.0, 1.0};
}

}  // namespace

TEST_SUITE("clockwork") {

TEST_CASE("simpson weights integrate smooth functions at high order") {
  const int n = 201;
  const double dx = M_PI / (n - 1);
  const RealVector weights = simpson_weights(n, dx);
  CHECK(weights.sum() == doctest::Approx(M_PI).epsilon(1e-12));
  double integral = 0.0;
  for (int j = 0; j < n; ++j) integral += weights(j) * std::sin(j * dx);
  CHECK(integral == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("optimal packet has the advertised shape and moments") {
  const double l = 1.7;
  const int n = 1001;
  const ClockWavefunction psi = optimal_wavefunction(l, n);
  CHECK(psi.left == doctest::Approx(-l));
  CHECK(psi.right == doctest::Approx(0.0));
  // Midpoint value sqrt(2/L); endpoints exactly zero.
  CHECK(std::abs(psi.amplitudes(0)) < 1e-14);
  CHECK(std::abs(psi.amplitudes(n - 1)) < 1e-14);
  CHECK(std::abs(psi.amplitudes((n - 1) / 2)) ==
        doctest::Approx(std::sqrt(2.0 / l)).epsilon(1e-6));
  // Simpson mass is exactly one.
  const RealVector weights = simpson_weights(n, psi.dx());
  double mass = 0.0;
  for (int j = 0; j < n; ++j) mass += weights(j) * std::norm(psi.amplitudes(j));
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-13));
  // Momentum variance (pi hbar / L)^2 up to O(dx^2); the mean vanishes for a
  // real packet.
  const double hbar = 1.3;
  const MomentumMoments moments = clock_momentum_moments(psi, hbar);
  CHECK(std::abs(moments.mean) < 1e-10);
  const double target = std::pow(M_PI * hbar / l, 2.0);
  CHECK(std::abs(moments.second - moments.mean * moments.mean - target) <
        50.0 * psi.dx() * psi.dx() * target);
}

TEST_CASE("plane-wave modulation shifts the momentum mean, not the variance") {
  const double l = 1.0;
  const int n = 801;
  const double k0 = 4.0;
  const ClockWavefunction base = optimal_wavefunction(l, n);
  const ClockWavefunction boosted =
      make_wavefunction(-l, 0.0, n, [=](double x) {
        return std::sqrt(2.0 / l) * std::sin(-M_PI * x / l) *
               std::exp(Complex{0.0, k0 * x});
      });
  const double hbar = 1.0;
  const MomentumMoments still = clock_momentum_moments(base, hbar);
  const MomentumMoments moving = clock_momentum_moments(boosted, hbar);
  CHECK(moving.mean == doctest::Approx(hbar * k0).epsilon(1e-4));
  const double var_still = still.second - still.mean * still.mean;
  const double var_moving = moving.second - moving.mean * moving.mean;
  // The second-order stencil's truncation error grows with the modulation
  // wavenumber, so the two variances agree only to O(dx^2 k0^2 (k0^2 + pi^2)).
  CHECK(var_moving == doctest::Approx(var_still).epsilon(1e-4));
  // nu scales the clock energy spread linearly.
  CHECK(clock_energy_variance(base, hbar, 2.0) ==
        doctest::Approx(4.0 * var_still).epsilon(1e-12));
}

TEST_CASE("variational ground state converges to the optimal packet") {
  const double l = 1.0;
  const int n = 401;
  const ClockWavefunction ground = variational_minimize(l, n);
  const ClockWavefunction target = optimal_wavefunction(l, n);
  // Node-free and phase-aligned: all interior amplitudes strictly positive.
  for (int j = 1; j + 1 < n; ++j) {
    CHECK(std::real(ground.amplitudes(j)) > 0.0);
    CHECK(std::abs(std::imag(ground.amplitudes(j))) < 1e-14);
  }
  const RealVector weights = simpson_weights(n, ground.dx());
  Complex overlap{0.0, 0.0};
  for (int j = 0; j < n; ++j)
    overlap += weights(j) * std::conj(target.amplitudes(j)) * ground.amplitudes(j);
  CHECK(std::abs(overlap) > 1.0 - 1e-5);
}

TEST_CASE("variational eigenvalue converges at second order") {
  const double l = 2.0;
  const double target = std::pow(M_PI / l, 2.0);
  auto rayleigh = [&](int n) {
    const ClockWavefunction psi = variational_minimize(l, n);
    // <P^2>/hbar^2 in the packet is the Dirichlet Rayleigh quotient.
    const MomentumMoments moments = clock_momentum_moments(psi, 1.0);
    return moments.second;
  };
  const double coarse = std::abs(rayleigh(101) - target);
  const double fine = std::abs(rayleigh(201) - target);
  const double ratio = coarse / fine;
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("wavefunction construction enforces the grid contract") {
  auto smooth = [](double x) {
    return Complex{std::sin(M_PI * (x + 1.0)) + 0.5 * std::sin(2.0 * M_PI * (x + 1.0)),
                   0.0};
  };
  CHECK_THROWS(make_wavefunction(-1.0, 0.0, 4, smooth));    // even point count
  CHECK_THROWS(make_wavefunction(-1.0, 0.0, 3, smooth));    // too few points
  CHECK_THROWS(make_wavefunction(0.0, -1.0, 101, smooth));  // empty support
  CHECK_THROWS(make_wavefunction(-1.0, 0.0, 101,
                                 [](double) { return Complex{0.0, 0.0}; }));
  // Samplers that fail to vanish at the walls leave the quadrature and plain
  // Riemann masses inconsistent and are rejected.
  CHECK_THROWS(make_wavefunction(-1.0, 0.0, 101,
                                 [](double) { return Complex{1.0, 0.0}; }));
  const ClockWavefunction psi = make_wavefunction(-1.0, 0.0, 101, smooth);
  CHECK(std::abs(psi.amplitudes(0)) < 1e-15);
  CHECK(std::abs(psi.amplitudes(100)) < 1e-15);
  const RealVector weights = simpson_weights(101, psi.dx());
  double mass = 0.0;
  for (int j = 0; j < 101; ++j) mass += weights(j) * std::norm(psi.amplitudes(j));
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("profile sampling sits at midpoints and vanishes outside the support") {
  const InteractionProfile profile = make_profile(
      0.0, 1.0, 10, [](double s) { return Matrix(s * pauli_z()); });
  CHECK(profile.steps() == 10);
  CHECK(profile.s(0) == doctest::Approx(0.05));
  CHECK(profile.s(9) == doctest::Approx(0.95));
  CHECK((profile.samples[3] - 0.35 * pauli_z()).cwiseAbs().maxCoeff() <
        1e-14);
  CHECK(profile.at(-0.2, 2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(profile.at(1.2, 2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((profile.at(0.35, 2) - 0.35 * pauli_z()).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("profiles reject non-hermitian samples") {
  Matrix skew(2, 2);
  skew << Complex{0.0, 0.0}, Complex{1.0, 0.0}, Complex{0.0, 0.0}, Complex{0.0, 0.0};
  CHECK_THROWS(make_profile(0.0, 1.0, 4, [&](double) { return skew; }));
}

TEST_CASE("raised cosine bump is a smooth window") {
  CHECK(raised_cosine_bump(0.0, 0.0, 1.0) == doctest::Approx(0.0));
  CHECK(raised_cosine_bump(1.0, 0.0, 1.0) == doctest::Approx(0.0));
  const double eps = 1e-6;
  CHECK(raised_cosine_bump(eps, 0.0, 1.0) < 1e-10);  // vanishing slope
  CHECK(raised_cosine_bump(0.5, 0.0, 1.0) == doctest::Approx(1.0));
  CHECK(raised_cosine_bump(0.3, 0.0, 1.0) > 0.0);
  CHECK(raised_cosine_bump(-0.1, 0.0, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("profile built from a target unitary reproduces it") {
  Matrix hs(2, 2);
  hs << -1.0, 0.0, 0.0, 1.0;
  const Operator h_s{Matrix(hs)};
  SUBCASE("qubit flip") {
    const InteractionProfile profile = build_vs_from_unitary(
        UnitaryOperator(pauli_x()),
        [](double s) { return raised_cosine_bump(s, 0.0, 0.05); }, 0.0, 0.05, 512,
        h_s, 1.0, 1.0);
    const UnitaryOperator rebuilt = effective_unitary(profile, h_s, 1.0, 1.0);
    CHECK((rebuilt.entries() - pauli_x()).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("haar target on a qutrit, off-unit speed and hbar") {
    Rng rng(4201);
    const Operator h3 = gue(3, rng);
    const UnitaryOperator target = haar_unitary(3, rng);
    const double hbar = 0.7;
    const double nu = 1.4;
    const InteractionProfile profile = build_vs_from_unitary(
        target, [](double s) { return raised_cosine_bump(s, -0.1, 0.2); }, -0.1,
        0.2, 1024, h3, hbar, nu);
    const UnitaryOperator rebuilt = effective_unitary(profile, h3, hbar, nu);
    CHECK((rebuilt.entries() - target.entries()).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("effective unitary stays unitary on rough profiles") {
  Rng rng(4202);
  for (int trial = 0; trial < 4; ++trial) {
    const Index dim = rng.uniform_int(2, 4);
    const InteractionProfile profile = make_profile(
        0.0, 0.4, 48, [&](double) { return gue(dim, rng).entries(); });
    const Operator h_s = gue(dim, rng);
    const UnitaryOperator u = effective_unitary(profile, h_s, 1.0, 0.8);
    CHECK((u.entries() * u.entries().adjoint() - identity_matrix(dim))
              .cwiseAbs()
              .maxCoeff() < 1e-9);
  }
}

TEST_CASE("effective unitary converges at second order in the step size") {
  Rng rng(4203);
  const Operator h_s = gue(2, rng);
  const Operator kick = gue(2, rng);
  auto smooth_profile = [&](int steps) {
    return make_profile(0.0, 0.5, steps, [&](double s) {
      return Matrix(raised_cosine_bump(s, 0.0, 0.5) * kick.entries());
    });
  };
  const Matrix reference =
      effective_unitary(smooth_profile(4096), h_s, 1.0, 1.0).entries();
  const double coarse =
      (effective_unitary(smooth_profile(64), h_s, 1.0, 1.0).entries() - reference)
          .cwiseAbs()
          .maxCoeff();
  const double fine =
      (effective_unitary(smooth_profile(128), h_s, 1.0, 1.0).entries() - reference)
          .cwiseAbs()
          .maxCoeff();
  const double ratio = coarse / fine;
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("zero profiles integrate to the identity") {
  const InteractionProfile profile = make_profile(
      0.0, 0.3, 16, [](double) { return Matrix(Matrix::Zero(3, 3)); });
  Rng rng(4204);
  const Operator h_s = gue(3, rng);
  const UnitaryOperator u = effective_unitary(profile, h_s, 1.0, 1.0);
  CHECK((u.entries() - identity_matrix(3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dressing delays the sweep by the travel time") {
  Rng rng(4205);
  const Operator h_s = gue(3, rng);
  const UnitaryOperator u = haar_unitary(3, rng);
  SUBCASE("no delay at the origin") {
    const UnitaryOperator dressed = dressed_unitary(u, 0.0, h_s, 1.0, 1.0);
    CHECK((dressed.entries() - u.entries()).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("commuting sweeps are delay-free") {
    const UnitaryOperator exp_h = propagator(h_s, 0.9);
    const UnitaryOperator dressed = dressed_unitary(exp_h, -0.7, h_s, 1.0, 1.3);
    CHECK((dressed.entries() - exp_h.entries()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("qubit off-diagonals pick up e^{+-2 i c x / hbar}") {
    Matrix hs(2, 2);
    hs << -1.0, 0.0, 0.0, 1.0;
    const Operator qubit_h{Matrix(hs)};
    const UnitaryOperator flip(pauli_x());
    const double x = -0.37;
    const UnitaryOperator dressed = dressed_unitary(flip, x, qubit_h, 1.0, 1.0);
    const Complex phase = std::exp(Complex{0.0, 2.0 * x});
    CHECK(std::abs(dressed.entries()(0, 1) - phase) < 1e-12);
    CHECK(std::abs(dressed.entries()(1, 0) - std::conj(phase)) < 1e-12);
    CHECK(std::abs(dressed.entries()(0, 0)) < 1e-14);
    CHECK(std::abs(dressed.entries()(1, 1)) < 1e-14);
  }
}

TEST_CASE("work is independent of the packet riding the profile") {
  Rng rng(4206);
  const ClockWavefunction psi1 = optimal_wavefunction(1.0, 201);
  const ClockWavefunction psi2 = random_packet(-1.0, 0.0, 201, rng);
  const ClockWavefunction psi3 = random_packet(-1.0, 0.0, 301, rng);
  ClockMachineSpec spec = qubit_spec_with_packet(psi1, 1.0, 0.05, 1024);
  const double w1 = clock_work(spec);
  spec.ensemble = {{1.0, psi2}};
  const double w2 = clock_work(spec);
  spec.ensemble = {{1.0, psi3}};
  const double w3 = clock_work(spec);
  CHECK(w1 == doctest::Approx(w2).epsilon(1e-12));
  CHECK(w1 == doctest::Approx(w3).epsilon(1e-12));
  CHECK(w1 == doctest::Approx(2.0).epsilon(1e-11));  // full transfer moves 2c
}

TEST_CASE("final state is exactly packet-independent for a commuting profile") {
  // With [V_S(s), H_S] = 0 the dressing cancels identically, so the final
  // state cannot depend on which packet swept the window -- at any profile
  // resolution.
  Rng rng(4207);
  const Operator h_s = gue(3, rng);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(h_s.entries());
  const Vector mode = es.eigenvectors().col(0);
  const Matrix projector = mode * mode.adjoint();
  ClockMachineSpec spec{h_s,
                        random_density(3, rng),
                        make_profile(0.0, 0.2, 24,
                                     [&](double s) {
                                       return Matrix(raised_cosine_bump(s, 0.0, 0.2) *
                                                     projector);
                                     }),
                        {{1.0, optimal_wavefunction(1.0, 201)}},
                        1.0,
                        1.0};
  const DensityMatrix first = final_system_state(spec);
  spec.ensemble = {{1.0, random_packet(-1.0, 0.0, 257, rng)}};
  const DensityMatrix second = final_system_state(spec);
  CHECK((first.entries() - second.entries()).cwiseAbs().maxCoeff() < 1e-12);
  // The kick is invisible in energy but not in the state.
  CHECK(std::abs(clock_work(spec)) < 1e-12);
  const UnitaryOperator free_u = propagator(h_s, spec.tau());
  const Matrix free_state =
      free_u.entries() * spec.rho_s.entries() * free_u.entries().adjoint();
  CHECK((first.entries() - free_state).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("final state is packet-independent when the flip permutes the eigenbasis") {
  // The engineered profile realizes the flip exactly (its interaction-picture
  // steps commute), so the invariance survives at roundoff level.
  Rng rng(4217);
  ClockMachineSpec spec =
      qubit_spec_with_packet(optimal_wavefunction(1.0, 201), 1.0, 0.05, 1024);
  const DensityMatrix first = final_system_state(spec);
  spec.ensemble = {{1.0, random_packet(-1.0, 0.0, 257, rng)}};
  const DensityMatrix second = final_system_state(spec);
  CHECK((first.entries() - second.entries()).cwiseAbs().maxCoeff() < 1e-11);
  CHECK(first.entries()(0, 0).real() == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("final energy is consistent with the final state") {
  Rng rng(4208);
  RandomClockParams params;
  params.psi_points = 129;
  params.profile_steps = 64;
  for (int i = 0; i < 3; ++i) {
    const ClockMachineSpec spec = random_clock_spec(derive_seed(4208, i), params);
    const double direct = final_energy(spec);
    const double via_state = expectation(spec.h_s, final_system_state(spec));
    CHECK(direct == doctest::Approx(via_state).epsilon(1e-10));
    CHECK(clock_work(spec) ==
          doctest::Approx(expectation(spec.h_s, spec.rho_s) - direct).epsilon(1e-10));
  }
}

TEST_CASE("a zero profile leaves only free system evolution") {
  Rng rng(4209);
  ClockMachineSpec spec{gue(3, rng),
                        random_density(3, rng),
                        make_profile(0.0, 0.2, 8,
                                     [](double) { return Matrix(Matrix::Zero(3, 3)); }),
                        {{1.0, optimal_wavefunction(0.8, 129)}},
                        1.0,
                        1.0};
  const DensityMatrix advanced = final_system_state(spec);
  const UnitaryOperator u = propagator(spec.h_s, spec.tau());
  const Matrix expected = u.entries() * spec.rho_s.entries() * u.entries().adjoint();
  CHECK((advanced.entries() - expected).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(clock_work(spec)) < 1e-10);
}

TEST_CASE("semi-analytic route matches dense lattice evolution") {
  SUBCASE("second-order gap shrink on a well-resolved window") {
    const ClockMachineSpec spec =
        qubit_spec_with_packet(optimal_wavefunction(1.0, 513), 1.0, 0.3, 1024);
    const DensityMatrix reference = final_system_state(spec);
    auto state_gap = [&](int steps) {
      const LatticeClock lattice = make_clock_lattice(spec, steps);
      const EvolutionResult result = lattice_simulate(spec, lattice);
      return trace_norm(
          Operator(result.rho_s_final.entries() - reference.entries()));
    };
    const double coarse = state_gap(48);
    const double fine = state_gap(96);
    CHECK(fine < 0.02);
    const double ratio = coarse / fine;
    CHECK(ratio > 2.5);
    CHECK(ratio < 6.0);
  }
  SUBCASE("agreement on a randomly drawn machine") {
    RandomClockParams params;
    params.psi_points = 513;
    params.profile_steps = 512;
    const ClockMachineSpec spec = random_clock_spec(derive_seed(4210, 0), params);
    const LatticeClock lattice = make_clock_lattice(spec, 96);
    const EvolutionResult result = lattice_simulate(spec, lattice);
    const double gap = trace_norm(
        Operator(result.rho_s_final.entries() - final_system_state(spec).entries()));
    CHECK(gap < 0.05);
  }
}

TEST_CASE("lattice energy bookkeeping closes against the quadrature work") {
  RandomClockParams params;
  params.psi_points = 257;
  params.profile_steps = 256;
  // Keep the interaction window wide enough for the lattice to resolve.
  params.l_min = 0.8;
  params.k_frac_min = 0.2;
  const ClockMachineSpec spec = random_clock_spec(derive_seed(4211, 0), params);
  const LatticeClock lattice = make_clock_lattice(spec, 64);
  const BipartiteModel model = lattice_model(spec, lattice);
  const EvolutionResult result = evolve_total(model, model.tau());
  const double agent_gain = expectation(model.h_a(), result.sigma_a_final) -
                            expectation(model.h_a(), model.sigma_a());
  CHECK(std::abs(agent_gain - clock_work(spec)) < 20.0 * lattice.dx * lattice.dx);
}

TEST_CASE("momentum distributions are normalized and match a plain DFT") {
  Rng rng(4212);
  const LatticeClock lattice = make_lattice(40, 40, 0.05);
  const ClockWavefunction psi = random_packet(-1.6, -0.2, 257, rng);
  const Vector embedded = lattice_embed(lattice, psi);
  CHECK(std::abs(embedded.squaredNorm() - 1.0) < 1e-12);

  const LatticeDistribution dist = momentum_distribution(embedded, lattice, 1.0, 1.0);
  CHECK(std::abs(dist.probability.sum() - 1.0) < 1e-10);
  for (int i = 0; i + 1 < dist.energy.size(); ++i)
    CHECK(dist.energy(i) < dist.energy(i + 1));

  const std::vector<double> expected = oracles::dft_mode_probabilities(embedded);
  REQUIRE(static_cast<int>(expected.size()) == dist.probability.size());
  for (int i = 0; i < dist.probability.size(); ++i)
    CHECK(std::abs(dist.probability(i) - expected[static_cast<std::size_t>(i)]) <
          1e-10);

  // The wavefunction overload embeds and transforms in one step.
  const LatticeDistribution direct = momentum_distribution(psi, lattice, 1.0, 1.0);
  CHECK((direct.probability - dist.probability).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("a ring eigenmode carries a point-mass distribution") {
  const LatticeClock lattice = make_lattice(15, 15, 0.1);
  const Matrix modes = lattice_mode_matrix(lattice);
  const int pick = 7;  // some mode in the band
  const Vector state = modes.col(pick);
  const LatticeDistribution dist = momentum_distribution(state, lattice, 1.0, 2.0);
  for (int i = 0; i < dist.probability.size(); ++i) {
    if (i == pick)
      CHECK(dist.probability(i) == doctest::Approx(1.0).epsilon(1e-12));
    else
      CHECK(dist.probability(i) < 1e-12);
  }
  // Energies are hbar nu k over the symmetric band.
  const int half = (lattice.sites - 1) / 2;
  const double k = 2.0 * M_PI * (pick - half) / (lattice.sites * lattice.dx);
  CHECK(dist.energy(pick) == doctest::Approx(2.0 * k).epsilon(1e-12));
}

TEST_CASE("the agent's momentum gain accounts for the work") {
  // Window wide enough for the lattice to resolve (the production machine's
  // K/L = 0.01 window is for the semi-analytic route only).
  const ClockMachineSpec spec =
      qubit_spec_with_packet(optimal_wavefunction(1.0, 513), 1.0, 0.25, 512);
  const LatticeClock lattice = make_clock_lattice(spec, 96);
  const EvolutionResult result = lattice_simulate(spec, lattice);

  const LatticeDistribution before =
      momentum_distribution(spec.ensemble.front().psi, lattice, spec.hbar, spec.nu);
  const LatticeDistribution after =
      momentum_distribution(result.sigma_a_final, lattice, spec.hbar, spec.nu);
  const double mean_before = (before.energy.array() * before.probability.array()).sum();
  const double mean_after = (after.energy.array() * after.probability.array()).sum();
  CHECK(std::abs((mean_after - mean_before) - clock_work(spec)) <
        20.0 * lattice.dx * lattice.dx);
}

TEST_CASE("sweep time times energy spread never beats the packet floor") {
  Rng rng(4213);
  for (int trial = 0; trial < 10; ++trial) {
    const double l = rng.uniform(0.5, 2.0);
    ClockMachineSpec spec = qubit_spec_with_packet(
        random_packet(-l, 0.0, 257, rng), 1.0, 0.02 * l, 64);
    const CheckReport report = check_clock_uncertainty(spec, 1e-6);
    CHECK(report.pass);
    CHECK(spec.tau() * clock_delta_h_a(spec) >= M_PI * spec.hbar - 1e-6);
  }
}

TEST_CASE("the optimal packet sits near the uncertainty floor") {
  const QubitSaturationParams params;
  const ClockMachineSpec spec = make_qubit_clock_spec(params);
  const double product = spec.tau() * clock_delta_h_a(spec);
  CHECK(product >= M_PI * spec.hbar - 1e-9);
  CHECK(product <= M_PI * spec.hbar * 1.02);
}

TEST_CASE("clock machines satisfy the structural switch-on condition") {
  RandomClockParams params;
  params.psi_points = 129;
  params.profile_steps = 64;
  for (int i = 0; i < 3; ++i) {
    const ClockMachineSpec spec = random_clock_spec(derive_seed(4214, i), params);
    CHECK(check_condition1_clock(spec).pass);
  }
}

TEST_CASE("spec validation rejects malformed machines") {
  ClockMachineSpec good = qubit_spec_with_packet(optimal_wavefunction(1.0, 129),
                                                 1.0, 0.05, 64);
  CHECK_NOTHROW(validate_spec(good));

  ClockMachineSpec overlap = good;
  // Packet support must end where the profile begins, not inside it.
  overlap.ensemble.front().psi = optimal_wavefunction(1.0, 129);
  overlap.ensemble.front().psi.left += 0.5;
  overlap.ensemble.front().psi.right += 0.5;
  CHECK_THROWS(validate_spec(overlap));

  ClockMachineSpec bad_speed = good;
  bad_speed.nu = 0.0;
  CHECK_THROWS(validate_spec(bad_speed));

  ClockMachineSpec bad_weight = good;
  bad_weight.ensemble.front().weight = -0.5;
  CHECK_THROWS(validate_spec(bad_weight));

  ClockMachineSpec wrong_dim = good;
  wrong_dim.profile = make_profile(0.0, 0.05, 16,
                                   [](double) { return Matrix(Matrix::Zero(3, 3)); });
  CHECK_THROWS(validate_spec(wrong_dim));

  ClockMachineSpec empty = good;
  empty.ensemble.clear();
  CHECK_THROWS(validate_spec(empty));
}

TEST_CASE("mixtures spread the clock energy across their components") {
  Rng rng(4215);
  const ClockWavefunction slow = optimal_wavefunction(1.0, 257);
  const ClockWavefunction fast = make_wavefunction(-1.0, 0.0, 257, [](double x) {
    return std::sin(-M_PI * x) * std::exp(Complex{0.0, 6.0 * x});
  });
  ClockMachineSpec spec = qubit_spec_with_packet(slow, 1.0, 0.05, 64);
  spec.ensemble = {{0.5, slow}, {0.5, fast}};
  CHECK_NOTHROW(validate_spec(spec));

  // Mixture spread via the lattice operators as an independent route.
  const LatticeClock lattice = make_clock_lattice(spec, 96);
  const BipartiteModel model = lattice_model(spec, lattice);
  const double direct = clock_delta_h_a(spec);
  const double via_lattice =
      std::sqrt(variance(model.h_a(), model.sigma_a()));
  CHECK(std::abs(direct - via_lattice) < 30.0 * lattice.dx * lattice.dx +
                                             1e-4 * direct);
}

}  // TEST_SUITE
