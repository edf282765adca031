#include "powerbound/clockwork.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace powerbound {

namespace {

constexpr double kPi = std::numbers::pi;

// In the eigenbasis of H with eigenvalues lam, multiply entries by
// e^{+i s (lam_m - lam_n)}; s carries the sign and the 1/hbar.
void twirl(Matrix& b, const RealVector& lam, double s) {
  for (Index m = 0; m < b.rows(); ++m)
    for (Index n = 0; n < b.cols(); ++n)
      b(m, n) *= std::exp(Complex{0.0, s * (lam(m) - lam(n))});
}

Spectral decompose_hermitian(const Operator& h, const char* what) {
  if (!h.is_hermitian())
    throw std::invalid_argument(std::string(what) + ": Hamiltonian must be Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.entries());
  if (es.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": eigendecomposition failed");
  return Spectral{es.eigenvalues(), es.eigenvectors()};
}

void finalize_wavefunction(ClockWavefunction& psi) {
  const int n = psi.points();
  if (n < 5 || n % 2 == 0)
    throw std::invalid_argument("ClockWavefunction: grid needs an odd point count >= 5");
  if (!(psi.right > psi.left))
    throw std::invalid_argument("ClockWavefunction: empty support");
  psi.amplitudes(0) = Complex{0.0, 0.0};
  psi.amplitudes(n - 1) = Complex{0.0, 0.0};
  const RealVector w = simpson_weights(n, psi.dx());
  double mass = 0.0;
  for (int j = 0; j < n; ++j) mass += w(j) * std::norm(psi.amplitudes(j));
  if (mass <= 0.0)
    throw std::invalid_argument("ClockWavefunction: zero norm");
  const double scale = 1.0 / std::sqrt(mass);
  psi.amplitudes *= scale;
  if (psi.form) {
    auto raw = psi.form;
    psi.form = [raw, scale](double x) { return scale * raw(x); };
  }
  // The plain Riemann mass must agree with the quadrature mass.
  double plain = 0.0;
  for (int j = 0; j < n; ++j) plain += std::norm(psi.amplitudes(j));
  plain *= psi.dx();
  if (std::abs(plain - 1.0) > 1e-10)
    throw std::runtime_error("ClockWavefunction: grid too coarse for a consistent norm");
}

Complex interp_wavefunction(const ClockWavefunction& psi, double x) {
  if (x <= psi.left || x >= psi.right) return Complex{0.0, 0.0};
  const double u = (x - psi.left) / psi.dx();
  const int j = std::min(static_cast<int>(u), psi.points() - 2);
  const double f = u - j;
  return (1.0 - f) * psi.amplitudes(j) + f * psi.amplitudes(j + 1);
}

Complex eval_wavefunction(const ClockWavefunction& psi, double x) {
  if (x <= psi.left || x >= psi.right) return Complex{0.0, 0.0};
  return psi.form ? psi.form(x) : interp_wavefunction(psi, x);
}

// Central differences, second-order one-sided stencils at the support edges.
Vector grid_derivative(const ClockWavefunction& psi) {
  const int n = psi.points();
  const double dx = psi.dx();
  const Vector& a = psi.amplitudes;
  Vector d(n);
  d(0) = (-3.0 * a(0) + 4.0 * a(1) - a(2)) / (2.0 * dx);
  d(n - 1) = (3.0 * a(n - 1) - 4.0 * a(n - 2) + a(n - 3)) / (2.0 * dx);
  for (int j = 1; j < n - 1; ++j) d(j) = (a(j + 1) - a(j - 1)) / (2.0 * dx);
  return d;
}

}  // namespace

RealVector simpson_weights(int n, double dx) {
  if (n < 3 || n % 2 == 0)
    throw std::invalid_argument("simpson_weights: odd n >= 3 required");
  RealVector w(n);
  w(0) = w(n - 1) = dx / 3.0;
  for (int j = 1; j < n - 1; ++j) w(j) = (j % 2 == 1 ? 4.0 : 2.0) * dx / 3.0;
  return w;
}

ClockWavefunction make_wavefunction(double left, double right, int n,
                                    const std::function<Complex(double)>& sampler) {
  ClockWavefunction psi;
  psi.left = left;
  psi.right = right;
  psi.amplitudes = Vector(n);
  const double dx = (right - left) / (n - 1);
  for (int j = 0; j < n; ++j) psi.amplitudes(j) = sampler(left + j * dx);
  psi.form = sampler;
  finalize_wavefunction(psi);
  return psi;
}

ClockWavefunction optimal_wavefunction(double l, int n) {
  if (l <= 0.0) throw std::invalid_argument("optimal_wavefunction: support length must be positive");
  const double amp = std::sqrt(2.0 / l);
  return make_wavefunction(-l, 0.0, n, [l, amp](double x) {
    return Complex{amp * std::sin(-kPi * x / l), 0.0};
  });
}

namespace {

// Solve (T - shift) v = b for the symmetric tridiagonal T = tridiag(off, diag, off).
RealVector tridiag_shifted_solve(const RealVector& diag, double off, double shift,
                                 RealVector b) {
  const Index m = diag.size();
  RealVector c(m);
  double piv = diag(0) - shift;
  if (std::abs(piv) < 1e-280) piv = (piv < 0 ? -1e-280 : 1e-280);
  c(0) = off / piv;
  b(0) /= piv;
  for (Index i = 1; i < m; ++i) {
    piv = diag(i) - shift - off * c(i - 1);
    if (std::abs(piv) < 1e-280) piv = (piv < 0 ? -1e-280 : 1e-280);
    c(i) = off / piv;
    b(i) = (b(i) - off * b(i - 1)) / piv;
  }
  for (Index i = m - 2; i >= 0; --i) b(i) -= c(i) * b(i + 1);
  return b;
}

}  // namespace

ClockWavefunction variational_minimize(double l, int n) {
  if (l <= 0.0) throw std::invalid_argument("variational_minimize: support length must be positive");
  if (n < 16)
    throw std::invalid_argument("variational_minimize: grid too coarse (n >= 17 required)");
  if (n % 2 == 0)
    throw std::invalid_argument("variational_minimize: odd point count required");
  const double dx = l / (n - 1);
  const Index m = n - 2;  // interior points, Dirichlet walls
  RealVector diag = RealVector::Constant(m, 2.0 / (dx * dx));
  RealVector off_v = RealVector::Constant(m - 1, -1.0 / (dx * dx));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off_v, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("variational_minimize: tridiagonal eigensolve failed");
  const double lambda0 = es.eigenvalues()(0);

  // Inverse iteration pins the ground vector; the spectral gap of the
  // Dirichlet second-difference operator makes one or two sweeps plenty.
  RealVector v = RealVector::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)));
  for (int sweep = 0; sweep < 3; ++sweep) {
    v = tridiag_shifted_solve(diag, -1.0 / (dx * dx), lambda0 * (1.0 - 1e-12), v);
    v.normalize();
  }
  if (v.sum() < 0.0) v = -v;

  ClockWavefunction psi;
  psi.left = -l;
  psi.right = 0.0;
  psi.amplitudes = Vector::Zero(n);
  for (Index i = 0; i < m; ++i) psi.amplitudes(i + 1) = Complex{std::max(v(i), 0.0), 0.0};
  finalize_wavefunction(psi);
  return psi;
}

MomentumMoments clock_momentum_moments(const ClockWavefunction& psi, double hbar) {
  const int n = psi.points();
  const RealVector w = simpson_weights(n, psi.dx());
  const Vector d = grid_derivative(psi);
  double second = 0.0;
  Complex overlap{0.0, 0.0};
  for (int j = 0; j < n; ++j) {
    second += w(j) * std::norm(d(j));
    overlap += w(j) * std::conj(psi.amplitudes(j)) * d(j);
  }
  MomentumMoments mm;
  mm.mean = hbar * overlap.imag();  // <P> = -i hbar <psi|psi'> is real
  mm.second = hbar * hbar * second;
  return mm;
}

double clock_energy_variance(const ClockWavefunction& psi, double hbar, double nu) {
  const MomentumMoments mm = clock_momentum_moments(psi, hbar);
  return std::max(0.0, nu * nu * (mm.second - mm.mean * mm.mean));
}

Matrix InteractionProfile::at(double s_eval, Index dim) const {
  if (s_eval <= left || s_eval >= right) return Matrix::Zero(dim, dim);
  if (form) return form(s_eval);
  const double step_width = ds();
  const double u = (s_eval - left) / step_width - 0.5;
  if (u <= 0.0) {
    const double f = (s_eval - left) / (0.5 * step_width);
    return f * samples.front();
  }
  if (u >= steps() - 1) {
    const double f = (right - s_eval) / (0.5 * step_width);
    return f * samples.back();
  }
  const int k = static_cast<int>(u);
  const double f = u - k;
  return (1.0 - f) * samples[k] + f * samples[k + 1];
}

InteractionProfile make_profile(double left, double right, int steps,
                                const std::function<Matrix(double)>& sampler) {
  if (!(right > left)) throw std::invalid_argument("InteractionProfile: empty support");
  if (steps < 1) throw std::invalid_argument("InteractionProfile: at least one step required");
  InteractionProfile p;
  p.left = left;
  p.right = right;
  p.samples.reserve(steps);
  const double ds = (right - left) / steps;
  for (int k = 0; k < steps; ++k) {
    Matrix m = sampler(left + (k + 0.5) * ds);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tolerances().hermitian * scale)
      throw std::invalid_argument("InteractionProfile: sample is not Hermitian");
    p.samples.push_back(std::move(m));
  }
  p.form = sampler;
  return p;
}

double raised_cosine_bump(double s, double left, double right) {
  if (s <= left || s >= right) return 0.0;
  const double u = (s - left) / (right - left);
  const double c = std::cos(kPi * (u - 0.5));
  return c * c;
}

InteractionProfile build_vs_from_unitary(const UnitaryOperator& u_target,
                                         const std::function<double(double)>& window,
                                         double left, double right, int steps,
                                         const Operator& h_s, double hbar, double nu) {
  if (hbar <= 0.0 || nu <= 0.0)
    throw std::invalid_argument("build_vs_from_unitary: hbar and nu must be positive");
  if (u_target.dim() != h_s.dim())
    throw std::invalid_argument("build_vs_from_unitary: dimension mismatch");
  const Operator log_u = unitary_log(u_target);
  const Spectral sp = decompose_hermitian(h_s, "build_vs_from_unitary");
  const Matrix b0 = sp.vectors.adjoint() * log_u.entries() * sp.vectors;

  if (steps < 1) throw std::invalid_argument("build_vs_from_unitary: at least one step required");
  const double ds = (right - left) / steps;
  double mass = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double f = window(left + (k + 0.5) * ds);
    if (f < 0.0) throw std::invalid_argument("build_vs_from_unitary: window must be nonnegative");
    mass += f * ds;
  }
  if (mass <= 0.0)
    throw std::invalid_argument("build_vs_from_unitary: window has zero discrete mass");

  // V_S(s) = i hbar nu f(s) e^{-i(s/nu)H_S/hbar} log(u) e^{+i(s/nu)H_S/hbar},
  // with f renormalized so the midpoint sum of f ds is exactly one. The
  // dressing is the inverse of the interaction-picture twirl a packet
  // component accumulates by the time it reaches s, so the time-ordered
  // integrand has constant direction log(u) and the sweep integrates to u.
  const RealVector lam = sp.values;
  const Matrix vecs = sp.vectors;
  auto sampler = [=](double s) -> Matrix {
    Matrix b = b0;
    twirl(b, lam, -s / (nu * hbar));
    return Complex{0.0, hbar * nu * window(s) / mass} * (vecs * b * vecs.adjoint());
  };
  return make_profile(left, right, steps, sampler);
}

UnitaryOperator effective_unitary(const InteractionProfile& profile,
                                  const Operator& h_s, double hbar, double nu) {
  if (hbar <= 0.0 || nu <= 0.0)
    throw std::invalid_argument("effective_unitary: hbar and nu must be positive");
  const Index d = h_s.dim();
  const Spectral sp = decompose_hermitian(h_s, "effective_unitary");
  const double dt = profile.ds() / nu;  // time to sweep one profile step

  Matrix g = Matrix::Identity(d, d);
  for (int k = 0; k < profile.steps(); ++k) {
    const Matrix& v = profile.samples[k];
    if (v.rows() != d)
      throw std::invalid_argument("effective_unitary: profile dimension mismatch");
    Matrix b = sp.vectors.adjoint() * v * sp.vectors;
    twirl(b, sp.values, profile.s(k) / (nu * hbar));  // interaction picture
    g = expm_skew(Matrix(Complex{0.0, -dt / hbar} * b)) * g;
  }
  Matrix u = sp.vectors * g * sp.vectors.adjoint();
  return UnitaryOperator(std::move(u), h_s.dims());
}

UnitaryOperator dressed_unitary(const UnitaryOperator& u, double x,
                                const Operator& h_s, double hbar, double nu) {
  if (nu <= 0.0) throw std::invalid_argument("dressed_unitary: nu must be positive");
  const Spectral sp = decompose_hermitian(h_s, "dressed_unitary");
  Matrix b = sp.vectors.adjoint() * u.entries() * sp.vectors;
  twirl(b, sp.values, -x / (nu * hbar));
  return UnitaryOperator(sp.vectors * b * sp.vectors.adjoint(), u.dims());
}

void validate_spec(const ClockMachineSpec& spec) {
  if (spec.ensemble.empty())
    throw std::invalid_argument("ClockMachineSpec: empty packet ensemble");
  if (spec.nu <= 0.0 || spec.hbar <= 0.0)
    throw std::invalid_argument("ClockMachineSpec: nu and hbar must be positive");
  if (!spec.h_s.is_hermitian())
    throw std::invalid_argument("ClockMachineSpec: H_S must be Hermitian");
  if (spec.rho_s.dim() != spec.h_s.dim())
    throw std::invalid_argument("ClockMachineSpec: rho_S dimension mismatch");
  for (const Matrix& m : spec.profile.samples)
    if (m.rows() != spec.h_s.dim())
      throw std::invalid_argument("ClockMachineSpec: profile dimension mismatch");

  const ClockWavefunction& first = spec.ensemble.front().psi;
  double total = 0.0;
  for (const auto& [weight, psi] : spec.ensemble) {
    if (weight <= 0.0) throw std::invalid_argument("ClockMachineSpec: weights must be positive");
    total += weight;
    if (psi.left != first.left || psi.right != first.right || psi.points() != first.points())
      throw std::invalid_argument("ClockMachineSpec: ensemble members must share one grid");
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("ClockMachineSpec: ensemble weights must sum to one");
  if (first.right > spec.profile.left + 1e-12)
    throw std::invalid_argument(
        "ClockMachineSpec: packet support must lie left of the interaction support");
  if (spec.tau() <= 0.0)
    throw std::invalid_argument("ClockMachineSpec: zero interaction window");
}

namespace {

// Per-grid-point weights sum_i p_i w_j |psi_i(x_j)|^2 shared by the final
// state and final energy quadratures.
RealVector quadrature_weights(const ClockMachineSpec& spec) {
  const ClockWavefunction& first = spec.ensemble.front().psi;
  const int n = first.points();
  const RealVector w = simpson_weights(n, first.dx());
  RealVector omega = RealVector::Zero(n);
  for (const auto& [weight, psi] : spec.ensemble)
    for (int j = 0; j < n; ++j)
      omega(j) += weight * w(j) * std::norm(psi.amplitudes(j));
  return omega;
}

}  // namespace

DensityMatrix final_system_state(const ClockMachineSpec& spec) {
  validate_spec(spec);
  const Spectral sp = decompose_hermitian(spec.h_s, "final_system_state");
  const UnitaryOperator u = effective_unitary(spec.profile, spec.h_s, spec.hbar, spec.nu);
  const Matrix u_eig = sp.vectors.adjoint() * u.entries() * sp.vectors;
  const Matrix rho_eig = sp.vectors.adjoint() * spec.rho_s.entries() * sp.vectors;

  const ClockWavefunction& first = spec.ensemble.front().psi;
  const RealVector omega = quadrature_weights(spec);
  const Index d = spec.h_s.dim();
  Matrix acc = Matrix::Zero(d, d);
  for (int j = 0; j < first.points(); ++j) {
    if (omega(j) == 0.0) continue;
    Matrix ux = u_eig;
    twirl(ux, sp.values, -first.x(j) / (spec.nu * spec.hbar));  // dressed unitary at x_j
    acc += omega(j) * (ux * rho_eig * ux.adjoint());
  }
  acc /= omega.sum();  // strip quadrature-mass roundoff; the exact mass is one
  twirl(acc, sp.values, -spec.tau() / spec.hbar);
  Matrix out = sp.vectors * acc * sp.vectors.adjoint();
  return DensityMatrix(std::move(out), {d}, DensityMatrix::Check::Basic);
}

double final_energy(const ClockMachineSpec& spec) {
  validate_spec(spec);
  const Spectral sp = decompose_hermitian(spec.h_s, "final_energy");
  const UnitaryOperator u = effective_unitary(spec.profile, spec.h_s, spec.hbar, spec.nu);
  const Matrix u_eig = sp.vectors.adjoint() * u.entries() * sp.vectors;
  const Matrix rho_eig = sp.vectors.adjoint() * spec.rho_s.entries() * sp.vectors;
  const Matrix a = u_eig.adjoint() * sp.values.asDiagonal().toDenseMatrix().cast<Complex>() * u_eig;

  const ClockWavefunction& first = spec.ensemble.front().psi;
  const RealVector omega = quadrature_weights(spec);
  const Index d = spec.h_s.dim();
  // tr[A rho(x)] with rho(x)_{mn} = rho_{mn} e^{+i x (lam_m - lam_n) / (nu hbar)},
  // the conjugation inverse to the dressing of U(x).
  double energy = 0.0;
  for (int j = 0; j < first.points(); ++j) {
    if (omega(j) == 0.0) continue;
    const double x = first.x(j);
    Complex tr{0.0, 0.0};
    for (Index m = 0; m < d; ++m)
      for (Index n = 0; n < d; ++n)
        tr += a(n, m) * rho_eig(m, n) *
              std::exp(Complex{0.0, x * (sp.values(m) - sp.values(n)) / (spec.nu * spec.hbar)});
    energy += omega(j) * tr.real();
  }
  // A convex combination of expectations of H_S lies in its spectral range;
  // dividing by the quadrature mass and clamping strips roundoff that would
  // otherwise let a work difference exceed the spectral diameter.
  energy /= omega.sum();
  return std::clamp(energy, sp.values.minCoeff(), sp.values.maxCoeff());
}

double clock_work(const ClockMachineSpec& spec) {
  return expectation(spec.h_s, spec.rho_s) - final_energy(spec);
}

double clock_delta_h_a(const ClockMachineSpec& spec) {
  double mean = 0.0, second = 0.0;
  for (const auto& [weight, psi] : spec.ensemble) {
    const MomentumMoments mm = clock_momentum_moments(psi, spec.hbar);
    mean += weight * mm.mean;
    second += weight * mm.second;
  }
  return spec.nu * std::sqrt(std::max(0.0, second - mean * mean));
}

double clock_commutator_norm(const ClockMachineSpec& spec) {
  const int r = static_cast<int>(spec.ensemble.size());
  const ClockWavefunction& first = spec.ensemble.front().psi;
  const int n = first.points();
  const RealVector w = simpson_weights(n, first.dx());

  // Columns: the packets, then H_A applied to each (H_A psi = -i hbar nu psi').
  Matrix cols(n, 2 * r);
  for (int i = 0; i < r; ++i) {
    const ClockWavefunction& psi = spec.ensemble[i].psi;
    cols.col(i) = psi.amplitudes;
    cols.col(r + i) = Complex{0.0, -spec.hbar * spec.nu} * grid_derivative(psi);
  }
  Matrix gram(2 * r, 2 * r);
  for (int a = 0; a < 2 * r; ++a)
    for (int b = 0; b < 2 * r; ++b) {
      Complex g{0.0, 0.0};
      for (int j = 0; j < n; ++j) g += w(j) * std::conj(cols(j, a)) * cols(j, b);
      gram(a, b) = g;
    }

  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  const double lam_max = es.eigenvalues().maxCoeff();
  std::vector<Index> kept;
  for (Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 1e-12 * lam_max) kept.push_back(i);
  Matrix t(2 * r, static_cast<Index>(kept.size()));
  for (std::size_t a = 0; a < kept.size(); ++a)
    t.col(a) = es.eigenvectors().col(kept[a]) / std::sqrt(es.eigenvalues()(kept[a]));

  // <e_a|psi_i> and <e_a|H_A psi_i> from the Gram matrix alone.
  const Matrix m1 = t.adjoint() * gram.leftCols(r);
  const Matrix m2 = t.adjoint() * gram.rightCols(r);
  RealVector p(r);
  for (int i = 0; i < r; ++i) p(i) = spec.ensemble[i].weight;
  const Matrix comm = m2 * p.asDiagonal() * m1.adjoint() - m1 * p.asDiagonal() * m2.adjoint();
  // Skew-Hermitian; i*comm is Hermitian with the same singular values.
  return trace_norm(Matrix(Complex{0.0, 1.0} * comm));
}

CheckReport check_clock_uncertainty(const ClockMachineSpec& spec, double tol) {
  const double dh = clock_delta_h_a(spec);
  const double product = spec.tau() * dh;
  const double floor_value = kPi * spec.hbar;

  CheckReport rep;
  rep.name = "clock_uncertainty";
  rep.tolerance = tol;
  rep.residual = std::max(0.0, floor_value - product);
  rep.pass = product >= floor_value - tol;
  rep.record("tau", spec.tau());
  rep.record("delta_h_a", dh);
  rep.record("product", product);
  rep.record("floor", floor_value);
  return rep;
}

CheckReport check_condition1_clock(const ClockMachineSpec& spec) {
  CheckReport rep;
  rep.name = "condition1_clock";
  rep.tolerance = 1e-12;
  rep.detail =
      "structural: packet supports lie left of the interaction support and translate "
      "further left for t <= 0, so the interaction annihilates the initial state at all "
      "switch-on times";

  double worst = 0.0;
  bool geometry = true;
  for (const auto& [weight, psi] : spec.ensemble) {
    worst = std::max({worst, std::abs(psi.amplitudes(0)), std::abs(psi.amplitudes(psi.points() - 1))});
    if (psi.right > spec.profile.left + 1e-12) geometry = false;
  }
  rep.residual = worst;
  rep.pass = geometry && worst <= rep.tolerance;
  if (!geometry) rep.detail = "packet support overlaps the interaction support";
  return rep;
}

bool LatticeClock::is_commensurate(double t, double nu) const {
  const double step = dx / nu;
  const double k = t / step;
  return std::abs(k - std::round(k)) < 1e-9;
}

LatticeClock make_lattice(int n_left, int n_right, double dx) {
  if (n_left < 0 || n_right < 0 || dx <= 0.0)
    throw std::invalid_argument("make_lattice: invalid geometry");
  LatticeClock lat;
  lat.sites = n_left + n_right + 1;
  if (lat.sites % 2 == 0)
    throw std::invalid_argument("make_lattice: odd site count required (symmetric momentum band)");
  lat.dx = dx;
  lat.x0 = -n_left * dx;
  return lat;
}

LatticeClock make_clock_lattice(const ClockMachineSpec& spec, int steps_across_tau,
                                double margin_lengths) {
  validate_spec(spec);
  if (steps_across_tau < 1)
    throw std::invalid_argument("make_clock_lattice: at least one step across tau");
  const double tau = spec.tau();
  // The packet sweeps nu*tau in distance; make that exactly steps_across_tau
  // lattice cells so the sweep time stays commensurate for any nu.
  const double dx = spec.nu * tau / steps_across_tau;
  const double l = spec.psi_span();
  const int n_left = static_cast<int>(std::ceil(l / dx)) + 2;
  int n_right = static_cast<int>(std::ceil(spec.nu * tau / dx)) + 2 +
                static_cast<int>(std::ceil(std::max(0.0, margin_lengths) * l / dx));
  if ((n_left + n_right + 1) % 2 == 0) ++n_right;
  return make_lattice(n_left, n_right, dx);
}

Matrix lattice_momentum(const LatticeClock& lattice, double hbar) {
  const int m = lattice.sites;
  Matrix p = Matrix::Zero(m, m);
  // Closed form of F^dag diag(hbar k) F on an odd ring: off-diagonal entries
  // -i pi hbar (-1)^r / (M dx sin(pi r / M)), r = j - l.
  for (int j = 0; j < m; ++j)
    for (int l = 0; l < m; ++l) {
      if (j == l) continue;
      const int r = j - l;
      const double sign = (r % 2 == 0) ? 1.0 : -1.0;
      p(j, l) = Complex{0.0, -kPi * hbar * sign / (m * lattice.dx * std::sin(kPi * r / m))};
    }
  return p;
}

Vector lattice_embed(const LatticeClock& lattice, const ClockWavefunction& psi) {
  Vector c = Vector::Zero(lattice.sites);
  const double root_dx = std::sqrt(lattice.dx);
  for (int j = 0; j < lattice.sites; ++j)
    c(j) = root_dx * eval_wavefunction(psi, lattice.x(j));
  const double norm = c.norm();
  if (norm <= 0.0)
    throw std::invalid_argument("lattice_embed: packet does not overlap the lattice");
  return c / norm;
}

BipartiteModel lattice_model(const ClockMachineSpec& spec, const LatticeClock& lattice) {
  validate_spec(spec);
  if (!lattice.is_commensurate(spec.tau(), spec.nu))
    throw std::invalid_argument(
        "lattice_model: tau must be a multiple of dx/nu (lattice-commensurate sweep)");
  const Index d = spec.h_s.dim();
  const int m = lattice.sites;

  const Matrix p = lattice_momentum(lattice, spec.hbar);
  Operator h_a(Matrix(spec.nu * p), {m});

  Matrix v = Matrix::Zero(d * m, d * m);
  for (int j = 0; j < m; ++j) {
    const double x = lattice.x(j);
    if (x <= spec.profile.left || x >= spec.profile.right) continue;
    const Matrix b = spec.profile.at(x, d);
    for (Index i = 0; i < d; ++i)
      for (Index k = 0; k < d; ++k) v(i * m + j, k * m + j) = b(i, k);
  }

  Matrix sigma = Matrix::Zero(m, m);
  for (const auto& [weight, psi] : spec.ensemble) {
    const Vector c = lattice_embed(lattice, psi);
    sigma += weight * (c * c.adjoint());
  }

  return BipartiteModel(spec.h_s, std::move(h_a), Operator(std::move(v), {d, m}),
                        spec.rho_s,
                        DensityMatrix(std::move(sigma), {m}, DensityMatrix::Check::Basic),
                        spec.tau(), spec.hbar);
}

EvolutionResult lattice_simulate(const ClockMachineSpec& spec, const LatticeClock& lattice) {
  const BipartiteModel model = lattice_model(spec, lattice);
  return evolve_total(model, model.tau());
}

double max_condition_window(const ClockMachineSpec& spec, const LatticeClock& lattice) {
  const double occupied_span = spec.profile.right - spec.ensemble.front().psi.left;
  const int occupied = static_cast<int>(std::round(occupied_span / lattice.dx)) + 1;
  return std::max(0, lattice.sites - occupied) * lattice.dx / spec.nu;
}

namespace {

// Plane-wave modes of the symmetric band, columns ordered by ascending k.
Matrix lattice_modes(const LatticeClock& lattice) {
  const int m = lattice.sites;
  const int h = (m - 1) / 2;
  Matrix modes(m, m);
  const double root = 1.0 / std::sqrt(static_cast<double>(m));
  for (int col = 0; col < m; ++col) {
    const int mode = col - h;
    const double k = 2.0 * kPi * mode / (m * lattice.dx);
    for (int j = 0; j < m; ++j)
      modes(j, col) = root * std::exp(Complex{0.0, k * lattice.x(j)});
  }
  return modes;
}

RealVector lattice_mode_energies(const LatticeClock& lattice, double hbar, double nu) {
  const int m = lattice.sites;
  const int h = (m - 1) / 2;
  RealVector e(m);
  for (int col = 0; col < m; ++col)
    e(col) = hbar * nu * 2.0 * kPi * (col - h) / (m * lattice.dx);
  return e;
}

}  // namespace

Matrix lattice_mode_matrix(const LatticeClock& lattice) { return lattice_modes(lattice); }

LatticeDistribution momentum_distribution(const Vector& state, const LatticeClock& lattice,
                                          double hbar, double nu) {
  if (state.size() != lattice.sites)
    throw std::invalid_argument("momentum_distribution: state size mismatch");
  const Matrix modes = lattice_modes(lattice);
  LatticeDistribution dist;
  dist.energy = lattice_mode_energies(lattice, hbar, nu);
  const Vector amp = modes.adjoint() * state;
  dist.probability = amp.cwiseAbs2();
  return dist;
}

LatticeDistribution momentum_distribution(const DensityMatrix& state, const LatticeClock& lattice,
                                          double hbar, double nu) {
  if (state.dim() != lattice.sites)
    throw std::invalid_argument("momentum_distribution: state size mismatch");
  const Matrix modes = lattice_modes(lattice);
  LatticeDistribution dist;
  dist.energy = lattice_mode_energies(lattice, hbar, nu);
  const Matrix t = state.entries() * modes;
  dist.probability = RealVector(lattice.sites);
  for (int col = 0; col < lattice.sites; ++col)
    dist.probability(col) = std::max(0.0, (modes.col(col).adjoint() * t.col(col))(0).real());
  return dist;
}

LatticeDistribution momentum_distribution(const ClockWavefunction& psi, const LatticeClock& lattice,
                                          double hbar, double nu) {
  return momentum_distribution(lattice_embed(lattice, psi), lattice, hbar, nu);
}

}  // namespace powerbound
