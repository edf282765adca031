#pragma once

#include <memory>
#include <span>
#include <vector>

#include "powerbound/checks.hpp"
#include "powerbound/operators.hpp"

namespace powerbound {

/// Eigendecomposition of a Hermitian operator, kept around so that repeated
/// evolutions of the same model reuse one solve.
struct Spectral {
  RealVector values;
  Matrix vectors;

  /// e^{-i H t / hbar} rho e^{+i H t / hbar}
  Matrix conjugate(const Matrix& rho, double t, double hbar) const;
  /// e^{-i H t / hbar} psi
  Vector apply(const Vector& psi, double t, double hbar) const;
};

namespace detail {
struct SpectralBox;  // lazily filled per-model cache
}

/// Closed bipartite system S (x) A with a time-independent total Hamiltonian
/// H = H_S (x) 1 + 1 (x) H_A + V and a product initial state rho_S (x) sigma_A.
/// tau is the designed interaction window; the object is immutable after
/// construction and safe to share across threads.
class BipartiteModel {
 public:
  BipartiteModel(Operator h_s, Operator h_a, Operator v, DensityMatrix rho_s,
                 DensityMatrix sigma_a, double tau, double hbar = 1.0);

  const Operator& h_s() const { return h_s_; }
  const Operator& h_a() const { return h_a_; }
  const Operator& v() const { return v_; }
  const DensityMatrix& rho_s() const { return rho_s_; }
  const DensityMatrix& sigma_a() const { return sigma_a_; }
  double tau() const { return tau_; }
  double hbar() const { return hbar_; }

  Index system_dim() const { return h_s_.dim(); }
  Index agent_dim() const { return h_a_.dim(); }

  Operator h_free() const;   ///< H_S (x) 1 + 1 (x) H_A
  Operator h_total() const;  ///< h_free() + V

  const Spectral& joint_spectral() const;
  const Spectral& system_spectral() const;
  const Spectral& agent_spectral() const;

 private:
  Operator h_s_, h_a_, v_;
  DensityMatrix rho_s_, sigma_a_;
  double tau_, hbar_;
  std::shared_ptr<detail::SpectralBox> box_;
};

struct EvolutionResult {
  DensityMatrix theta;          ///< joint state at the requested time
  DensityMatrix rho_s_final;    ///< tr_A theta
  DensityMatrix sigma_a_final;  ///< tr_S theta
  DensityMatrix rho_s_free;     ///< system state under H_S alone
};

/// Agent state evolved by H_A alone for time t (t may be negative).
DensityMatrix sigma_free(const BipartiteModel& model, double t);

/// Switch-on condition: [V, E_kl (x) sigma_A(t)] = 0 for every system matrix
/// unit E_kl and every sampled t <= 0. Residuals are Frobenius norms of the
/// complete block system equivalent to the matrix-unit commutators.
CheckReport check_condition1(const BipartiteModel& model,
                             std::span<const double> t_samples, double tol);

/// || e^{-iHt/hbar} (rho_S (x) sigma_A) e^{+iHt/hbar} - rho_S(t) (x) sigma_A(t) ||_1
/// for a single t <= 0.
CheckReport check_factorization(const BipartiteModel& model, double t, double tol);

EvolutionResult evolve_total(const BipartiteModel& model, double t);

/// |tr[(H_S (x) 1 + 1 (x) H_A)(Theta(tau) - Theta(0))]| <= tol.
CheckReport check_avg_energy_conservation(const BipartiteModel& model, double tol);

/// ||[V, Theta(t)]||_F <= tol at each sampled t >= tau.
CheckReport check_switch_off(const BipartiteModel& model,
                             std::span<const double> t_samples, double tol);

/// W = tr[H_S rho_S] - tr[H_S rho_S'(tau)], cross-checked against the
/// equivalent free-evolution form.
double mean_work(const BipartiteModel& model);

/// W / tau.
double mean_power(const BipartiteModel& model);

/// When [H_S (x) 1 + 1 (x) H_A, V] = 0 and the switch-on condition holds, the
/// evolution factorizes into free evolutions and no work flows. Reports the
/// preconditions, the factorization residual on (0, tau], and |W|.
CheckReport check_conservation_triviality(const BipartiteModel& model, double tol);

}  // namespace powerbound
