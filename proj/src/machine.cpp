#include "powerbound/machine.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace powerbound {

Matrix Spectral::conjugate(const Matrix& rho, double t, double hbar) const {
  const Index n = values.size();
  Matrix work = vectors.adjoint() * rho * vectors;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      work(i, j) *= std::exp(Complex{0.0, -(values(i) - values(j)) * t / hbar});
  return vectors * work * vectors.adjoint();
}

Vector Spectral::apply(const Vector& psi, double t, double hbar) const {
  Vector work = vectors.adjoint() * psi;
  for (Index i = 0; i < values.size(); ++i)
    work(i) *= std::exp(Complex{0.0, -values(i) * t / hbar});
  return vectors * work;
}

namespace detail {

struct SpectralBox {
  std::once_flag joint_once, system_once, agent_once;
  std::optional<Spectral> joint, system, agent;
};

}  // namespace detail

namespace {

Spectral decompose(const Matrix& h, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": eigendecomposition failed");
  return Spectral{es.eigenvalues(), es.eigenvectors()};
}

DensityMatrix as_state(Matrix m, std::vector<Index> dims) {
  return DensityMatrix(std::move(m), std::move(dims), DensityMatrix::Check::Basic);
}

}  // namespace

BipartiteModel::BipartiteModel(Operator h_s, Operator h_a, Operator v,
                               DensityMatrix rho_s, DensityMatrix sigma_a,
                               double tau, double hbar)
    : h_s_(std::move(h_s)),
      h_a_(std::move(h_a)),
      v_(std::move(v)),
      rho_s_(std::move(rho_s)),
      sigma_a_(std::move(sigma_a)),
      tau_(tau),
      hbar_(hbar),
      box_(std::make_shared<detail::SpectralBox>()) {
  if (tau_ <= 0.0) throw std::invalid_argument("BipartiteModel: tau must be positive");
  if (hbar_ <= 0.0) throw std::invalid_argument("BipartiteModel: hbar must be positive");
  const double tol = tolerances().hermitian;
  if (!h_s_.is_hermitian(tol) || !h_a_.is_hermitian(tol) || !v_.is_hermitian(tol))
    throw std::invalid_argument("BipartiteModel: Hamiltonian terms must be Hermitian");
  const Index ds = h_s_.dim(), da = h_a_.dim();
  if (rho_s_.dim() != ds) throw std::invalid_argument("BipartiteModel: rho_s dimension mismatch");
  if (sigma_a_.dim() != da) throw std::invalid_argument("BipartiteModel: sigma_a dimension mismatch");
  if (v_.dim() != ds * da)
    throw std::invalid_argument("BipartiteModel: V must act on the joint space");
  if (v_.dims().size() != 2 || v_.dims()[0] != ds || v_.dims()[1] != da)
    v_ = Operator(v_.entries(), {ds, da});
}

Operator BipartiteModel::h_free() const {
  const Index ds = system_dim(), da = agent_dim();
  Matrix h = Matrix::Zero(ds * da, ds * da);
  for (Index i = 0; i < ds; ++i)
    for (Index j = 0; j < ds; ++j)
      if (h_s_.entries()(i, j) != Complex{0.0, 0.0})
        h.block(i * da, j * da, da, da) =
            Matrix::Identity(da, da) * h_s_.entries()(i, j);
  for (Index i = 0; i < ds; ++i)
    h.block(i * da, i * da, da, da) += h_a_.entries();
  return Operator(std::move(h), {ds, da});
}

Operator BipartiteModel::h_total() const {
  Matrix h = h_free().entries() + v_.entries();
  return Operator(std::move(h), {system_dim(), agent_dim()});
}

const Spectral& BipartiteModel::joint_spectral() const {
  std::call_once(box_->joint_once,
                 [&] { box_->joint = decompose(h_total().entries(), "BipartiteModel(H)"); });
  return *box_->joint;
}

const Spectral& BipartiteModel::system_spectral() const {
  std::call_once(box_->system_once,
                 [&] { box_->system = decompose(h_s_.entries(), "BipartiteModel(H_S)"); });
  return *box_->system;
}

const Spectral& BipartiteModel::agent_spectral() const {
  std::call_once(box_->agent_once,
                 [&] { box_->agent = decompose(h_a_.entries(), "BipartiteModel(H_A)"); });
  return *box_->agent;
}

DensityMatrix sigma_free(const BipartiteModel& model, double t) {
  Matrix s = model.agent_spectral().conjugate(model.sigma_a().entries(), t, model.hbar());
  return as_state(std::move(s), {model.agent_dim()});
}

CheckReport check_condition1(const BipartiteModel& model,
                             std::span<const double> t_samples, double tol) {
  for (double t : t_samples)
    if (t > 0.0)
      throw std::invalid_argument("check_condition1: samples must satisfy t <= 0");

  const Index ds = model.system_dim(), da = model.agent_dim();
  const Matrix& v = model.v().entries();

  CheckReport rep;
  rep.name = "condition1";
  rep.tolerance = tol;
  rep.detail = "Frobenius norm over the complete block system of [V, E_kl (x) sigma_A(t)]";

  double worst = 0.0;
  double worst_t = 0.0;
  for (double t : t_samples) {
    const Matrix sigma_t = model.agent_spectral().conjugate(model.sigma_a().entries(), t, model.hbar());
    // Left/right block products: A_{ik} = V_{ik} sigma, B_{lj} = sigma V_{lj}.
    Matrix a(ds * da, ds * da), b(ds * da, ds * da);
    for (Index i = 0; i < ds; ++i)
      for (Index k = 0; k < ds; ++k) {
        a.block(i * da, k * da, da, da) = v.block(i * da, k * da, da, da) * sigma_t;
        b.block(i * da, k * da, da, da) = sigma_t * v.block(i * da, k * da, da, da);
      }
    // For the matrix unit E_kl the commutator has one block column (V_{ik} sigma),
    // one block row (-sigma V_{lj}) and the corner V_{kk} sigma - sigma V_{ll}.
    std::vector<double> col_sq(ds * ds), row_sq(ds * ds);
    for (Index i = 0; i < ds; ++i)
      for (Index k = 0; k < ds; ++k) {
        col_sq[i * ds + k] = a.block(i * da, k * da, da, da).squaredNorm();
        row_sq[i * ds + k] = b.block(i * da, k * da, da, da).squaredNorm();
      }
    for (Index k = 0; k < ds; ++k)
      for (Index l = 0; l < ds; ++l) {
        double sq = 0.0;
        for (Index i = 0; i < ds; ++i)
          if (i != k) sq += col_sq[i * ds + k];
        for (Index j = 0; j < ds; ++j)
          if (j != l) sq += row_sq[l * ds + j];
        sq += (a.block(k * da, k * da, da, da) - b.block(l * da, l * da, da, da)).squaredNorm();
        const double res = std::sqrt(sq);
        if (res > worst) {
          worst = res;
          worst_t = t;
        }
      }
  }
  rep.residual = worst;
  rep.pass = worst <= tol;
  rep.record("worst_t", worst_t);
  rep.record("samples", static_cast<double>(t_samples.size()));
  return rep;
}

CheckReport check_factorization(const BipartiteModel& model, double t, double tol) {
  if (t > 0.0)
    throw std::invalid_argument("check_factorization: requires t <= 0");
  const Matrix joint0 = tensor(model.rho_s(), model.sigma_a()).entries();
  const Matrix lhs = model.joint_spectral().conjugate(joint0, t, model.hbar());
  const Matrix rho_t = model.system_spectral().conjugate(model.rho_s().entries(), t, model.hbar());
  const Matrix sigma_t = model.agent_spectral().conjugate(model.sigma_a().entries(), t, model.hbar());
  const Matrix rhs = tensor(Operator(rho_t), Operator(sigma_t)).entries();

  CheckReport rep;
  rep.name = "factorization";
  rep.tolerance = tol;
  rep.residual = trace_norm(Matrix(lhs - rhs));
  rep.pass = rep.residual <= tol;
  rep.record("t", t);
  return rep;
}

EvolutionResult evolve_total(const BipartiteModel& model, double t) {
  const Index ds = model.system_dim(), da = model.agent_dim();
  const Matrix joint0 = tensor(model.rho_s(), model.sigma_a()).entries();
  Matrix theta = model.joint_spectral().conjugate(joint0, t, model.hbar());
  DensityMatrix theta_dm = as_state(std::move(theta), {ds, da});
  DensityMatrix rho_final = partial_trace(theta_dm, 0);
  DensityMatrix sigma_final = partial_trace(theta_dm, 1);
  Matrix rho_free = model.system_spectral().conjugate(model.rho_s().entries(), t, model.hbar());
  return EvolutionResult{std::move(theta_dm), std::move(rho_final),
                         std::move(sigma_final), as_state(std::move(rho_free), {ds})};
}

CheckReport check_avg_energy_conservation(const BipartiteModel& model, double tol) {
  const Operator h0 = model.h_free();
  const DensityMatrix start = tensor(model.rho_s(), model.sigma_a());
  const EvolutionResult end = evolve_total(model, model.tau());
  const double e0 = expectation(h0, start);
  const double e1 = expectation(h0, end.theta);

  CheckReport rep;
  rep.name = "avg_energy_conservation";
  rep.tolerance = tol;
  rep.residual = std::abs(e1 - e0);
  rep.pass = rep.residual <= tol;
  rep.record("free_energy_initial", e0);
  rep.record("free_energy_final", e1);
  return rep;
}

CheckReport check_switch_off(const BipartiteModel& model,
                             std::span<const double> t_samples, double tol) {
  for (double t : t_samples)
    if (t < model.tau())
      throw std::invalid_argument("check_switch_off: samples must satisfy t >= tau");

  CheckReport rep;
  rep.name = "switch_off";
  rep.tolerance = tol;
  rep.detail = "Frobenius norm of [V, Theta(t)]";

  const Matrix joint0 = tensor(model.rho_s(), model.sigma_a()).entries();
  double worst = 0.0, worst_t = model.tau();
  for (double t : t_samples) {
    const Matrix theta = model.joint_spectral().conjugate(joint0, t, model.hbar());
    const Matrix& v = model.v().entries();
    const double res = (v * theta - theta * v).norm();
    if (res > worst) {
      worst = res;
      worst_t = t;
    }
  }
  rep.residual = worst;
  rep.pass = worst <= tol;
  rep.record("worst_t", worst_t);
  rep.record("samples", static_cast<double>(t_samples.size()));
  return rep;
}

double mean_work(const BipartiteModel& model) {
  const EvolutionResult r = evolve_total(model, model.tau());
  const double w_direct = expectation(model.h_s(), model.rho_s()) -
                          expectation(model.h_s(), r.rho_s_final);
  const double w_free = expectation(model.h_s(), r.rho_s_free) -
                        expectation(model.h_s(), r.rho_s_final);
  const double scale = std::max(1.0, std::abs(w_direct));
  if (std::abs(w_direct - w_free) > 1e-10 * scale) {
    std::ostringstream msg;
    msg << "mean_work: the two work forms disagree (" << w_direct << " vs " << w_free << ")";
    throw std::runtime_error(msg.str());
  }
  return w_direct;
}

double mean_power(const BipartiteModel& model) {
  return mean_work(model) / model.tau();
}

CheckReport check_conservation_triviality(const BipartiteModel& model, double tol) {
  CheckReport rep;
  rep.name = "conservation_triviality";
  rep.tolerance = tol;

  const Matrix& v = model.v().entries();
  const Matrix h0 = model.h_free().entries();
  const double comm_h0_v = (h0 * v - v * h0).norm();
  rep.record("h0_v_commutator", comm_h0_v);

  const double cond_samples[] = {0.0, -model.tau()};
  const CheckReport cond = check_condition1(model, cond_samples, tol);
  rep.record("condition1_residual", cond.residual);

  if (comm_h0_v > tol || !cond.pass) {
    rep.pass = false;
    rep.residual = std::max(comm_h0_v, cond.residual);
    rep.detail = "inapplicable: preconditions fail ([H_S+H_A, V] = 0 and the switch-on condition are required)";
    return rep;
  }

  // Preconditions hold: the joint evolution must stay factorized and no work
  // may flow over the interaction window.
  const Matrix joint0 = tensor(model.rho_s(), model.sigma_a()).entries();
  double worst = 0.0;
  for (double frac : {0.25, 0.5, 0.75, 1.0}) {
    const double t = frac * model.tau();
    const Matrix lhs = model.joint_spectral().conjugate(joint0, t, model.hbar());
    const Matrix rho_t = model.system_spectral().conjugate(model.rho_s().entries(), t, model.hbar());
    const Matrix sigma_t = model.agent_spectral().conjugate(model.sigma_a().entries(), t, model.hbar());
    const Matrix rhs = tensor(Operator(rho_t), Operator(sigma_t)).entries();
    worst = std::max(worst, trace_norm(Matrix(lhs - rhs)));
  }
  const double w = mean_work(model);
  rep.record("factorization_residual", worst);
  rep.record("work", w);
  rep.residual = std::max(worst, std::abs(w));
  rep.pass = rep.residual <= tol;
  rep.detail = "factorized free evolution and zero mean work";
  return rep;
}

}  // namespace powerbound
