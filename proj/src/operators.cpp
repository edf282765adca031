#include "powerbound/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace powerbound {

Tolerances& tolerances() {
  static Tolerances t;
  return t;
}

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols())
    throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty");
}

Index dims_product(const std::vector<Index>& dims) {
  Index p = 1;
  for (Index d : dims) p *= d;
  return p;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

double hermitian_defect(const Matrix& m) { return max_abs(m - m.adjoint()); }

void require_hermitian(const Matrix& m, const char* what) {
  const double scale = std::max(1.0, max_abs(m));
  if (hermitian_defect(m) > tolerances().hermitian * scale)
    throw std::invalid_argument(std::string(what) + ": matrix is not Hermitian within tolerance");
}

// tr(A * B) without forming the product.
Complex product_trace(const Matrix& a, const Matrix& b) {
  return (a.cwiseProduct(b.transpose())).sum();
}

}  // namespace

Operator::Operator(Matrix entries) : entries_(std::move(entries)) {
  require_square(entries_, "Operator");
  dims_ = {entries_.rows()};
}

Operator::Operator(Matrix entries, std::vector<Index> dims)
    : entries_(std::move(entries)), dims_(std::move(dims)) {
  require_square(entries_, "Operator");
  if (dims_.empty()) dims_ = {entries_.rows()};
  for (Index d : dims_)
    if (d <= 0) throw std::invalid_argument("Operator: factor dimensions must be positive");
  if (dims_product(dims_) != entries_.rows())
    throw std::invalid_argument("Operator: factor dimensions do not multiply to the matrix size");
}

bool Operator::is_hermitian(double tol) const {
  const double scale = std::max(1.0, max_abs(entries_));
  return hermitian_defect(entries_) <= tol * scale;
}

bool Operator::is_hermitian() const { return is_hermitian(tolerances().hermitian); }

Operator Operator::dagger() const { return Operator(entries_.adjoint(), dims_); }

DensityMatrix::DensityMatrix(Matrix entries, std::vector<Index> dims, Check check)
    : op_(std::move(entries), std::move(dims)) {
  const auto& m = op_.entries();
  require_hermitian(m, "DensityMatrix");
  const double trace_defect = std::abs(m.trace() - Complex{1.0, 0.0});
  if (trace_defect > tolerances().state)
    throw std::invalid_argument("DensityMatrix: trace differs from 1 beyond tolerance");
  if (check == Check::Full) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tolerances().state)
      throw std::invalid_argument("DensityMatrix: negative eigenvalue beyond tolerance");
  }
}

UnitaryOperator::UnitaryOperator(Matrix entries, std::vector<Index> dims)
    : op_(std::move(entries), std::move(dims)) {
  const auto& m = op_.entries();
  const Matrix defect = m.adjoint() * m - Matrix::Identity(m.rows(), m.cols());
  if (max_abs(defect) > tolerances().unitary)
    throw std::invalid_argument("UnitaryOperator: U^dag U deviates from identity beyond tolerance");
}

Operator tensor(const Operator& a, const Operator& b) {
  const Matrix& ma = a.entries();
  const Matrix& mb = b.entries();
  const Index na = ma.rows(), nb = mb.rows();
  Matrix out(na * nb, na * nb);
  for (Index i = 0; i < na; ++i)
    for (Index j = 0; j < na; ++j)
      out.block(i * nb, j * nb, nb, nb) = ma(i, j) * mb;
  std::vector<Index> dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return Operator(std::move(out), std::move(dims));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  Operator o = tensor(a.as_operator(), b.as_operator());
  // A product of valid states is a valid state; skip the positivity sweep.
  return DensityMatrix(o.entries(), o.dims(), DensityMatrix::Check::Basic);
}

namespace {

Operator partial_trace_impl(const Matrix& m, const std::vector<Index>& dims, std::size_t keep) {
  if (keep >= dims.size())
    throw std::invalid_argument("partial_trace: subsystem index out of range");
  const Index n = m.rows();
  const Index d_keep = dims[keep];

  // Decompose each flat index into (kept index, environment index), with the
  // first tensor factor varying slowest.
  std::vector<Index> keep_of(n), env_of(n);
  std::vector<Index> digit(dims.size());
  for (Index flat = 0; flat < n; ++flat) {
    Index rest = flat;
    for (std::size_t f = dims.size(); f-- > 0;) {
      digit[f] = rest % dims[f];
      rest /= dims[f];
    }
    Index e = 0;
    for (std::size_t f = 0; f < dims.size(); ++f) {
      if (f == keep) continue;
      e = e * dims[f] + digit[f];
    }
    keep_of[flat] = digit[keep];
    env_of[flat] = e;
  }

  Matrix out = Matrix::Zero(d_keep, d_keep);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c)
      if (env_of[r] == env_of[c]) out(keep_of[r], keep_of[c]) += m(r, c);
  return Operator(std::move(out), {d_keep});
}

}  // namespace

Operator partial_trace(const Operator& o, std::size_t keep) {
  if (o.dims().size() < 2)
    throw std::invalid_argument("partial_trace: operator has no tensor factorization");
  return partial_trace_impl(o.entries(), o.dims(), keep);
}

DensityMatrix partial_trace(const DensityMatrix& o, std::size_t keep) {
  Operator r = partial_trace(o.as_operator(), keep);
  // Partial trace of a state is a state (trace preserved, positivity inherited).
  return DensityMatrix(r.entries(), r.dims(), DensityMatrix::Check::Basic);
}

double trace_norm(const Matrix& m) {
  require_square(m, "trace_norm");
  const double scale = std::max(1.0, max_abs(m));
  if (hermitian_defect(m) <= tolerances().hermitian * scale) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

double trace_norm(const Operator& o) { return trace_norm(o.entries()); }

double operator_norm(const Matrix& m) {
  require_square(m, "operator_norm");
  const double scale = std::max(1.0, max_abs(m));
  if (hermitian_defect(m) <= tolerances().hermitian * scale) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues().maxCoeff();
}

double operator_norm(const Operator& o) { return operator_norm(o.entries()); }

Operator commutator(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("commutator: dimension mismatch");
  Matrix c = a.entries() * b.entries() - b.entries() * a.entries();
  return Operator(std::move(c), a.dims() == b.dims() ? a.dims() : std::vector<Index>{a.dim()});
}

double expectation(const Operator& h, const DensityMatrix& rho) {
  if (h.dim() != rho.dim())
    throw std::invalid_argument("expectation: dimension mismatch");
  require_hermitian(h.entries(), "expectation");
  const Complex t = product_trace(h.entries(), rho.entries());
  // The imaginary part is pure roundoff for Hermitian h; allow it to scale
  // with the size of the observable.
  const double imag_tol = tolerances().hermitian * std::max(1.0, h.entries().norm());
  if (std::abs(t.imag()) > imag_tol)
    throw std::runtime_error("expectation: trace has a non-negligible imaginary part");
  return t.real();
}

double variance(const Operator& h, const DensityMatrix& rho) {
  if (h.dim() != rho.dim())
    throw std::invalid_argument("variance: dimension mismatch");
  require_hermitian(h.entries(), "variance");
  const Matrix h_rho = h.entries() * rho.entries();
  const double m1 = product_trace(h.entries(), rho.entries()).real();
  const double m2 = product_trace(h.entries(), h_rho).real();
  double var = m2 - m1 * m1;
  const double clamp = tolerances().state * std::max(1.0, std::abs(m2));
  if (var < 0.0) {
    if (var < -clamp)
      throw std::runtime_error("variance: negative beyond roundoff tolerance");
    var = 0.0;
  }
  return var;
}

UnitaryOperator propagator(const Operator& h, double t, double hbar) {
  if (hbar <= 0.0) throw std::invalid_argument("propagator: hbar must be positive");
  require_hermitian(h.entries(), "propagator");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.entries());
  if (es.info() != Eigen::Success)
    throw std::runtime_error("propagator: eigendecomposition failed");
  const RealVector& w = es.eigenvalues();
  const Matrix& v = es.eigenvectors();
  Vector phases(w.size());
  for (Index i = 0; i < w.size(); ++i)
    phases(i) = std::exp(Complex{0.0, -w(i) * t / hbar});
  Matrix u = v * phases.asDiagonal() * v.adjoint();
  return UnitaryOperator(std::move(u), h.dims());
}

Matrix expm_skew(const Matrix& l) {
  require_square(l, "expm_skew");
  const Matrix a = Complex{0.0, -1.0} * l;  // Hermitian if l is skew-Hermitian
  require_hermitian(a, "expm_skew");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const RealVector& w = es.eigenvalues();
  const Matrix& v = es.eigenvectors();
  Vector phases(w.size());
  for (Index i = 0; i < w.size(); ++i)
    phases(i) = std::exp(Complex{0.0, w(i)});
  return v * phases.asDiagonal() * v.adjoint();
}

Operator unitary_log(const UnitaryOperator& u) {
  const Matrix& m = u.entries();
  Eigen::ComplexSchur<Matrix> schur(m);
  if (schur.info() != Eigen::Success)
    throw std::runtime_error("unitary_log: Schur decomposition failed");
  const Matrix& t = schur.matrixT();
  const Matrix& q = schur.matrixU();

  constexpr double pi = std::numbers::pi;
  const double cut = tolerances().branch_cut;
  Vector log_diag(m.rows());
  for (Index i = 0; i < m.rows(); ++i) {
    const Complex lambda = t(i, i);
    double theta = std::arg(lambda);
    if (theta <= -pi + cut) {
      // Eigenvalues on the negative real axis legitimately belong to phase
      // +pi; only genuinely complex eigenvalues hugging the cut from below
      // are ambiguous and rejected.
      if (std::abs(lambda.imag()) <= 1e-12)
        theta = pi;
      else
        throw std::runtime_error("unitary_log: eigenphase too close to the -pi branch cut");
    }
    log_diag(i) = Complex{0.0, theta};
  }
  Matrix l = q * log_diag.asDiagonal() * q.adjoint();
  l = 0.5 * (l - l.adjoint());  // exact skew-Hermitian symmetrization

  const Matrix roundtrip = expm_skew(l);
  if (max_abs(roundtrip - m) > tolerances().unitary)
    throw std::runtime_error("unitary_log: exp(log u) failed to reproduce u within tolerance");
  return Operator(std::move(l), u.dims());
}

Matrix identity_matrix(Index n) { return Matrix::Identity(n, n); }

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << Complex{0, 0}, Complex{0, -1}, Complex{0, 1}, Complex{0, 0};
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace powerbound
