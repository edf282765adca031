#pragma once

#include <cstddef>
#include <vector>

#include "powerbound/types.hpp"

namespace powerbound {

/// Dense operator on a finite-dimensional Hilbert space, together with the
/// tensor factorization of that space. dims() lists the factor dimensions in
/// tensor order (first factor varies slowest), so an operator on S (x) A with
/// dim S = d and dim A = M carries dims {d, M}.
class Operator {
 public:
  Operator() = default;
  explicit Operator(Matrix entries);
  Operator(Matrix entries, std::vector<Index> dims);

  const Matrix& entries() const { return entries_; }
  const std::vector<Index>& dims() const { return dims_; }
  Index dim() const { return entries_.rows(); }

  bool is_hermitian(double tol) const;
  bool is_hermitian() const;
  Operator dagger() const;

 private:
  Matrix entries_;
  std::vector<Index> dims_;
};

/// Hermitian, unit-trace, positive-semidefinite operator. Validation runs at
/// construction; Check::Basic skips the (cubic-cost) positivity test for
/// states produced by unitary conjugation of an already validated state.
class DensityMatrix {
 public:
  enum class Check { Full, Basic };

  explicit DensityMatrix(Matrix entries, std::vector<Index> dims = {},
                         Check check = Check::Full);

  const Matrix& entries() const { return op_.entries(); }
  const std::vector<Index>& dims() const { return op_.dims(); }
  Index dim() const { return op_.dim(); }
  const Operator& as_operator() const { return op_; }

 private:
  Operator op_;
};

/// Operator with U^dag U = 1 validated at construction.
class UnitaryOperator {
 public:
  explicit UnitaryOperator(Matrix entries, std::vector<Index> dims = {});

  const Matrix& entries() const { return op_.entries(); }
  const std::vector<Index>& dims() const { return op_.dims(); }
  Index dim() const { return op_.dim(); }
  const Operator& as_operator() const { return op_; }

 private:
  Operator op_;
};

Operator tensor(const Operator& a, const Operator& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Trace out every tensor factor except `keep` (0-based position in dims()).
Operator partial_trace(const Operator& o, std::size_t keep);
DensityMatrix partial_trace(const DensityMatrix& o, std::size_t keep);

/// Sum of singular values. Hermitian inputs are routed through an
/// eigendecomposition (sum of |eigenvalues|), everything else through an SVD.
double trace_norm(const Operator& o);
double trace_norm(const Matrix& m);

/// Largest singular value.
double operator_norm(const Operator& o);
double operator_norm(const Matrix& m);

Operator commutator(const Operator& a, const Operator& b);

/// tr(h rho) for Hermitian h. The imaginary part of the trace must vanish up
/// to scaled roundoff and is discarded.
double expectation(const Operator& h, const DensityMatrix& rho);

/// tr(h^2 rho) - tr(h rho)^2, clamped to zero when roundoff drives it
/// slightly negative.
double variance(const Operator& h, const DensityMatrix& rho);

/// exp(-i h t / hbar) for Hermitian h, via eigendecomposition.
UnitaryOperator propagator(const Operator& h, double t, double hbar = 1.0);

/// Principal logarithm of a unitary: skew-Hermitian L with exp(L) = u.
/// Eigenphases are taken in (-pi, pi]; phase pi (e.g. a reflection) is legal,
/// but eigenphases approaching the cut from below (within tolerances().branch_cut
/// of -pi) are rejected because the branch would be ambiguous there.
Operator unitary_log(const UnitaryOperator& u);

/// exp(L) for skew-Hermitian L (eigendecomposition of -iL).
Matrix expm_skew(const Matrix& l);

Matrix identity_matrix(Index n);
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

}  // namespace powerbound
