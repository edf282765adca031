#pragma once

#include <complex>

#include <Eigen/Dense>

namespace powerbound {

using Complex    = std::complex<double>;
using Matrix     = Eigen::MatrixXcd;
using Vector     = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index      = Eigen::Index;

inline constexpr Complex kImag{0.0, 1.0};

/// Global numeric thresholds used by the validating wrappers. Mutable so an
/// application can tighten or relax validation in one place.
struct Tolerances {
  double hermitian = 1e-12;  ///< relative max-norm slack for A = A^dag
  double unitary = 1e-10;    ///< max-norm slack for U^dag U = 1
  double state = 1e-12;      ///< trace / positivity slack for density matrices
  double branch_cut = 1e-9;  ///< rejection band around eigenphase -pi in unitary_log
};

Tolerances& tolerances();

}  // namespace powerbound
