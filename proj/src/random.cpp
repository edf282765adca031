#include "powerbound/random.hpp"

#include <cmath>

namespace powerbound {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t state = master ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  splitmix64(state);
  return splitmix64(state);
}

Matrix ginibre(Index n, Rng& rng) {
  Matrix g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = Complex{rng.normal(), rng.normal()};
  return g;
}

Operator gue(Index n, Rng& rng) {
  const Matrix a = ginibre(n, rng);
  return Operator(0.5 * (a + a.adjoint()));
}

UnitaryOperator haar_unitary(Index n, Rng& rng) {
  const Matrix g = ginibre(n, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    q.col(j) *= (std::abs(d) > 0.0 ? d / std::abs(d) : Complex{1.0, 0.0});
  }
  return UnitaryOperator(std::move(q));
}

Vector haar_state(Index n, Rng& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex{rng.normal(), rng.normal()};
  return v / v.norm();
}

DensityMatrix random_density(Index n, Rng& rng) {
  const Matrix g = ginibre(n, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace();
  return DensityMatrix(std::move(rho));
}

}  // namespace powerbound
