#pragma once

#include <cstdint>
#include <random>

#include "powerbound/operators.hpp"

namespace powerbound {

/// splitmix64 step; the standard 64-bit finalizer-based generator.
std::uint64_t splitmix64(std::uint64_t& state);

/// Stable per-item seed: mixes a master seed with an item index so that item k
/// gets the same stream no matter how many items run or in which order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// mt19937_64 wrapper with the couple of draws the library needs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// n x n matrix of independent standard complex Gaussians.
Matrix ginibre(Index n, Rng& rng);

/// GUE draw: (A + A^dag)/2 with A Ginibre.
Operator gue(Index n, Rng& rng);

/// Haar-distributed unitary via QR of a Ginibre matrix with the phases of the
/// R diagonal absorbed into Q.
UnitaryOperator haar_unitary(Index n, Rng& rng);

/// Haar-distributed pure state.
Vector haar_state(Index n, Rng& rng);

/// Full-rank random density matrix, G G^dag normalized (Hilbert-Schmidt measure).
DensityMatrix random_density(Index n, Rng& rng);

}  // namespace powerbound
