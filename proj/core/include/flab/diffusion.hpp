#pragma once

#include <cstddef>

#include "flab/channels.hpp"
#include "flab/types.hpp"

namespace flab::channels {

/// Index of ordered pairs (i, j), i != j, of ring sites.
struct PairIndex {
  int L;
  std::size_t size() const { return static_cast<std::size_t>(L) * static_cast<std::size_t>(L - 1); }
  std::size_t operator()(int i, int j) const;
  std::pair<int, int> pair(std::size_t index) const;
};

/// Nearest-neighbour swap dynamics e^{(sigma/eps)^2 L / 2} on a ring of L
/// sites with spacing eps, where L = sum over ring edges of (swap - id).
class SwapDiffusion {
 public:
  static constexpr int max_sites_k1 = 64;
  static constexpr int max_sites_k2 = 32;

  SwapDiffusion(int L, double eps, double sigma);

  int sites() const { return L_; }
  double eps() const { return eps_; }
  double sigma() const { return sigma_; }
  /// (sigma/eps)^2 / 2
  double rate() const;

  /// Generator restricted to k-walker coefficients. k=1: ring Laplacian on L
  /// sites. k=2: swap process on ordered distinct pairs (PairIndex order).
  RMat sector_generator(int k) const;
  /// exp(rate * generator), by symmetric eigendecomposition.
  RMat sector_semigroup(int k) const;

 private:
  int L_;
  double eps_;
  double sigma_;
};

/// Applies the k-walker semigroup to coefficient columns (rows index sites or pairs).
CMat diffusion_semigroup_on_sector(const SwapDiffusion& sd, int k, const CMat& coefficients);

/// exp(rate * Lap) (x) exp(rate * Lap) on all L^2 pairs, coincident sites included.
RMat independent_pair_semigroup(const SwapDiffusion& sd);

/// The full swap-diffusion channel on a ring of L qudits as a dense
/// superoperator. Only for small rings.
SuperoperatorChannel swap_diffusion_channel(const SwapDiffusion& sd, int d);

/// exp(t S) for real symmetric S.
RMat symmetric_expm(const RMat& s, double t);

}  // namespace flab::channels
