#pragma once

#include <cstdint>

namespace flab::fock {

/// beta_k = d^k y^{-2k} / (1 - 1/y)^k, the contraction bound of D^{(x)n} on
/// directions orthogonal to all (k-1)-local operators.
struct BetaBound {
  int d = 2;
  double y = 2.0;
  int k = 1;
};

/// Throws DomainError for y <= 1, d < 2 or k < 0.
double beta_bound_value(const BetaBound& b);

/// beta_{k+1} / beta_k = d / (y (y - 1)), so beta decreases in k iff y(y-1) > d.
bool beta_decreasing(int d, double y);

struct BetaBoundReport {
  int n = 0;
  int d = 0;
  double y = 0.0;
  int k = 0;
  int samples = 0;
  double beta = 0.0;
  int violations = 0;
  double max_ratio = 0.0;  ///< max |A|^2_N / |A|^2 over samples
  int per_sector_samples = 0;
  int per_sector_violations = 0;
  double per_sector_max_ratio = 0.0;
};

/// Samples A in the orthogonal complement of the (k-1)-local operators (random
/// weights on every sector of size >= k) at product states drawn from a fixed
/// panel (|0><0| and seeded random mixed states), and counts violations of
/// |A|^2_{D^{(x)n}} <= beta_k |A|^2 at relative tolerance `tol`. With
/// `per_sector`, also samples single sectors of size exactly k.
BetaBoundReport beta_bound_test(int n, int d, double y, int k, int samples, std::uint64_t seed,
                                bool per_sector = false, double tol = 1e-10, int panel_size = 4);

}  // namespace flab::fock
