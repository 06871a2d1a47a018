#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "flab/operators.hpp"
#include "flab/types.hpp"

namespace flab::channels {

/// Single-site depolarization with resolution y >= 1:
/// D(rho) = rho / y + (1 - 1/y) tr(rho) 1/d.
class DepolarizingChannel {
 public:
  DepolarizingChannel(double y, int d);

  double y() const { return y_; }
  int d() const { return d_; }

  /// Also the Heisenberg action, since D is Hilbert-Schmidt self-adjoint.
  CMat apply(const CMat& a) const;
  /// d^2 x d^2 matrix acting on column-major vec(a).
  CMat transfer_matrix() const;

 private:
  double y_;
  int d_;
};

ops::DensityMatrix depolarize_apply(const DepolarizingChannel& ch, const ops::DensityMatrix& rho);

/// Linear map on the operators of one QuditSystem with Schroedinger (apply)
/// and Heisenberg (adjoint_apply) actions. Superoperator matrices act on
/// column-major vec(A). Cheap to copy; immutable.
class SuperoperatorChannel {
 public:
  struct Impl;

  static SuperoperatorChannel identity(ops::QuditSystem system);
  /// Rejects Kraus sets with |sum K^dagger K - 1| > 1e-10.
  static SuperoperatorChannel from_kraus(ops::QuditSystem system, std::vector<CMat> kraus);
  /// Rejects maps that fail trace preservation (1e-10) or, when
  /// check_cp is set, Choi positivity (-1e-10).
  static SuperoperatorChannel from_superoperator(ops::QuditSystem system, CMat superop,
                                                 bool check_cp = true);
  /// The same single-site map applied on every site; `transfer` is d^2 x d^2.
  static SuperoperatorChannel site_product(ops::QuditSystem system, CMat transfer,
                                           std::string label = "site-product");

  const ops::QuditSystem& system() const { return system_; }
  const std::string& label() const;

  CMat apply(const CMat& a) const;
  CMat adjoint_apply(const CMat& a) const;
  ops::DenseOperator apply(const ops::DenseOperator& a) const;
  ops::DenseOperator adjoint_apply(const ops::DenseOperator& a) const;
  ops::DensityMatrix apply(const ops::DensityMatrix& rho) const;

  bool is_identity() const;

  /// Dense dim^2 x dim^2 matrix; built column by column from apply().
  CMat superoperator_matrix() const;
  /// sum_ij |i><j| (x) N(|i><j|)
  CMat choi_matrix() const;
  double choi_min_eigenvalue() const;
  /// max |N^dagger(1) - 1|
  double trace_preservation_defect() const;

  /// outer o inner
  friend SuperoperatorChannel compose(const SuperoperatorChannel& outer,
                                      const SuperoperatorChannel& inner);

  SuperoperatorChannel(ops::QuditSystem system, std::shared_ptr<const Impl> impl);

 private:
  ops::QuditSystem system_;
  std::shared_ptr<const Impl> impl_;
};

/// D^{(x)n}
SuperoperatorChannel product_channel(const DepolarizingChannel& ch, int n);
/// site^{(x)n} for a single-site channel
SuperoperatorChannel product_channel(const SuperoperatorChannel& site, int n);

/// P(A) = (1/n!) sum_pi U_pi A U_pi^dagger.
class PermutationAverage {
 public:
  enum class Mode {
    exact_sum,            ///< explicit sum over n! conjugations, n <= 6
    symmetric_projector,  ///< average of matrix elements over site-permutation orbits
  };

  explicit PermutationAverage(ops::QuditSystem system);  // exact for n <= 6
  PermutationAverage(ops::QuditSystem system, Mode mode);

  const ops::QuditSystem& system() const { return system_; }
  Mode mode() const { return mode_; }

  CMat apply(const CMat& a) const;
  ops::DenseOperator apply(const ops::DenseOperator& a) const;

  SuperoperatorChannel as_channel() const;

 private:
  ops::QuditSystem system_;
  Mode mode_;
};

ops::DenseOperator permutation_average_apply(const PermutationAverage& p,
                                             const ops::DenseOperator& a);

/// P o D^{(x)n}
SuperoperatorChannel homogeneous_channel(const DepolarizingChannel& ch, int n,
                                         PermutationAverage::Mode mode);
SuperoperatorChannel homogeneous_channel(const DepolarizingChannel& ch, int n);

struct CommutationReport {
  int samples = 0;
  double max_residual = 0.0;
};

/// sup-norm of (N P - P N)(A) over `samples` Ginibre operators A.
CommutationReport commutation_check(const SuperoperatorChannel& product,
                                    const PermutationAverage& p, int samples, std::uint64_t seed);

}  // namespace flab::channels
