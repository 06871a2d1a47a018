#pragma once

#include <vector>

#include "flab/channels.hpp"
#include "flab/operators.hpp"
#include "flab/types.hpp"

namespace flab::geometry {

/// Omega_rho(A) = (rho A + A rho) / 2
CMat omega_apply(const CMat& rho, const CMat& a);
ops::DenseOperator omega_apply(const ops::DensityMatrix& rho, const ops::DenseOperator& a);

/// Solves rho A + A rho = 2 X in the eigenbasis of rho. Throws NumericalError
/// when the smallest eigenvalue of rho is <= 1e-10.
CMat omega_inverse_apply(const CMat& rho, const CMat& x);
ops::DenseOperator omega_inverse_apply(const ops::DensityMatrix& rho, const ops::DenseOperator& x);

/// sqrt(Re tr(rho A^2))
double bures_norm(const CMat& rho, const CMat& a);
double bures_norm(const ops::DensityMatrix& rho, const ops::DenseOperator& a);

/// Norm of A after coarse-graining by N: the Bures norm at N(rho) of the
/// cotangent vector whose tangent image is N(Omega_rho(A)). Needs N(rho)
/// invertible unless N is the identity.
double contracted_norm(const channels::SuperoperatorChannel& n, const ops::DensityMatrix& rho,
                       const CMat& a);

/// Hermitian A with tr(rho A) = 0.
class CotangentVector {
 public:
  CotangentVector(ops::DenseOperator a, ops::DensityMatrix state);
  const ops::DenseOperator& op() const { return a_; }
  const ops::DensityMatrix& state() const { return state_; }
  double norm() const { return bures_norm(state_, a_); }

 private:
  ops::DenseOperator a_;
  ops::DensityMatrix state_;
};

/// Hermitian traceless X.
class TangentVector {
 public:
  TangentVector(ops::DenseOperator x, ops::DensityMatrix state);
  const ops::DenseOperator& op() const { return x_; }
  const ops::DensityMatrix& state() const { return state_; }

 private:
  ops::DenseOperator x_;
  ops::DensityMatrix state_;
};

TangentVector to_tangent(const CotangentVector& a);

/// Finite GNS subspace: basis operators with Gram matrices at `state`.
struct GnsSpace {
  ops::DensityMatrix state;
  std::vector<ops::DenseOperator> basis;
  CMat gram_complex;  ///< tr(rho A_i^dagger A_j)
  RMat gram_real;     ///< Re(gram_complex)
  double null_threshold = 1e-10;
  int null_dimension = 0;
  std::vector<int> degrees;  ///< optional per-element locality labels

  std::size_t size() const { return basis.size(); }
};

/// Basis elements must be Hermitian and either zero-mean at `state` or a
/// multiple of the identity (the vacuum direction).
GnsSpace gns_build(const ops::DensityMatrix& state, std::vector<ops::DenseOperator> basis,
                   double null_threshold = 1e-10);

/// Real Gram matrix Re tr(rho A_i A_j) for Hermitian A_i.
RMat real_gram(const CMat& rho, const std::vector<ops::DenseOperator>& basis);

struct ChannelMatrix {
  RMat m;                   ///< in_size x out_size
  double residual_gns = 0;  ///< max relative GNS norm of the unexpanded remainder
  double residual_hs = 0;   ///< same for a Hilbert-Schmidt least-squares expansion
  double max_mean = 0;      ///< max |tr(rho N^dagger(E))| over zero-mean E
};

/// Coefficients of N^dagger(E_a) over the in-space basis, N^dagger(E_a) =
/// sum_b M_ba F_b, taken as the GNS-orthogonal projection (null directions of
/// the in-space carry no coefficient).
ChannelMatrix channel_gns_matrix(const channels::SuperoperatorChannel& n, const GnsSpace& out_space,
                                 const GnsSpace& in_space, bool allow_singular_output = false);

/// Minimum eigenvalue of a Hermitian matrix.
double min_eigenvalue(const CMat& m);

}  // namespace flab::geometry
