#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "flab/types.hpp"
#include "flab/words.hpp"

namespace flab::ops {

/// Largest total Hilbert dimension d^n accepted for dense matrices.
/// 2^14 unless overridden by the FLAB_MAX_DIM environment variable.
std::size_t dense_budget();

/// n sites of local dimension d.
class QuditSystem {
 public:
  QuditSystem(int d, int n);

  int d() const { return d_; }
  int n() const { return n_; }
  std::size_t dim() const { return dim_; }

  bool operator==(const QuditSystem&) const = default;

 private:
  int d_;
  int n_;
  std::size_t dim_;
};

/// Complex d^n x d^n matrix tied to a QuditSystem.
class DenseOperator {
 public:
  DenseOperator(QuditSystem system, CMat entries);

  static DenseOperator identity(QuditSystem system);
  static DenseOperator zero(QuditSystem system);

  const QuditSystem& system() const { return system_; }
  const CMat& matrix() const { return entries_; }

  /// max |A - A^dagger| <= rel_tol * max(1, ||A||_max)
  bool is_hermitian(double rel_tol = 1e-12) const;
  cplx trace() const { return entries_.trace(); }
  DenseOperator adjoint() const;
  double frobenius_norm() const { return entries_.norm(); }

  DenseOperator& operator+=(const DenseOperator& other);
  DenseOperator& operator-=(const DenseOperator& other);
  DenseOperator& operator*=(cplx s);

  friend DenseOperator operator+(DenseOperator a, const DenseOperator& b) { return a += b; }
  friend DenseOperator operator-(DenseOperator a, const DenseOperator& b) { return a -= b; }
  friend DenseOperator operator*(cplx s, DenseOperator a) { return a *= s; }
  friend DenseOperator operator*(const DenseOperator& a, const DenseOperator& b);

 private:
  QuditSystem system_;
  CMat entries_;
};

/// Hermitian, positive semidefinite (eigenvalues >= -1e-12), unit trace (1e-12).
class DensityMatrix {
 public:
  explicit DensityMatrix(DenseOperator op);

  static DensityMatrix pure(QuditSystem system, const CVec& ket);
  /// |index><index| on a single site.
  static DensityMatrix basis_state(int d, int index);
  static DensityMatrix maximally_mixed(QuditSystem system);

  const DenseOperator& op() const { return op_; }
  const CMat& matrix() const { return op_.matrix(); }
  const QuditSystem& system() const { return op_.system(); }

  RVec eigenvalues() const;
  double min_eigenvalue() const;
  bool is_pure(double tol = 1e-10) const;

 private:
  DenseOperator op_;
};

/// rho^{(x)n}
DensityMatrix product_power(const DensityMatrix& site_state, int n);

/// Reduced state on one site (partial trace over all others).
CMat partial_trace_to_site(const DenseOperator& op, int site);

/// If `state` equals sigma^{(x)n} for a single-site sigma (to 1e-10), returns sigma.
std::optional<DensityMatrix> as_product_power(const DensityMatrix& state);

/// Plain Kronecker product of matrices.
CMat kron(const CMat& a, const CMat& b);

/// Kronecker product; systems must share the local dimension.
DenseOperator tensor_product(const DenseOperator& a, const DenseOperator& b);

/// 1 (x) ... (x) a (x) ... (x) 1 with a at `site` (site 0 is the leftmost factor).
DenseOperator embed_at_site(const CMat& a, int site, QuditSystem system);

/// Product of single-site operators on distinct sites.
DenseOperator embed_sites(std::span<const std::pair<int, CMat>> factors, QuditSystem system);

/// perm[i] is the image of site i.
using Permutation = std::vector<int>;

bool is_permutation(const Permutation& perm);
/// (pi sigma)(i) = pi(sigma(i))
Permutation compose(const Permutation& pi, const Permutation& sigma);
Permutation inverse(const Permutation& pi);

/// U_pi (v_1 (x) ... (x) v_n) = v_{pi^-1(1)} (x) ... (x) v_{pi^-1(n)}: the
/// factor at site i is moved to site pi(i).
DenseOperator permutation_unitary(const Permutation& pi, QuditSystem system);

/// U_pi A U_pi^dagger, computed by relabelling matrix indices.
DenseOperator conjugate_by_permutation(const DenseOperator& a, const Permutation& pi);

/// n^{-1/2} sum_i a^{(i)}; requires tr(site_state a) = 0.
DenseOperator fluctuation_operator(const CMat& a, QuditSystem system,
                                   const DensityMatrix& site_state);

/// Hermitian basis {a : tr(state a) = 0} of dimension D^2 - 1: generalized
/// Gell-Mann matrices in the eigenbasis of `state` (descending eigenvalues),
/// each shifted by its expectation value. For |0><0| on a qubit this gives
/// {tau_1, tau_2, tau_3 - 1}.
std::vector<CMat> zero_mean_basis(const CMat& state);

/// Operators spanning T_Sigma for a fixed support Sigma.
struct SectorBasis {
  QuditSystem system;
  std::vector<int> support;
  std::vector<DenseOperator> operators;
  DensityMatrix site_state;
};

/// All sectors T_Sigma with min_size <= |Sigma| <= max_size, built from the
/// zero-mean basis of `site_state`. The empty support carries the identity.
std::vector<SectorBasis> sector_bases(QuditSystem system, const DensityMatrix& site_state,
                                      int min_size, int max_size);

/// Sectors spanning T_k (|Sigma| <= k); `state` must be a product power.
std::vector<SectorBasis> klocal_basis(int k, QuditSystem system, const DensityMatrix& state);
std::vector<SectorBasis> klocal_basis_for_site_state(int k, QuditSystem system,
                                                     const DensityMatrix& site_state);

/// Elements of the permutation-symmetric k-local sector H_k^S, one per word w
/// of degree j <= k over the zero-mean basis: n^{-j/2} sum over ordered tuples
/// of distinct sites of prod f_{w_l}^{(i_l)}. The vacuum word maps to 1.
struct SymmetricBasis {
  std::vector<DenseOperator> operators;
  std::vector<SymmetricWord> words;
};

SymmetricBasis symmetric_klocal_basis(int k, QuditSystem system, const DensityMatrix& state);
/// Same, over an explicit list of single-site letters.
SymmetricBasis symmetric_klocal_basis_from_letters(int k, QuditSystem system,
                                                   const std::vector<CMat>& letters);

/// The operator alpha(w) of a single word.
DenseOperator symmetric_word_operator(const SymmetricWord& word, QuditSystem system,
                                      const std::vector<CMat>& letters);

/// Greedy pruning in Hilbert-Schmidt geometry: keeps an element when the
/// squared norm of its residual against the kept ones exceeds
/// threshold * (its squared norm). Returns kept indices.
std::vector<std::size_t> independent_subset(std::span<const DenseOperator> ops,
                                            double threshold = 1e-10);

}  // namespace flab::ops
