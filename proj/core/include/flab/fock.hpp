#pragma once

#include <string>
#include <vector>

#include "flab/channels.hpp"
#include "flab/contraction.hpp"
#include "flab/operators.hpp"
#include "flab/types.hpp"
#include "flab/words.hpp"

namespace flab::fock {

/// One-particle space: zero-mean Hermitian single-site operators f_i with
/// K_ij = tr(rho f_i f_j).
class SingleParticleSpace {
 public:
  /// Basis from ops::zero_mean_basis(state).
  static SingleParticleSpace from_state(const ops::DensityMatrix& site_state);
  static SingleParticleSpace custom(const ops::DensityMatrix& site_state, std::vector<CMat> basis);

  const ops::DensityMatrix& state() const { return state_; }
  const std::vector<CMat>& basis() const { return basis_; }
  const CMat& kernel() const { return k_; }
  RMat gram_real() const { return k_.real(); }
  int size() const { return static_cast<int>(basis_.size()); }
  int d() const { return state_.system().d(); }

 private:
  SingleParticleSpace(ops::DensityMatrix state, std::vector<CMat> basis);
  ops::DensityMatrix state_;
  std::vector<CMat> basis_;
  CMat k_;
};

/// Columns R spanning the non-null part of the space: basis elements with
/// vanishing diagonal Gram entry are dropped first, any remaining degeneracy
/// is removed through the range of Re K.
RMat reduce_null(const SingleParticleSpace& sp, double threshold = 1e-10);

/// Coefficients of the single-site Heisenberg map: D^dagger(f'_a) =
/// sum_b m(b, a) f_b, by Hilbert-Schmidt least squares. Returns a complex
/// matrix; it is real for Hermitian bases.
CMat single_particle_map(const channels::DepolarizingChannel& ch, const SingleParticleSpace& out,
                         const SingleParticleSpace& in);
CMat single_particle_map(const channels::SuperoperatorChannel& site_channel, const SingleParticleSpace& out,
                         const SingleParticleSpace& in);

/// <u, v>_n from the generating function (1 - sum_il s_i t_l K(u_i, v_l) / n)^n:
/// the multilinear coefficient is expanded symbolically and the sign of
/// order j is removed, so <u, v>_n = n! / ((n - j)! n^j) perm(K_uv) for words
/// of common degree j.
cplx finite_n_inner(const CMat& kernel, const WordCombination& u, const WordCombination& v, int n);
cplx finite_n_inner(const CMat& kernel, const SymmetricWord& u, const SymmetricWord& v, int n);

/// n -> infinity: sum over permutations of prod K(u_i, v_pi(i)); zero across degrees.
cplx limiting_inner(const CMat& kernel, const WordCombination& u, const WordCombination& v);
cplx limiting_inner(const CMat& kernel, const SymmetricWord& u, const SymmetricWord& v);

/// n! / ((n - j)! n^j)
double finite_n_factor(int n, int j);

struct CltRow {
  int n = 0;
  cplx finite;
  cplx limit;
  double deviation = 0.0;
};

struct CltReport {
  std::vector<CltRow> rows;
  double rate = 0.0;  ///< log-log slope of deviation against n; NaN if deviations vanish
  bool monotone = true;
  bool all_zero = true;
};

CltReport clt_convergence(const CMat& kernel, const WordCombination& u, const WordCombination& v,
                          const std::vector<int>& n_list);

/// How tensor indices are enumerated in a Fock block.
enum class TensorSector {
  ordered,    ///< all r^k ordered index tuples, Gram Re(K^{(x)k})
  symmetric,  ///< multisets of k indices, Gram Re of the permanent inner product
};

struct FockBlock {
  int k = 0;
  TensorSector sector = TensorSector::ordered;
  std::vector<std::vector<int>> tuples;  ///< index tuples over the reduced in-basis
  RMat gram_in;                          ///< K_k
  RMat gram_out;                         ///< K'_k
  RMat channel;                          ///< M_k
};

/// Degree-k block for one-particle spaces out (V') and in (V) with map m.
/// Null directions are reduced first. Throws DomainError if m has a
/// non-negligible imaginary part.
FockBlock fock_block(const SingleParticleSpace& out, const SingleParticleSpace& in, const CMat& m, int k,
                     TensorSector sector = TensorSector::ordered);

/// Eigenvalues of M_k K'_k^+ M_k^T K_k, nulls reported as zeros, labelled
/// with polynomials in x, p for a pure qubit state.
geometry::ContractionSpectrum fock_block_spectrum(const SingleParticleSpace& out, const SingleParticleSpace& in,
                                                  const CMat& m, int k,
                                                  TensorSector sector = TensorSector::ordered);

/// Contraction problem on the symmetric words of exact degree j over the full
/// (unreduced) letter sets, with Gram matrices Re <u, v>_n; n = 0 selects the
/// limit. This is the finite-n symmetric sector of P o D^{(x)n} computed
/// combinatorially, without dense operators.
struct SymmetricSectorProblem {
  std::vector<SymmetricWord> in_words;
  std::vector<SymmetricWord> out_words;
  geometry::ContractionProblem problem;
};

SymmetricSectorProblem symmetric_sector_problem(const SingleParticleSpace& out, const SingleParticleSpace& in,
                                                const CMat& m, int degree, int n);

/// Word-level channel matrix: coefficient of in-word w in the image of out-word w'.
RMat word_channel_matrix(const RMat& m, const std::vector<SymmetricWord>& out_words,
                         const std::vector<SymmetricWord>& in_words);

/// Default cap on Fock degrees.
inline constexpr int max_degree = 4;

}  // namespace flab::fock
