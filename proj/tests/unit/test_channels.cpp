#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "flab/channels.hpp"
#include "flab/diffusion.hpp"
#include "flab/operators.hpp"
#include "helpers.hpp"

using namespace flab;
using channels::DepolarizingChannel;
using channels::PermutationAverage;
using flab::test::max_abs;
using flab::test::pauli;

namespace {

CVec vec(const CMat& a) { return Eigen::Map<const CVec>(a.data(), a.size()); }

// Sum over all n! permutations, written independently of the library average.
CMat brute_average(const CMat& a, ops::QuditSystem s) {
  ops::Permutation pi(s.n());
  for (int i = 0; i < s.n(); ++i) pi[i] = i;
  CMat acc = CMat::Zero(a.rows(), a.cols());
  int count = 0;
  do {
    const CMat u = ops::permutation_unitary(pi, s).matrix();
    acc += u * a * u.adjoint();
    ++count;
  } while (std::next_permutation(pi.begin(), pi.end()));
  return acc / count;
}

}  // namespace

TEST(Depolarizing, WorkedExamples) {
  const DepolarizingChannel d2(2.0, 2);
  CMat rho0 = CMat::Zero(2, 2);
  rho0(0, 0) = 1.0;
  CMat expect(2, 2);
  expect << 0.75, 0, 0, 0.25;
  EXPECT_LT(max_abs(d2.apply(rho0) - expect), 1e-15);
  EXPECT_LT(max_abs(d2.apply(pauli(1)) - 0.5 * pauli(1)), 1e-15);
  EXPECT_LT(max_abs(d2.apply(pauli(0)) - pauli(0)), 1e-15);

  const DepolarizingChannel one(1.0, 3);
  auto eng = test::engine(10);
  const CMat a = rng::ginibre(3, 3, eng);
  EXPECT_LT(max_abs(one.apply(a) - a), 1e-15);
  EXPECT_THROW(DepolarizingChannel(0.5, 2), DomainError);
}

TEST(Depolarizing, TransferMatrixActsOnColumnMajorVec) {
  auto eng = test::engine(11);
  for (int d : {2, 3}) {
    const DepolarizingChannel ch(3.0, d);
    const CMat t = ch.transfer_matrix();
    ASSERT_EQ(t.rows(), d * d);
    for (int s = 0; s < 5; ++s) {
      const CMat a = rng::ginibre(d, d, eng);
      EXPECT_LT((t * vec(a) - vec(ch.apply(a))).cwiseAbs().maxCoeff(), 1e-14);
    }
    // Eigenvalues: 1 on the identity, 1/y on the traceless part.
    const Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (t + t.adjoint()));
    EXPECT_NEAR(es.eigenvalues().maxCoeff(), 1.0, 1e-14);
    EXPECT_NEAR(es.eigenvalues().minCoeff(), 1.0 / 3.0, 1e-14);
  }
}

TEST(Depolarizing, PreservesDensityMatrices) {
  auto eng = test::engine(12);
  const DepolarizingChannel ch(1.7, 3);
  for (int s = 0; s < 10; ++s) {
    const auto rho = rng::random_density({3, 1}, eng);
    const auto out = channels::depolarize_apply(ch, rho);
    EXPECT_NEAR(out.matrix().trace().real(), 1.0, 1e-12);
    EXPECT_GE(out.min_eigenvalue(), rho.min_eigenvalue() / 1.7 - 1e-12);
  }
}

TEST(SuperoperatorChannel, KrausValidationAndCompleteness) {
  ops::QuditSystem s(2, 1);
  EXPECT_THROW(channels::SuperoperatorChannel::from_kraus(s, {2.0 * pauli(0)}), DomainError);
  auto eng = test::engine(13);
  const auto kraus = rng::random_kraus(2, 3, eng);
  const auto ch = channels::SuperoperatorChannel::from_kraus(s, kraus);
  EXPECT_LT(ch.trace_preservation_defect(), 1e-12);
  EXPECT_GE(ch.choi_min_eigenvalue(), -1e-12);
  const CMat a = rng::ginibre(2, 2, eng);
  CMat expect = CMat::Zero(2, 2);
  for (const auto& k : kraus) expect += k * a * k.adjoint();
  EXPECT_LT(max_abs(ch.apply(a) - expect), 1e-13);
}

TEST(SuperoperatorChannel, AdjointIsHilbertSchmidtDual) {
  auto eng = test::engine(14);
  ops::QuditSystem s(2, 2);
  const auto ch = channels::SuperoperatorChannel::from_kraus(s, rng::random_kraus(4, 2, eng));
  for (int t = 0; t < 10; ++t) {
    const CMat a = rng::ginibre(4, 4, eng);
    const CMat b = rng::ginibre(4, 4, eng);
    const cplx lhs = (ch.apply(a).adjoint() * b).trace();
    const cplx rhs = (a.adjoint() * ch.adjoint_apply(b)).trace();
    EXPECT_LT(std::abs(lhs - rhs), 1e-12);
  }
}

TEST(SuperoperatorChannel, RejectsNonCompletelyPositiveTranspose) {
  ops::QuditSystem s(2, 1);
  CMat transpose = CMat::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) transpose(i + 2 * j, j + 2 * i) = 1.0;
  EXPECT_THROW(channels::SuperoperatorChannel::from_superoperator(s, transpose), DomainError);
  EXPECT_NO_THROW(channels::SuperoperatorChannel::from_superoperator(s, transpose, false));
}

TEST(ProductChannel, MatchesKroneckerOfTransferMatrices) {
  const DepolarizingChannel ch(2.5, 2);
  const auto prod = channels::product_channel(ch, 2);
  auto eng = test::engine(15);
  const CMat a = rng::ginibre(2, 2, eng);
  const CMat b = rng::ginibre(2, 2, eng);
  const CMat ab = ops::kron(a, b);
  EXPECT_LT(max_abs(prod.apply(ab) - ops::kron(ch.apply(a), ch.apply(b))), 1e-14);
  // Linear extension to entangled inputs.
  const CMat r = rng::ginibre(4, 4, eng);
  const CMat superop = prod.superoperator_matrix();
  EXPECT_LT((superop * vec(r) - vec(prod.apply(r))).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT(prod.trace_preservation_defect(), 1e-13);
}

TEST(PermutationAverage, MatchesExplicitSumAndModesAgree) {
  auto eng = test::engine(16);
  for (int n = 2; n <= 4; ++n) {
    ops::QuditSystem s(2, n);
    const PermutationAverage exact(s, PermutationAverage::Mode::exact_sum);
    const PermutationAverage orbit(s, PermutationAverage::Mode::symmetric_projector);
    for (int t = 0; t < 4; ++t) {
      const CMat a = rng::ginibre(s.dim(), s.dim(), eng);
      const CMat ref = brute_average(a, s);
      EXPECT_LT(max_abs(exact.apply(a) - ref), 1e-12);
      EXPECT_LT(max_abs(orbit.apply(a) - ref), 1e-12);
    }
  }
}

TEST(PermutationAverage, IdempotentSelfAdjointAndFixesSymmetric) {
  auto eng = test::engine(17);
  ops::QuditSystem s(3, 3);
  const PermutationAverage p(s);
  for (int t = 0; t < 5; ++t) {
    const CMat a = rng::ginibre(27, 27, eng);
    const CMat b = rng::ginibre(27, 27, eng);
    const CMat pa = p.apply(a);
    EXPECT_LT(max_abs(p.apply(pa) - pa), 1e-12);
    EXPECT_LT(std::abs((pa.adjoint() * b).trace() - (a.adjoint() * p.apply(b)).trace()), 1e-10);
    const auto pi = rng::random_permutation(3, eng);
    const CMat u = ops::permutation_unitary(pi, s).matrix();
    EXPECT_LT(max_abs(u * pa * u.adjoint() - pa), 1e-12);
  }
}

TEST(PermutationAverage, CommutesWithProductChannels) {
  ops::QuditSystem s(2, 3);
  const PermutationAverage p(s);
  const auto dep = channels::product_channel(DepolarizingChannel(3.0, 2), 3);
  EXPECT_LT(channels::commutation_check(dep, p, 10, 99).max_residual, 1e-12);
  auto eng = test::engine(18);
  const auto site = channels::SuperoperatorChannel::from_kraus({2, 1}, rng::random_kraus(2, 2, eng));
  EXPECT_LT(channels::commutation_check(channels::product_channel(site, 3), p, 10, 7).max_residual, 1e-12);
}

TEST(HomogeneousChannel, IsUnitalTracePreservingAndPositive) {
  const auto n = channels::homogeneous_channel(DepolarizingChannel(2.0, 2), 3);
  EXPECT_LT(n.trace_preservation_defect(), 1e-12);
  EXPECT_GE(n.choi_min_eigenvalue(), -1e-10);
  EXPECT_LT(max_abs(n.apply(CMat::Identity(8, 8)) - CMat::Identity(8, 8)), 1e-12);
}

TEST(PairIndex, RoundTrip) {
  const channels::PairIndex idx{6};
  EXPECT_EQ(idx.size(), 30u);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto [i, j] = idx.pair(k);
    EXPECT_NE(i, j);
    EXPECT_EQ(idx(i, j), k);
  }
}

TEST(SwapDiffusion, GeneratorsAreSymmetricConservative) {
  const channels::SwapDiffusion sd(8, 0.1, 0.2);
  EXPECT_DOUBLE_EQ(sd.rate(), 2.0);
  for (int k : {1, 2}) {
    const RMat g = sd.sector_generator(k);
    EXPECT_LT((g - g.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT(g.rowwise().sum().cwiseAbs().maxCoeff(), 1e-13);
    const RMat s = sd.sector_semigroup(k);
    EXPECT_GE(s.minCoeff(), -1e-14);
    EXPECT_LT((s.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
  }
  EXPECT_THROW(channels::SwapDiffusion(65, 0.1, 0.1).sector_generator(1), DomainError);
}

TEST(SwapDiffusion, ZeroSigmaIsIdentity) {
  const channels::SwapDiffusion sd(10, 0.1, 0.0);
  EXPECT_LT((sd.sector_semigroup(1) - RMat::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SwapDiffusion, SemigroupComposes) {
  const channels::SwapDiffusion a(12, 0.1, 0.1);
  const channels::SwapDiffusion b(12, 0.1, 0.2);
  const channels::SwapDiffusion ab(12, 0.1, std::sqrt(0.05));
  for (int k : {1, 2}) {
    const RMat lhs = a.sector_semigroup(k) * b.sector_semigroup(k);
    EXPECT_LT((lhs - ab.sector_semigroup(k)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SwapDiffusion, TwoWalkerMarginalIsOneWalker) {
  const int L = 10;
  const channels::SwapDiffusion sd(L, 0.1, 0.3);
  const RMat s1 = sd.sector_semigroup(1);
  const RMat s2 = sd.sector_semigroup(2);
  const channels::PairIndex idx{L};
  // Start both walkers at (0, 3); the first walker's law is the k=1 kernel.
  const std::size_t start = idx(0, 3);
  for (int x = 0; x < L; ++x) {
    double marginal = 0.0;
    for (int y = 0; y < L; ++y)
      if (y != x) marginal += s2(idx(x, y), start);
    EXPECT_NEAR(marginal, s1(x, 0), 1e-12);
  }
}

TEST(SwapDiffusion, SectorsMatchDenseChannel) {
  const int L = 4;
  const channels::SwapDiffusion sd(L, 0.5, 0.4);
  const auto dense = channels::swap_diffusion_channel(sd, 2);
  ops::QuditSystem s(2, L);
  const CMat a = pauli(1);
  const CMat b = pauli(3) - pauli(0);

  const RMat s1 = sd.sector_semigroup(1);
  const auto out1 = dense.apply(ops::embed_at_site(a, 0, s).matrix());
  CMat expect1 = CMat::Zero(s.dim(), s.dim());
  for (int x = 0; x < L; ++x) expect1 += s1(x, 0) * ops::embed_at_site(a, x, s).matrix();
  EXPECT_LT(max_abs(out1 - expect1), 1e-12);

  const RMat s2 = sd.sector_semigroup(2);
  const channels::PairIndex idx{L};
  const std::pair<int, CMat> f0[] = {{0, a}, {1, b}};
  const auto out2 = dense.apply(ops::embed_sites(f0, s).matrix());
  CMat expect2 = CMat::Zero(s.dim(), s.dim());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto [i, j] = idx.pair(k);
    const std::pair<int, CMat> f[] = {{i, a}, {j, b}};
    expect2 += s2(k, idx(0, 1)) * ops::embed_sites(f, s).matrix();
  }
  EXPECT_LT(max_abs(out2 - expect2), 1e-12);
  EXPECT_LT(dense.trace_preservation_defect(), 1e-12);
}

TEST(SwapDiffusion, IndependentPairsIncludeCoincidences) {
  const channels::SwapDiffusion sd(8, 0.1, 0.2);
  const RMat ind = channels::independent_pair_semigroup(sd);
  const RMat s1 = sd.sector_semigroup(1);
  ASSERT_EQ(ind.rows(), 64);
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b)
      for (int c = 0; c < 8; ++c)
        for (int e = 0; e < 8; ++e) EXPECT_NEAR(ind(a * 8 + b, c * 8 + e), s1(a, c) * s1(b, e), 1e-14);
}
