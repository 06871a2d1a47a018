#include <cmath>

#include <gtest/gtest.h>

#include "flab/bounds.hpp"
#include "flab/channels.hpp"
#include "flab/fock.hpp"
#include "flab/operators.hpp"
#include "flab/words.hpp"
#include "helpers.hpp"

using namespace flab;
using flab::test::max_abs;

namespace {

struct QubitSetup {
  double y;
  ops::DensityMatrix rho;
  channels::DepolarizingChannel dep;
  fock::SingleParticleSpace in;
  fock::SingleParticleSpace out;
  CMat m;

  explicit QubitSetup(double y_, int d = 2)
      : y(y_),
        rho(ops::DensityMatrix::basis_state(d, 0)),
        dep(y_, d),
        in(fock::SingleParticleSpace::from_state(rho)),
        out(fock::SingleParticleSpace::from_state(channels::depolarize_apply(dep, rho))),
        m(fock::single_particle_map(dep, out, in)) {}
};

// tr(rho^{(x)n} alpha(u)^dagger alpha(v)) from dense operators.
cplx dense_inner(const SymmetricWord& u, const SymmetricWord& v, const ops::DensityMatrix& site, int n) {
  const ops::QuditSystem s(site.system().d(), n);
  const auto letters = ops::zero_mean_basis(site.matrix());
  const CMat au = ops::symmetric_word_operator(u, s, letters).matrix();
  const CMat av = ops::symmetric_word_operator(v, s, letters).matrix();
  return (ops::product_power(site, n).matrix() * au.adjoint() * av).trace();
}

}  // namespace

TEST(Words, CanonicalOrderAndCounts) {
  EXPECT_EQ(SymmetricWord({2, 0, 1}).letters(), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(SymmetricWord().degree(), 0);
  EXPECT_EQ(words_of_degree(3, 2).size(), 6u);
  EXPECT_EQ(words_of_degree(3, 3).size(), 10u);
  EXPECT_EQ(words_up_to_degree(3, 2).size(), 10u);
}

TEST(Permanent, SmallCases) {
  CMat k(2, 2);
  k << 1, 2, 3, 4;
  EXPECT_NEAR(std::abs(permanent(k, {0, 1}, {0, 1}) - cplx(10.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(permanent(k, {0, 0}, {1, 1}) - cplx(8.0)), 0.0, 1e-15);
  const CMat ones = CMat::Ones(4, 4);
  EXPECT_NEAR(permanent(ones, {0, 1, 2, 3}, {0, 1, 2, 3}).real(), 24.0, 1e-12);
  EXPECT_NEAR(std::abs(permanent(k, {}, {}) - cplx(1.0)), 0.0, 1e-15);
}

TEST(FiniteN, FactorValues) {
  EXPECT_DOUBLE_EQ(fock::finite_n_factor(4, 2), 0.75);
  EXPECT_DOUBLE_EQ(fock::finite_n_factor(5, 0), 1.0);
  EXPECT_DOUBLE_EQ(fock::finite_n_factor(3, 3), 6.0 / 27.0);
  EXPECT_DOUBLE_EQ(fock::finite_n_factor(2, 3), 0.0);
}

TEST(FiniteN, MatchesDenseOperators) {
  auto eng = test::engine(30);
  const auto sites = std::vector<ops::DensityMatrix>{ops::DensityMatrix::basis_state(2, 0),
                                                      rng::random_density({2, 1}, eng)};
  for (const auto& site : sites) {
    const auto sp = fock::SingleParticleSpace::from_state(site);
    for (int n = 1; n <= 4; ++n) {
      for (const auto& u : words_up_to_degree(3, 2)) {
        for (const auto& v : words_up_to_degree(3, 2)) {
          if (u.degree() > n || v.degree() > n) continue;
          const cplx ref = dense_inner(u, v, site, n);
          EXPECT_LT(std::abs(fock::finite_n_inner(sp.kernel(), u, v, n) - ref), 1e-11)
              << "n=" << n << " u=" << u.to_string() << " v=" << v.to_string();
        }
      }
    }
  }
}

TEST(FiniteN, ProportionalToLimit) {
  const QubitSetup q(2.0);
  const auto words = words_of_degree(3, 2);
  for (int n : {2, 4, 8, 16}) {
    for (const auto& u : words) {
      for (const auto& v : words) {
        const cplx lim = fock::limiting_inner(q.in.kernel(), u, v);
        EXPECT_LT(std::abs(fock::finite_n_inner(q.in.kernel(), u, v, n) - fock::finite_n_factor(n, 2) * lim), 1e-12);
      }
    }
  }
  EXPECT_EQ(fock::limiting_inner(q.in.kernel(), SymmetricWord({0}), SymmetricWord({0, 1})), cplx(0.0));
}

TEST(Clt, DeviationDecaysLikeOneOverN) {
  const QubitSetup q(2.0);
  const auto uv = single_word(SymmetricWord({0, 1}));
  const auto rep = fock::clt_convergence(q.in.kernel(), uv, uv, {4, 8, 16, 32});
  EXPECT_TRUE(rep.monotone);
  EXPECT_NEAR(rep.rate, -1.0, 0.05);
  const auto vac = single_word(SymmetricWord());
  EXPECT_TRUE(fock::clt_convergence(q.in.kernel(), vac, vac, {4, 8}).all_zero);
}

TEST(SingleParticle, GroundStateKernelAndNullReduction) {
  const QubitSetup q(2.0);
  CMat expect(3, 3);
  expect << 1, cplx(0, 1), 0, cplx(0, -1), 1, 0, 0, 0, 0;
  EXPECT_LT(max_abs(q.in.kernel() - expect), 1e-15);
  const RMat r = fock::reduce_null(q.in);
  EXPECT_EQ(r.cols(), 2);
  EXPECT_LT(q.m.imag().cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SingleParticle, MapReproducesHeisenbergAction) {
  const QubitSetup q(3.0);
  for (int a = 0; a < q.out.size(); ++a) {
    CMat image = CMat::Zero(2, 2);
    for (int b = 0; b < q.in.size(); ++b) image += q.m(b, a) * q.in.basis()[b];
    EXPECT_LT(max_abs(image - q.dep.apply(q.out.basis()[a])), 1e-12);
  }
}

TEST(FockBlock, ShapesForOrderedAndSymmetric) {
  const QubitSetup q(2.0);
  const auto ord = fock::fock_block(q.out, q.in, q.m, 2, fock::TensorSector::ordered);
  const auto sym = fock::fock_block(q.out, q.in, q.m, 2, fock::TensorSector::symmetric);
  EXPECT_EQ(ord.tuples.size(), 4u);
  EXPECT_EQ(sym.tuples.size(), 3u);
  EXPECT_LT((ord.gram_in - ord.gram_in.transpose()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(FockBlock, QubitWorkedExample) {
  for (double y : {1.5, 2.0, 4.0}) {
    const QubitSetup q(y);
    const double a = 1.0 / (y * y);
    const auto k1 = fock::fock_block_spectrum(q.out, q.in, q.m, 1);
    ASSERT_EQ(k1.size(), 2u);
    EXPECT_NEAR(k1.eigenvalues[0], a, 1e-10);
    EXPECT_NEAR(k1.eigenvalues[1], a, 1e-10);
    const double b = 2 * a / (1 + y * y);
    const auto k2 = fock::fock_block_spectrum(q.out, q.in, q.m, 2, fock::TensorSector::ordered);
    ASSERT_EQ(k2.size(), 4u);
    EXPECT_NEAR(k2.eigenvalues[0], b, 1e-10);
    EXPECT_NEAR(k2.eigenvalues[1], b, 1e-10);
    EXPECT_NEAR(k2.eigenvalues[2], 0.0, 1e-10);
    const auto s2 = fock::fock_block_spectrum(q.out, q.in, q.m, 2, fock::TensorSector::symmetric);
    ASSERT_EQ(s2.size(), 3u);
    EXPECT_NEAR(s2.eigenvalues[0], b, 1e-10);
    EXPECT_NEAR(s2.eigenvalues[2], 0.0, 1e-10);
  }
}

TEST(FockBlock, IdentityChannelIsUnit) {
  const QubitSetup q(1.0);
  for (int k = 1; k <= 3; ++k) {
    const auto sp = fock::fock_block_spectrum(q.out, q.in, q.m, k, fock::TensorSector::symmetric);
    for (std::size_t i = 0; i < sp.size(); ++i) {
      if (!sp.labels[i].null) EXPECT_NEAR(sp.eigenvalues[i], 1.0, 1e-10);
    }
  }
}

TEST(SymmetricSector, FiniteNSpectrumEqualsLimit) {
  const QubitSetup q(2.0);
  for (int j : {1, 2}) {
    geometry::SolveOptions opts;
    opts.report_null_as_zero = true;
    const auto lim = geometry::solve_contraction(fock::symmetric_sector_problem(q.out, q.in, q.m, j, 0).problem, opts);
    for (int n : {4, 8}) {
      const auto fin =
          geometry::solve_contraction(fock::symmetric_sector_problem(q.out, q.in, q.m, j, n).problem, opts);
      ASSERT_EQ(fin.size(), lim.size());
      for (std::size_t i = 0; i < fin.size(); ++i) EXPECT_NEAR(fin.eigenvalues[i], lim.eigenvalues[i], 1e-10);
    }
  }
}

TEST(Beta, ValuesAndMonotonicity) {
  EXPECT_NEAR(fock::beta_bound_value({2, 3.0, 1}), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(fock::beta_bound_value({2, 3.0, 2}), 1.0 / 9.0, 1e-15);
  EXPECT_DOUBLE_EQ(fock::beta_bound_value({2, 3.0, 0}), 1.0);
  EXPECT_THROW(fock::beta_bound_value({2, 1.0, 1}), DomainError);
  EXPECT_TRUE(fock::beta_decreasing(2, 3.0));
  EXPECT_FALSE(fock::beta_decreasing(2, 2.0));
  EXPECT_FALSE(fock::beta_decreasing(3, 2.0));
}

TEST(Beta, SampledRatiosRespectBound) {
  const auto rep = fock::beta_bound_test(3, 2, 3.0, 1, 50, 31, true);
  EXPECT_EQ(rep.violations, 0);
  EXPECT_EQ(rep.per_sector_violations, 0);
  EXPECT_LE(rep.max_ratio, rep.beta * (1 + 1e-10));
  EXPECT_GT(rep.max_ratio, 0.0);
}
