#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "flab/lattice.hpp"
#include "flab/operators.hpp"
#include "helpers.hpp"

using namespace flab;
using namespace flab::lattice;
using flab::test::max_abs;
using flab::test::pauli;

namespace {

constexpr double pi = std::numbers::pi;

const ops::DensityMatrix& ground() {
  static const auto rho = ops::DensityMatrix::basis_state(2, 0);
  return rho;
}

// Random Hermitian field with every mode strictly below the cutoff.
BandlimitedField random_field(const RingLattice& lat, double cutoff, rng::Engine& eng) {
  std::map<int, CMat> c;
  for (int m : lat.modes()) {
    if (m < 0 || std::abs(lat.momentum(m)) >= cutoff) continue;
    if (m == 0) {
      c[0] = rng::random_hermitian(2, eng);
    } else {
      c[m] = rng::ginibre(2, 2, eng);
      c[-m] = c[m].adjoint();
    }
  }
  return BandlimitedField(lat, cutoff, c);
}

}  // namespace

TEST(RingLattice, MomentaAndWrapping) {
  const RingLattice lat(16, 0.5);
  EXPECT_DOUBLE_EQ(lat.length(), 8.0);
  EXPECT_DOUBLE_EQ(lat.nyquist(), pi / 0.5);
  EXPECT_NEAR(lat.momentum(1), 2 * pi / 8.0, 1e-15);
  const auto modes = lat.modes();
  ASSERT_EQ(modes.size(), 16u);
  EXPECT_EQ(modes.front(), -7);
  EXPECT_EQ(modes.back(), 8);
  for (int m : modes) EXPECT_EQ(lat.mode_of(lat.momentum(m)), m);
  EXPECT_EQ(lat.wrap(9), -7);
  EXPECT_EQ(lat.wrap(-8), 8);
  EXPECT_THROW(lat.mode_of(0.1), DomainError);
  EXPECT_THROW(RingLattice(7, 1.0), DomainError);
  EXPECT_THROW(RingLattice(16, 0.0), DomainError);
}

TEST(BandlimitedField, ValidatesModes) {
  const RingLattice lat(16, 1.0);
  EXPECT_THROW(BandlimitedField(lat, lat.momentum(2), {{2, pauli(1)}, {-2, pauli(1)}}), DomainError);
  EXPECT_THROW(BandlimitedField(lat, 3.0, {{1, pauli(1)}, {-1, pauli(3)}}), DomainError);
  const auto f = cosine_mode(lat, 3.0, 1, pauli(1));
  for (double x : {0.0, 0.3, 5.1}) {
    const CMat v = f.value(x);
    EXPECT_LT(max_abs(v - v.adjoint()), 1e-15);
    EXPECT_LT(max_abs(v - std::cos(lat.momentum(1) * x) * pauli(1)), 1e-14);
  }
}

TEST(Shannon, SampleReconstructRoundTrip) {
  auto eng = test::engine(40);
  const RingLattice lat(32, 0.25);
  const auto f = random_field(lat, 0.6 * lat.nyquist(), eng);
  const auto back = shannon_reconstruct(lat, sample_field(f), f.cutoff());
  for (double x : {0.0, 0.123, 1.7, 7.9}) EXPECT_LT(max_abs(back.value(x) - f.value(x)), 1e-12);
}

TEST(Shannon, RefinedLatticeKeepsContinuumField) {
  auto eng = test::engine(41);
  const RingLattice coarse(16, 0.5);
  const RingLattice fine(64, 0.125);
  const auto f = random_field(coarse, 0.9 * coarse.nyquist(), eng);
  const auto g = f.on_lattice(fine);
  for (double x : {0.0, 0.77, 3.3}) EXPECT_LT(max_abs(g.value(x) - f.value(x)), 1e-12);
  EXPECT_THROW(f.on_lattice(RingLattice(64, 0.25)), DomainError);
}

TEST(Shannon, RejectsOutOfBandInput) {
  const RingLattice lat(16, 1.0);
  EXPECT_THROW(sample_field(cosine_mode(lat, 4.0, 0, pauli(1))), DomainError);
  std::vector<CMat> alternating;
  for (int j = 0; j < 16; ++j) alternating.push_back((j % 2 ? -1.0 : 1.0) * pauli(1));
  EXPECT_THROW(shannon_reconstruct(lat, alternating, lat.momentum(3)), DomainError);
}

TEST(Smoother, MultiplierAndQuadratureAgree) {
  auto eng = test::engine(42);
  const RingLattice lat(16, 0.5);
  const SmoothingKernel k(lat, 0.4);
  EXPECT_DOUBLE_EQ(k.multiplier(0.0), 1.0);
  EXPECT_NEAR(k.multiplier(2.0), std::exp(-0.16 * 2.0), 1e-15);
  const auto f = random_field(lat, 0.8 * lat.nyquist(), eng);
  const auto sf = smoother_apply(k, f);
  for (double x : {0.0, 1.3, 6.2}) {
    EXPECT_LT(max_abs(smoother_convolve_at(k, f, x, 4096) - sf.value(x)), 1e-10);
  }
}

TEST(Smoother, SemigroupInVarianceAndZeroWidth) {
  auto eng = test::engine(43);
  const RingLattice lat(16, 0.5);
  const auto f = random_field(lat, 0.8 * lat.nyquist(), eng);
  const auto twice = smoother_apply(SmoothingKernel(lat, 0.3), smoother_apply(SmoothingKernel(lat, 0.4), f));
  const auto once = smoother_apply(SmoothingKernel(lat, 0.5), f);
  const auto same = smoother_apply(SmoothingKernel(lat, 0.0), f);
  for (double x : {0.2, 2.9}) {
    EXPECT_LT(max_abs(twice.value(x) - once.value(x)), 1e-13);
    EXPECT_LT(max_abs(same.value(x) - f.value(x)), 1e-15);
  }
  EXPECT_THROW(SmoothingKernel(lat, -0.1), DomainError);
}

TEST(ModeContraction, ClosedFormOnRing) {
  const RingLattice lat(32, 1.0);
  for (double r : {1.0, 2.0, 4.0}) {
    for (double y : {1.5, 2.0}) {
      for (int m : lat.modes()) {
        const double p = lat.momentum(m);
        const double expect = std::exp(-r * r * (1 - std::cos(p))) / y;
        EXPECT_NEAR(mode_contraction_k1(lat, r, y, p), expect, 1e-10 * std::max(1.0, expect));
      }
    }
  }
}

TEST(ModeContraction, ZeroMomentumAndZeroSigma) {
  const RingLattice lat(16, 0.1);
  EXPECT_NEAR(mode_contraction_k1(lat, 0.3, 2.0, 0.0), 0.5, 1e-12);
  for (int m : lat.modes()) EXPECT_NEAR(mode_contraction_k1(lat, 0.0, 2.0, lat.momentum(m)), 0.5, 1e-12);
}

TEST(ModeContraction, DecreasesTowardNyquist) {
  const RingLattice lat(32, 1.0);
  double prev = 1.0;
  for (int m = 0; m <= 16; ++m) {
    const double e = mode_contraction_k1(lat, 1.0, 2.0, lat.momentum(m));
    EXPECT_LT(e, prev + 1e-15);
    prev = e;
  }
}

TEST(ModeContraction, MixedStateLetters) {
  const RingLattice lat(16, 1.0);
  auto eng = test::engine(44);
  const auto rho = rng::random_density({2, 1}, eng);
  for (int letter = 0; letter < 3; ++letter) {
    const double e = mode_contraction_k1(lat, 1.0, 2.0, lat.momentum(3), rho, letter);
    EXPECT_GT(e, 0.0);
    EXPECT_LE(e, 1.0);
  }
}

TEST(Unproven1, KOneRespectsLatticeBound) {
  const auto rep = unproven1_probe(RingLattice(16, 1.0), 1.0, 2.0, pi / 2, 1, 20, 7);
  EXPECT_TRUE(rep.asserted);
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(rep.max_eta, rep.sup_eta + 1e-12);
  EXPECT_LE(rep.sup_eta, rep.lattice_bound * (1 + 1e-10));
  const auto zero = unproven1_probe(RingLattice(16, 1.0), 0.0, 2.0, pi / 2, 1, 5, 7);
  EXPECT_NEAR(zero.max_eta, 0.5, 1e-10);
}

TEST(Unproven1, KTwoReportsOnly) {
  const auto rep = unproven1_probe(RingLattice(16, 1.0), 1.0, 2.0, pi / 2, 2, 10, 7);
  EXPECT_FALSE(rep.asserted);
  EXPECT_GT(rep.max_eta, 0.0);
  EXPECT_THROW(unproven1_probe(RingLattice(16, 1.0), 1.0, 2.0, pi / 2, 3, 10, 7), DomainError);
}

TEST(Continuum, ZeroFieldGivesExactProduct) {
  const RingLattice lat(8, 0.125);
  const BandlimitedField zero(lat, lat.nyquist(), {{0, CMat::Zero(2, 2)}});
  const auto rep = continuum_inner_convergence(zero, zero, ground(), {0.125, 0.0625});
  for (const auto& row : rep.rows) {
    EXPECT_EQ(row.deviation, 0.0);
    EXPECT_NEAR(std::abs(row.product - cplx(1.0)), 0.0, 1e-15);
  }
}

TEST(Continuum, FirstOrderConvergence) {
  const RingLattice base(16, 1.0 / 16);
  const auto f = cosine_mode(base, base.nyquist(), 1, pauli(1));
  std::vector<double> eps;
  for (int k = 0; k < 4; ++k) eps.push_back(1.0 / (16 << k));
  const auto rep = continuum_inner_convergence(f, f, ground(), eps);
  EXPECT_NEAR(rep.inner.real(), 0.5, 1e-12);
  EXPECT_TRUE(rep.strictly_decreasing);
  EXPECT_NEAR(rep.rate, 1.0, 0.1);
  for (const auto& row : rep.rows) EXPECT_LT(row.quadrature, 1e-10);
}

TEST(Unproven2, DegreeOneZeroMomentumIsExact) {
  const RingLattice lat(32, 1.0 / 32);
  const auto row = unproven2_probe(lat, 0.1, 1, ground(), 0);
  EXPECT_LT(row.deviation, 1e-12);
}

TEST(Unproven2, DegreeOneErrorShrinksAsEpsSquared) {
  const auto rep = unproven2_scan(1.0, 0.25, 1, {2, 4, 8}, ground());
  ASSERT_EQ(rep.rows.size(), 3u);
  EXPECT_TRUE(rep.pass);
  for (const auto& row : rep.rows) EXPECT_LE(row.deviation, row.bound);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const double ratio = rep.rows[i - 1].deviation / rep.rows[i].deviation;
    EXPECT_NEAR(ratio, 4.0, 0.5);
  }
}

TEST(Unproven2, DegreeTwoIndependentDeviationDecreases) {
  const auto rep = unproven2_scan(1.0, 0.25, 2, {2, 4}, ground());
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_TRUE(rep.pass);
  EXPECT_GT(rep.rows[0].dev_independent, rep.rows[1].dev_independent);
  EXPECT_GT(rep.rows[0].dev_dynamics, rep.rows[1].dev_dynamics);
}
