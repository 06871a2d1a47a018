#include <cmath>

#include <gtest/gtest.h>

#include "flab/channels.hpp"
#include "flab/contraction.hpp"
#include "flab/info_geometry.hpp"
#include "flab/operators.hpp"
#include "helpers.hpp"

using namespace flab;
using flab::test::max_abs;
using flab::test::pauli;

namespace {

CMat diag2(double a, double b) {
  CMat m = CMat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

// Zero-mean Hermitian operator at rho.
CMat zero_mean_hermitian(const CMat& rho, rng::Engine& eng) {
  CMat a = rng::random_hermitian(rho.rows(), eng);
  const cplx mean = (rho * a).trace();
  return a - mean.real() * CMat::Identity(rho.rows(), rho.cols());
}

}  // namespace

TEST(Omega, RoundTripOnFullRankStates) {
  auto eng = test::engine(20);
  for (int d : {2, 3, 4}) {
    const auto rho = rng::random_density({d, 1}, eng);
    for (int t = 0; t < 5; ++t) {
      const CMat a = rng::random_hermitian(d, eng);
      const CMat x = geometry::omega_apply(rho.matrix(), a);
      EXPECT_LT(max_abs(geometry::omega_inverse_apply(rho.matrix(), x) - a), 1e-10);
    }
  }
}

TEST(Omega, DiagonalStateActsEntrywise) {
  const CMat rho = diag2(0.75, 0.25);
  const CMat out = geometry::omega_apply(rho, pauli(1));
  EXPECT_NEAR(out(0, 1).real(), 0.5, 1e-15);
  EXPECT_NEAR(out(1, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(std::abs(out(0, 0)), 0.0, 1e-15);
}

TEST(Omega, InverseRejectsSingularState) {
  EXPECT_THROW(geometry::omega_inverse_apply(diag2(1.0, 0.0), pauli(1)), NumericalError);
}

TEST(Bures, WorkedExamples) {
  EXPECT_NEAR(geometry::bures_norm(diag2(0.75, 0.25), pauli(3) - 0.5 * pauli(0)), std::sqrt(0.75), 1e-15);
  EXPECT_NEAR(geometry::bures_norm(diag2(1.0, 0.0), pauli(1)), 1.0, 1e-15);
  EXPECT_NEAR(geometry::bures_norm(diag2(1.0, 0.0), pauli(3) - pauli(0)), 0.0, 1e-15);
  EXPECT_NEAR(geometry::bures_norm(0.5 * pauli(0), pauli(2)), 1.0, 1e-15);
}

TEST(Bures, CotangentValidation) {
  const auto rho = ops::DensityMatrix::basis_state(2, 0);
  ops::QuditSystem s(2, 1);
  EXPECT_THROW(geometry::CotangentVector(ops::DenseOperator(s, pauli(3)), rho), DomainError);
  EXPECT_THROW(geometry::CotangentVector(ops::DenseOperator(s, CMat(pauli(1) * cplx(0, 1))), rho), DomainError);
  const geometry::CotangentVector a(ops::DenseOperator(s, pauli(1)), rho);
  EXPECT_NEAR(a.norm(), 1.0, 1e-15);
  const auto x = geometry::to_tangent(a);
  EXPECT_NEAR(std::abs(x.op().trace()), 0.0, 1e-15);
}

TEST(Gns, QubitGramAtGroundState) {
  const auto rho = ops::DensityMatrix::basis_state(2, 0);
  ops::QuditSystem s(2, 1);
  std::vector<ops::DenseOperator> basis;
  for (const auto& a : ops::zero_mean_basis(rho.matrix())) basis.emplace_back(s, a);
  const auto space = geometry::gns_build(rho, basis);
  CMat expect(3, 3);
  expect << 1, cplx(0, 1), 0, cplx(0, -1), 1, 0, 0, 0, 0;
  EXPECT_LT(max_abs(space.gram_complex - expect), 1e-15);
  EXPECT_LT((space.gram_real - expect.real()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(space.null_dimension, 1);
}

TEST(Gns, RejectsNonZeroMeanElements) {
  const auto rho = ops::DensityMatrix::basis_state(2, 0);
  ops::QuditSystem s(2, 1);
  EXPECT_THROW(geometry::gns_build(rho, {ops::DenseOperator(s, pauli(3))}), DomainError);
  EXPECT_NO_THROW(geometry::gns_build(rho, {ops::DenseOperator::identity(s)}));
}

TEST(Gns, RealGramIsBuresPolarization) {
  auto eng = test::engine(21);
  const auto rho = rng::random_density({3, 1}, eng);
  std::vector<ops::DenseOperator> basis;
  for (int i = 0; i < 4; ++i) basis.emplace_back(ops::QuditSystem(3, 1), zero_mean_hermitian(rho.matrix(), eng));
  const RMat g = geometry::real_gram(rho.matrix(), basis);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const CMat sum = basis[i].matrix() + basis[j].matrix();
      const CMat diff = basis[i].matrix() - basis[j].matrix();
      const double pol = 0.25 * (std::pow(geometry::bures_norm(rho.matrix(), sum), 2) -
                                 std::pow(geometry::bures_norm(rho.matrix(), diff), 2));
      EXPECT_NEAR(g(i, j), pol, 1e-12);
    }
  }
}

TEST(ContractedNorm, IdentityChannelPreservesNorm) {
  auto eng = test::engine(22);
  const auto rho = rng::random_density({2, 2}, eng);
  const auto id = channels::SuperoperatorChannel::identity({2, 2});
  const CMat a = zero_mean_hermitian(rho.matrix(), eng);
  EXPECT_NEAR(geometry::contracted_norm(id, rho, a), geometry::bures_norm(rho.matrix(), a), 1e-12);
}

TEST(ContractedNorm, MaximallyMixedQubitContractsByOneOverY) {
  for (double y : {1.5, 2.0, 4.0}) {
    const auto ch = channels::product_channel(channels::DepolarizingChannel(y, 2), 1);
    const auto rho = ops::DensityMatrix::maximally_mixed({2, 1});
    for (int i = 1; i <= 3; ++i) {
      const double ratio = geometry::contracted_norm(ch, rho, pauli(i)) / geometry::bures_norm(rho.matrix(), pauli(i));
      EXPECT_NEAR(ratio * ratio, 1.0 / (y * y), 1e-12);
    }
  }
}

TEST(ContractedNorm, DataProcessingInequality) {
  const auto rep = geometry::data_processing_check(100, 23);
  EXPECT_EQ(rep.samples, 100);
  EXPECT_EQ(rep.violations, 0);
  EXPECT_LE(rep.max_ratio, 1.0 + 1e-10);
}

TEST(Contraction, IdentityChannelHasUnitSpectrum) {
  const ops::QuditSystem s(2, 2);
  const auto site = ops::DensityMatrix::basis_state(2, 0);
  const auto space = geometry::sector_space(s, site, 1, 2);
  const auto spec =
      geometry::contraction_spectrum(channels::SuperoperatorChannel::identity(s), space, space);
  ASSERT_GT(spec.size(), 0u);
  for (double e : spec.eigenvalues) EXPECT_NEAR(e, 1.0, 1e-10);
}

TEST(Contraction, MaximallyMixedSingleSite) {
  const ops::QuditSystem s(2, 1);
  const auto site = ops::DensityMatrix::maximally_mixed(s);
  const auto in = geometry::sector_space(s, site, 1, 1);
  const double y = 3.0;
  const auto ch = channels::product_channel(channels::DepolarizingChannel(y, 2), 1);
  const auto out = geometry::sector_space(s, ch.apply(site), 1, 1);
  const auto spec = geometry::contraction_spectrum(ch, out, in);
  ASSERT_EQ(spec.size(), 3u);
  for (double e : spec.eigenvalues) EXPECT_NEAR(e, 1.0 / (y * y), 1e-12);
}

TEST(Contraction, SpectrumBoundedAndMatchesRatios) {
  auto eng = test::engine(24);
  const ops::QuditSystem s(2, 2);
  const auto site = ops::DensityMatrix::basis_state(2, 0);
  const auto ch = channels::homogeneous_channel(channels::DepolarizingChannel(2.0, 2), 2);
  const auto in = geometry::sector_space(s, site, 1, 2);
  const auto rho = ops::product_power(site, 2);
  const auto out = geometry::sector_space(s, *ops::as_product_power(ch.apply(rho)), 1, 2);
  const auto prob = geometry::contraction_problem(ch, out, in);
  const auto spec = geometry::solve_contraction(prob);
  ASSERT_GT(spec.size(), 0u);
  EXPECT_LE(spec.eigenvalues.front(), 1.0 + 1e-12);
  for (std::size_t i = 1; i < spec.size(); ++i) EXPECT_GE(spec.eigenvalues[i - 1], spec.eigenvalues[i] - 1e-14);
  // Random directions never exceed the top eigenvalue.
  for (int t = 0; t < 50; ++t) {
    const RVec c = rng::gaussian_vector(prob.gram_in.rows(), eng);
    const double r = geometry::contraction_ratio(prob, c);
    EXPECT_LE(r * r, spec.eigenvalues.front() + 1e-10);
  }
  // Eigenvectors realise their eigenvalues.
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double r = geometry::contraction_ratio(prob, spec.eigenvectors.col(static_cast<Eigen::Index>(i)));
    EXPECT_NEAR(r * r, spec.eigenvalues[i], 1e-9);
  }
}

TEST(Contraction, NullDirectionsReportedSeparately) {
  const ops::QuditSystem s(2, 1);
  const auto site = ops::DensityMatrix::basis_state(2, 0);
  const auto space = geometry::sector_space(s, site, 1, 1);
  EXPECT_EQ(space.null_dimension, 1);
  geometry::SolveOptions opts;
  opts.report_null_as_zero = true;
  const auto id = channels::SuperoperatorChannel::identity(s);
  const auto spec = geometry::contraction_spectrum(id, space, space, opts);
  ASSERT_EQ(spec.size(), 3u);
  EXPECT_EQ(spec.null_dimension, 1);
  EXPECT_TRUE(spec.labels.back().null);
  EXPECT_EQ(spec.eigenvalues.back(), 0.0);
}

TEST(Contraction, SingularOutputNeedsOptIn) {
  const ops::QuditSystem s(2, 1);
  const auto site = ops::DensityMatrix::basis_state(2, 0);
  const auto space = geometry::sector_space(s, site, 1, 1);
  const auto ch = channels::product_channel(channels::DepolarizingChannel(1.0, 2), 1);
  EXPECT_NO_THROW(geometry::contraction_spectrum(ch, space, space, {}, true));
}

TEST(KlocalDecay, SlopesFollowLocality) {
  const auto rep = geometry::klocal_decay_check(3, 2, {4.0, 8.0, 16.0, 32.0}, 1, 20, 25);
  ASSERT_EQ(rep.slope_sup.size(), 2u);
  for (int k = 0; k <= 1; ++k) {
    EXPECT_LE(rep.slope_sup[k], -(k + 1) + 0.2);
    EXPECT_LE(rep.slope_sampled[k], -(k + 1) + 0.2);
  }
  EXPECT_EQ(rep.bound_violations, 0);
}

TEST(LoglogSlope, RecoversPowerLaw) {
  EXPECT_NEAR(geometry::loglog_slope({1, 2, 4, 8}, {1, 0.25, 0.0625, 0.015625}), -2.0, 1e-12);
}
