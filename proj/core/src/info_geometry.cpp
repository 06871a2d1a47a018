#include "flab/info_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "linalg.hpp"

namespace flab::geometry {

using ops::DenseOperator;
using ops::DensityMatrix;

CMat omega_apply(const CMat& rho, const CMat& a) {
  if (rho.rows() != a.rows() || rho.cols() != a.cols()) throw DomainError("omega_apply: dimension mismatch");
  return 0.5 * (rho * a + a * rho);
}

DenseOperator omega_apply(const DensityMatrix& rho, const DenseOperator& a) {
  return DenseOperator(a.system(), omega_apply(rho.matrix(), a.matrix()));
}

CMat omega_inverse_apply(const CMat& rho, const CMat& x) {
  if (rho.rows() != x.rows() || rho.cols() != x.cols()) {
    throw DomainError("omega_inverse_apply: dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(rho);
  const RVec& lam = es.eigenvalues();
  if (lam.minCoeff() <= 1e-10) {
    throw NumericalError("omega_inverse_apply",
                         "state is singular (min eigenvalue " + std::to_string(lam.minCoeff()) +
                             "); Omega^-1 is undefined there, use the GNS-side formulation");
  }
  const CMat& v = es.eigenvectors();
  CMat xt = v.adjoint() * x * v;
  for (Eigen::Index j = 0; j < xt.cols(); ++j) {
    for (Eigen::Index i = 0; i < xt.rows(); ++i) xt(i, j) *= 2.0 / (lam(i) + lam(j));
  }
  return v * xt * v.adjoint();
}

DenseOperator omega_inverse_apply(const DensityMatrix& rho, const DenseOperator& x) {
  return DenseOperator(x.system(), omega_inverse_apply(rho.matrix(), x.matrix()));
}

double bures_norm(const CMat& rho, const CMat& a) {
  if (rho.rows() != a.rows()) throw DomainError("bures_norm: dimension mismatch");
  const double v = (rho * a * a).trace().real();
  return std::sqrt(std::max(0.0, v));
}

double bures_norm(const DensityMatrix& rho, const DenseOperator& a) { return bures_norm(rho.matrix(), a.matrix()); }

double contracted_norm(const channels::SuperoperatorChannel& n, const DensityMatrix& rho, const CMat& a) {
  if (n.is_identity()) return bures_norm(rho.matrix(), a);
  const CMat sigma = n.apply(rho.matrix());
  const CMat y = n.apply(omega_apply(rho.matrix(), a));
  const CMat b = omega_inverse_apply(0.5 * (sigma + sigma.adjoint()), 0.5 * (y + y.adjoint()));
  return std::sqrt(std::max(0.0, (y * b).trace().real()));
}

namespace {

double zero_mean_tol(const CMat& a) { return 1e-12 * std::max(1.0, a.norm()); }

bool is_identity_multiple(const CMat& a) {
  const cplx mean = a.trace() / static_cast<double>(a.rows());
  return (a - mean * CMat::Identity(a.rows(), a.cols())).norm() <= 1e-12 * std::max(1.0, a.norm());
}

CMat stack_vec(const std::vector<CMat>& ms) {
  if (ms.empty()) return CMat();
  const Eigen::Index len = ms.front().size();
  CMat out(len, static_cast<Eigen::Index>(ms.size()));
  for (std::size_t i = 0; i < ms.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const CVec>(ms[i].data(), len);
  }
  return out;
}

// tr(rho A_i^dagger B_j)
CMat cross_gram(const CMat& rho, const std::vector<CMat>& a, const std::vector<CMat>& b) {
  if (a.empty() || b.empty()) {
    return CMat::Zero(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  }
  std::vector<CMat> br;
  br.reserve(b.size());
  for (const auto& m : b) br.push_back(m * rho);
  return stack_vec(a).adjoint() * stack_vec(br);
}

std::vector<CMat> matrices(const std::vector<DenseOperator>& ops) {
  std::vector<CMat> out;
  out.reserve(ops.size());
  for (const auto& o : ops) out.push_back(o.matrix());
  return out;
}

}  // namespace

CotangentVector::CotangentVector(DenseOperator a, DensityMatrix state) : a_(std::move(a)), state_(std::move(state)) {
  if (!(a_.system() == state_.system())) throw DomainError("CotangentVector: system mismatch");
  if (!a_.is_hermitian()) throw DomainError("CotangentVector: operator must be Hermitian");
  if (std::abs((state_.matrix() * a_.matrix()).trace()) > zero_mean_tol(a_.matrix())) {
    throw DomainError("CotangentVector: tr(rho A) must vanish");
  }
}

TangentVector::TangentVector(DenseOperator x, DensityMatrix state) : x_(std::move(x)), state_(std::move(state)) {
  if (!(x_.system() == state_.system())) throw DomainError("TangentVector: system mismatch");
  if (!x_.is_hermitian()) throw DomainError("TangentVector: operator must be Hermitian");
  if (std::abs(x_.trace()) > zero_mean_tol(x_.matrix())) throw DomainError("TangentVector: tr(X) must vanish");
}

TangentVector to_tangent(const CotangentVector& a) {
  DenseOperator x = omega_apply(a.state(), a.op());
  x = DenseOperator(x.system(), 0.5 * (x.matrix() + x.matrix().adjoint()));
  return TangentVector(std::move(x), a.state());
}

RMat real_gram(const CMat& rho, const std::vector<DenseOperator>& basis) {
  const auto m = matrices(basis);
  RMat g = cross_gram(rho, m, m).real();
  return 0.5 * (g + g.transpose());
}

GnsSpace gns_build(const DensityMatrix& state, std::vector<DenseOperator> basis, double null_threshold) {
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& b = basis[i];
    if (!(b.system() == state.system())) throw DomainError("gns_build: basis element " + std::to_string(i) + " acts on another system");
    if (!b.is_hermitian(1e-10)) throw DomainError("gns_build: basis element " + std::to_string(i) + " is not Hermitian");
    const double mean = std::abs((state.matrix() * b.matrix()).trace());
    if (mean > zero_mean_tol(b.matrix()) && !is_identity_multiple(b.matrix())) {
      throw DomainError("gns_build: basis element " + std::to_string(i) + " has non-zero mean " + std::to_string(mean));
    }
  }
  GnsSpace sp{state, std::move(basis), {}, {}, null_threshold, 0, {}};
  const auto m = matrices(sp.basis);
  sp.gram_complex = cross_gram(state.matrix(), m, m);
  sp.gram_complex = 0.5 * (sp.gram_complex + sp.gram_complex.adjoint()).eval();
  sp.gram_real = sp.gram_complex.real();
  if (sp.gram_real.rows() > 0) {
    Eigen::SelfAdjointEigenSolver<RMat> es(sp.gram_real, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, top)) {
      throw NumericalError("gns_build", "real Gram matrix is not positive semidefinite");
    }
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      if (es.eigenvalues()(i) < null_threshold * top || top <= 0.0) ++sp.null_dimension;
    }
  }
  return sp;
}

double min_eigenvalue(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

ChannelMatrix channel_gns_matrix(const channels::SuperoperatorChannel& n, const GnsSpace& out_space,
                                 const GnsSpace& in_space, bool allow_singular_output) {
  if (!(n.system() == in_space.state.system()) || !(n.system() == out_space.state.system())) {
    throw DomainError("channel_gns_matrix: channel and spaces act on different systems");
  }
  const CMat& rho = in_space.state.matrix();
  const CMat sigma = n.apply(rho);
  if ((sigma - out_space.state.matrix()).cwiseAbs().maxCoeff() > 1e-10) {
    throw DomainError("channel_gns_matrix: output space state is not N(rho)");
  }
  if (!n.is_identity() && !allow_singular_output && min_eigenvalue(sigma) <= 1e-10) {
    throw NumericalError("channel_gns_matrix", "coarse-grained state N(rho) is singular");
  }

  std::vector<CMat> images;
  images.reserve(out_space.size());
  ChannelMatrix out;
  for (const auto& e : out_space.basis) {
    CMat img = n.adjoint_apply(e.matrix());
    img = 0.5 * (img + img.adjoint()).eval();
    if (!is_identity_multiple(e.matrix())) {
      out.max_mean = std::max(out.max_mean, std::abs((rho * img).trace()));
    }
    images.push_back(std::move(img));
  }
  const auto in_m = matrices(in_space.basis);
  const RMat r = cross_gram(rho, in_m, images).real();
  const RMat gpinv = detail::psd_pinv(in_space.gram_real, in_space.null_threshold);
  out.m = gpinv * r;
  if (out.max_mean > 1e-10) {
    throw NumericalError("channel_gns_matrix", "N^dagger did not preserve zero mean (" + std::to_string(out.max_mean) + ")");
  }

  // remainders, in the GNS and Hilbert-Schmidt geometries
  const CMat xin = stack_vec(in_m);
  const RMat hs = xin.cols() > 0 ? RMat((xin.adjoint() * xin).real()) : RMat();
  Eigen::CompleteOrthogonalDecomposition<RMat> hs_solver(hs);
  for (std::size_t a = 0; a < images.size(); ++a) {
    const CMat& img = images[a];
    const double self = std::max(0.0, (rho * img * img).trace().real());
    const RVec ra = r.col(static_cast<Eigen::Index>(a));
    const double proj = ra.dot(gpinv * ra);
    if (self > 0.0) out.residual_gns = std::max(out.residual_gns, std::sqrt(std::max(0.0, self - proj) / self));
    const double hnorm = img.norm();
    if (hnorm > 0.0 && xin.cols() > 0) {
      const CVec v = Eigen::Map<const CVec>(img.data(), img.size());
      const RVec b = (xin.adjoint() * v).real();
      const RVec coef = hs_solver.solve(b);
      out.residual_hs = std::max(out.residual_hs, (v - xin * coef.cast<cplx>()).norm() / hnorm);
    }
  }
  return out;
}

}  // namespace flab::geometry
