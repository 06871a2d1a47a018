#include "flab/diffusion.hpp"

#include <cmath>
#include <string>

namespace flab::channels {

std::size_t PairIndex::operator()(int i, int j) const {
  if (i < 0 || j < 0 || i >= L || j >= L || i == j) throw DomainError("PairIndex: invalid ordered pair");
  return static_cast<std::size_t>(i) * static_cast<std::size_t>(L - 1) +
         static_cast<std::size_t>(j < i ? j : j - 1);
}

std::pair<int, int> PairIndex::pair(std::size_t index) const {
  const int i = static_cast<int>(index / static_cast<std::size_t>(L - 1));
  const int r = static_cast<int>(index % static_cast<std::size_t>(L - 1));
  return {i, r < i ? r : r + 1};
}

SwapDiffusion::SwapDiffusion(int L, double eps, double sigma) : L_(L), eps_(eps), sigma_(sigma) {
  if (L < 3) throw DomainError("SwapDiffusion: ring needs at least 3 sites");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("SwapDiffusion: spacing eps must be > 0");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("SwapDiffusion: sigma must be >= 0");
}

double SwapDiffusion::rate() const {
  const double r = sigma_ / eps_;
  return 0.5 * r * r;
}

RMat SwapDiffusion::sector_generator(int k) const {
  if (k == 1) {
    if (L_ > max_sites_k1) throw DomainError("SwapDiffusion: k=1 sector supports L <= 64");
    RMat g = RMat::Zero(L_, L_);
    for (int i = 0; i < L_; ++i) {
      g(i, i) -= 2.0;
      g(i, (i + 1) % L_) += 1.0;
      g(i, (i + L_ - 1) % L_) += 1.0;
    }
    return g;
  }
  if (k == 2) {
    if (L_ > max_sites_k2) throw DomainError("SwapDiffusion: k=2 sector supports L <= 32");
    PairIndex idx{L_};
    const auto n = static_cast<Eigen::Index>(idx.size());
    RMat g = RMat::Zero(n, n);
    for (int u = 0; u < L_; ++u) {
      const int v = (u + 1) % L_;
      auto swap = [&](int s) { return s == u ? v : (s == v ? u : s); };
      for (std::size_t a = 0; a < idx.size(); ++a) {
        const auto [i, j] = idx.pair(a);
        const auto b = idx(swap(i), swap(j));
        g(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) += 1.0;
        g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) -= 1.0;
      }
    }
    return g;
  }
  throw DomainError("SwapDiffusion: only k = 1 and k = 2 sectors are supported (got " +
                    std::to_string(k) + ")");
}

RMat symmetric_expm(const RMat& s, double t) {
  Eigen::SelfAdjointEigenSolver<RMat> es(s);
  const RVec ex = (t * es.eigenvalues().array()).exp().matrix();
  return es.eigenvectors() * ex.asDiagonal() * es.eigenvectors().transpose();
}

RMat SwapDiffusion::sector_semigroup(int k) const {
  RMat g = sector_generator(k);
  if (sigma_ == 0.0) return RMat::Identity(g.rows(), g.cols());
  return symmetric_expm(g, rate());
}

CMat diffusion_semigroup_on_sector(const SwapDiffusion& sd, int k, const CMat& coefficients) {
  const RMat s = sd.sector_semigroup(k);
  if (coefficients.rows() != s.rows()) {
    throw DomainError("diffusion_semigroup_on_sector: expected " + std::to_string(s.rows()) +
                      " coefficient rows");
  }
  return s.cast<cplx>() * coefficients;
}

RMat independent_pair_semigroup(const SwapDiffusion& sd) {
  const RMat k1 = sd.sector_semigroup(1);
  const Eigen::Index L = k1.rows();
  RMat out(L * L, L * L);
  for (Eigen::Index i = 0; i < L; ++i) {
    for (Eigen::Index j = 0; j < L; ++j) out.block(i * L, j * L, L, L) = k1(i, j) * k1;
  }
  return out;
}

SuperoperatorChannel swap_diffusion_channel(const SwapDiffusion& sd, int d) {
  ops::QuditSystem sys(d, sd.sites());
  const auto dim = static_cast<Eigen::Index>(sys.dim());
  if (dim * dim > 4096) throw DomainError("swap_diffusion_channel: ring too large for a dense superoperator");
  const int L = sd.sites();
  RMat g = RMat::Zero(dim * dim, dim * dim);
  for (int u = 0; u < L; ++u) {
    ops::Permutation pi(static_cast<std::size_t>(L));
    for (int s = 0; s < L; ++s) pi[static_cast<std::size_t>(s)] = s;
    std::swap(pi[static_cast<std::size_t>(u)], pi[static_cast<std::size_t>((u + 1) % L)]);
    const RMat uu = ops::permutation_unitary(pi, sys).matrix().real();
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) {
        if (uu(i, j) != 0.0) g.block(i * dim, j * dim, dim, dim) += uu(i, j) * uu;
      }
    }
    g -= RMat::Identity(dim * dim, dim * dim);
  }
  RMat s = sd.sigma() == 0.0 ? RMat::Identity(dim * dim, dim * dim) : symmetric_expm(g, sd.rate());
  return SuperoperatorChannel::from_superoperator(sys, s.cast<cplx>());
}

}  // namespace flab::channels
