#include "flab/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace flab::rng {

std::uint64_t split_seed(std::uint64_t root, std::uint64_t stream) {
  std::uint64_t z = root + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Engine make_engine(std::uint64_t root, std::uint64_t stream) { return Engine(split_seed(root, stream)); }

CMat ginibre(Eigen::Index rows, Eigen::Index cols, Engine& eng) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  CMat m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double re = nd(eng);
      const double im = nd(eng);
      m(r, c) = cplx(re, im);
    }
  }
  return m;
}

RVec gaussian_vector(Eigen::Index size, Engine& eng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  RVec v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = nd(eng);
  return v;
}

CMat haar_unitary(Eigen::Index dim, Engine& eng) {
  CMat z = ginibre(dim, dim, eng);
  Eigen::HouseholderQR<CMat> qr(z);
  CMat q = qr.householderQ() * CMat::Identity(dim, dim);
  const CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < dim; ++i) {
    const cplx rii = r(i, i);
    const double a = std::abs(rii);
    if (a > 0.0) q.col(i) *= rii / a;
  }
  return q;
}

CMat random_hermitian(Eigen::Index dim, Engine& eng) {
  CMat g = ginibre(dim, dim, eng);
  return (g + g.adjoint()) * 0.5;
}

ops::DensityMatrix random_density(ops::QuditSystem system, Engine& eng, double floor) {
  const auto dim = static_cast<Eigen::Index>(system.dim());
  CMat g = ginibre(dim, dim, eng);
  CMat rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = (1.0 - floor) * rho + floor * CMat::Identity(dim, dim) / static_cast<double>(dim);
  rho = (rho + rho.adjoint()).eval() * 0.5;
  rho /= rho.trace().real();
  return ops::DensityMatrix(ops::DenseOperator(system, rho));
}

std::vector<CMat> random_kraus(Eigen::Index dim, int rank, Engine& eng) {
  if (rank < 1) throw DomainError("random_kraus: rank must be >= 1");
  const CMat u = haar_unitary(dim * rank, eng);
  std::vector<CMat> out;
  out.reserve(static_cast<std::size_t>(rank));
  for (int i = 0; i < rank; ++i) out.push_back(u.block(i * dim, 0, dim, dim));
  return out;
}

ops::Permutation random_permutation(int n, Engine& eng) {
  ops::Permutation p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), eng);
  return p;
}

}  // namespace flab::rng
