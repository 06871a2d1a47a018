#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "flab/operators.hpp"
#include "flab/types.hpp"

namespace flab::rng {

using Engine = std::mt19937_64;

/// Counter-based stream split: the seed for stream s of root seed r is the
/// splitmix64 finalizer applied to r + (s + 1) * 0x9E3779B97F4A7C15.
std::uint64_t split_seed(std::uint64_t root, std::uint64_t stream);

Engine make_engine(std::uint64_t root, std::uint64_t stream);

/// Entries i.i.d. standard complex normal.
CMat ginibre(Eigen::Index rows, Eigen::Index cols, Engine& eng);
RVec gaussian_vector(Eigen::Index size, Engine& eng);

/// Haar-distributed unitary via QR with phase correction.
CMat haar_unitary(Eigen::Index dim, Engine& eng);

/// Random Hermitian matrix (GUE-like, unit scale).
CMat random_hermitian(Eigen::Index dim, Engine& eng);

/// Full-rank random state G G^dagger / tr, mixed with `floor` * 1/dim so the
/// smallest eigenvalue is at least floor / dim.
ops::DensityMatrix random_density(ops::QuditSystem system, Engine& eng, double floor = 0.05);

/// Kraus operators of a random channel with `rank` outputs: blocks of the
/// first dim columns of a Haar unitary on dim * rank.
std::vector<CMat> random_kraus(Eigen::Index dim, int rank, Engine& eng);

ops::Permutation random_permutation(int n, Engine& eng);

}  // namespace flab::rng
