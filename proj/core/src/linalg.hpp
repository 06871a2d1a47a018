#pragma once

#include <algorithm>

#include "flab/types.hpp"

namespace flab::detail {

// Pseudo-inverse of a symmetric PSD matrix, dropping eigenvalues below thr * max.
inline RMat psd_pinv(const RMat& g, double thr) {
  if (g.rows() == 0) return g;
  Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (g + g.transpose()));
  const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
  RVec inv = RVec::Zero(g.rows());
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    if (top > 0.0 && es.eigenvalues()(i) > thr * top) inv(i) = 1.0 / es.eigenvalues()(i);
  }
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace flab::detail
