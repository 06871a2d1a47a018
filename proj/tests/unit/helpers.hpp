#pragma once

#include <gtest/gtest.h>

#include "flab/random.hpp"
#include "flab/types.hpp"

namespace flab::test {

inline CMat pauli(int i) {
  CMat m(2, 2);
  switch (i) {
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 3: m << 1, 0, 0, -1; break;
    default: m = CMat::Identity(2, 2);
  }
  return m;
}

inline double max_abs(const CMat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline rng::Engine engine(std::uint64_t stream) { return rng::make_engine(0xF1AB, stream); }

}  // namespace flab::test
