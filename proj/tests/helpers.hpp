#pragma once

#include <Eigen/Dense>

#include "uavrelay/channel.hpp"
#include "uavrelay/rng.hpp"

namespace testing {

inline uavrelay::CMatrix random_cmatrix(int rows, int cols, uavrelay::Rng& rng) {
  uavrelay::CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = uavrelay::complex_normal(rng, 1.0);
  return m;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::max(std::abs(a), std::abs(b))); }

}  // namespace testing
