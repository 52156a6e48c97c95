#pragma once

#include <cmath>
#include <cstdint>

#include "stochacc/phase_space.hpp"
#include "stochacc/wiener.hpp"

namespace testing {

inline stochacc::Vector random_point(std::uint64_t seed, std::uint64_t index, Eigen::Index dim,
                                     double lo = -2.0, double hi = 2.0) {
  stochacc::rng::CounterRng r(seed, stochacc::rng::Stream::probe, index, 99);
  stochacc::Vector z(dim);
  for (Eigen::Index i = 0; i < dim; ++i) z[i] = lo + (hi - lo) * r.uniform();
  return z;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double rel_err(const stochacc::Matrix& a, const stochacc::Matrix& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace testing
