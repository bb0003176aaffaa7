#pragma once

// Small generated datasets for the tests.

#include <cstdint>
#include <random>

#include "budgetsvm/data.hpp"

namespace synthetic {

/// Two isotropic 2-D Gaussian blobs centred at (+-separation, 0) with unit
/// spread 0.5; labels alternate so any prefix is balanced.
inline budgetsvm::Dataset blobs(std::size_t n, std::uint64_t seed, double separation = 2.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.5);
  budgetsvm::Dataset ds;
  for (std::size_t k = 0; k < n; ++k) {
    const int y = k % 2 == 0 ? 1 : -1;
    const double x1 = y * separation + noise(rng);
    const double x2 = noise(rng);
    ds.push_back(budgetsvm::SparseVector{{1, x1}, {2, x2}}, y);
  }
  return ds;
}

}  // namespace synthetic
