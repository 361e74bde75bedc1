#pragma once

#include <cstdint>

#include "core/quantile_regression.hpp"
#include "core/rng.hpp"

namespace qrlof::testing {

// Uniform(0,1) covariates and a linear response with normal noise.
inline DataSample random_sample(std::size_t n, std::size_t d, std::uint64_t seed,
                                double noise = 1.0) {
  Stream rng(seed, 0);
  DataSample s;
  s.covariates.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  s.response.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < s.covariates.rows(); ++i) {
    double y = 1.0;
    for (Eigen::Index k = 0; k < s.covariates.cols(); ++k) {
      s.covariates(i, k) = rng.uniform();
      y += s.covariates(i, k);
    }
    s.response(i) = y + noise * rng.normal();
  }
  return s;
}

}  // namespace qrlof::testing
