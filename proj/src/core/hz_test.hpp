#pragma once

// Indicator-based comparison statistic: the marked residual process is
// evaluated on the orthants {X <= t} at the sample points.

#include "core/projection.hpp"

namespace qrlof {

// C[i][k] = #{j : X_i <= X_j and X_k <= X_j componentwise}. With this weight
// the indicator statistic has the same quadratic form as the projection one.
Matrix indicator_weight_matrix(const Matrix& covariates);

// R(t) = n^-1/2 sum_i psi(r_i) g_i I(X_i <= t); core = n^-1 sum_j R(X_j) R(X_j)'.
LofStatistic hz_statistic(const QuantileFit& fit, const Matrix& gradient_covariates,
                          const Matrix& indicator_covariates);

inline LofStatistic hz_statistic(const QuantileFit& fit, const Matrix& covariates) {
  return hz_statistic(fit, covariates, covariates);
}

}  // namespace qrlof
