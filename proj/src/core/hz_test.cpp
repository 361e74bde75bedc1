#include "core/hz_test.hpp"

#include <cmath>

#include "core/error.hpp"

namespace qrlof {

namespace {

// L[j][i] = I(X_i <= X_j).
Matrix dominance_indicators(const Matrix& x) {
  const Eigen::Index n = x.rows();
  Matrix below(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      below(j, i) = (x.row(i).array() <= x.row(j).array()).all() ? 1.0 : 0.0;
  return below;
}

}  // namespace

Matrix indicator_weight_matrix(const Matrix& covariates) {
  if (!covariates.allFinite())
    fail(ErrorCode::invalid_argument, "covariates contain non-finite values");
  const Matrix below = dominance_indicators(covariates);
  return below.transpose() * below;
}

LofStatistic hz_statistic(const QuantileFit& fit, const Matrix& gradient_covariates,
                          const Matrix& indicator_covariates) {
  const Matrix g = design_matrix(gradient_covariates, fit.design_has_intercept);
  const Eigen::Index n = g.rows();
  if (g.cols() != fit.theta.size() || fit.residuals.size() != n ||
      indicator_covariates.rows() != n)
    fail(ErrorCode::invalid_argument, "indicator statistic inputs differ in dimension");

  const Matrix marked = residual_marks(fit).asDiagonal() * g;
  const Matrix process =
      dominance_indicators(indicator_covariates) * marked / std::sqrt(double(n));
  Matrix core = process.transpose() * process / static_cast<double>(n);

  LofStatistic stat;
  stat.core_matrix = 0.5 * (core + core.transpose());
  if (stat.core_matrix.rows() == 1) {
    stat.value = stat.core_matrix(0, 0);
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(stat.core_matrix,
                                                 Eigen::EigenvaluesOnly);
    stat.value = solver.eigenvalues().maxCoeff();
  }
  return stat;
}

}  // namespace qrlof
