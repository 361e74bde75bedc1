#pragma once

// Check-loss machinery and exact linear quantile regression.

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace qrlof {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct DataSample {
  Matrix covariates;  // n x d
  Vector response;    // n

  Eigen::Index rows() const { return covariates.rows(); }
  Eigen::Index cols() const { return covariates.cols(); }

  // Throws Error(invalid_argument) unless n >= 1, d >= 1, the shapes agree
  // and every entry is finite.
  void validate() const;
};

struct QuantileFit {
  double tau = 0.5;
  Vector theta;
  Vector residuals;
  double objective = 0.0;
  bool design_has_intercept = true;
  // Observations interpolated by the optimal basic solution, in basis order.
  std::vector<Eigen::Index> basis;
  int iterations = 0;

  Vector fitted(const Vector& response) const { return response - residuals; }
};

// rho_tau(r) = tau r for r > 0, (tau - 1) r for r < 0, and 0 at r = 0.
double check_loss(double r, double tau);

// Derivative of the check loss away from zero; psi(0) = 0.
double psi(double r, double tau);

// Regressor vector of the linear model: (1, x) with an intercept, else x.
Vector model_gradient(std::span<const double> x, std::span<const double> theta,
                      bool with_intercept);

// n x q design matrix; its rows are model_gradient of the covariate rows.
Matrix design_matrix(const Matrix& covariates, bool with_intercept);

// Minimises sum_i rho_tau(y_i - x_i' theta) over theta. The result is an
// optimal basic solution: q observations are interpolated exactly.
QuantileFit fit_linear_quantile(const DataSample& sample, double tau,
                                bool with_intercept = true);

// Same, on a prepared design. warm_basis (q observation indices) is used as
// the starting vertex when it is nonsingular.
QuantileFit fit_design(const Matrix& design, const Vector& response, double tau,
                       bool design_has_intercept,
                       std::span<const Eigen::Index> warm_basis = {});

double total_check_loss(const Vector& residuals, double tau);

void require_tau(double tau);

}  // namespace qrlof
