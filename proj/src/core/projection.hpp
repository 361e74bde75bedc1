#pragma once

// Projection-based lack-of-fit statistic: cumulative sums of the residual
// marks over half-lines of the projected covariates, integrated over all
// projection directions in closed form.

#include <cstdint>
#include <span>

#include "core/quantile_regression.hpp"
#include "core/rng.hpp"

namespace qrlof {

struct ProjectionWeightMatrix {
  Matrix values;  // n x n, symmetric
  int dimension_d = 0;
  double scale_constant = 1.0;  // c_d
};

// Largest eigenvalue of a symmetric q x q matrix, plus the matrix itself.
struct LofStatistic {
  double value = 0.0;
  Matrix core_matrix;
};

// pi minus the angle between u and v. A zero vector is treated as lying in
// every half-space through the origin: one zero vector gives pi, two give
// 2 pi.
double complementary_angle(std::span<const double> u, std::span<const double> v);

// c_d = pi^(d/2 - 1) / Gamma(d/2 + 1).
double weight_constant(int d);

// Surface area of the unit sphere in R^d, 2 pi^(d/2) / Gamma(d/2).
double sphere_area(int d);

// A[i][j] = c_d * sum_r complementary_angle(X_i - X_r, X_j - X_r).
// The r-sum is split into fixed blocks and reduced pairwise in a fixed order,
// so the result is bit-identical for every thread count.
ProjectionWeightMatrix weight_matrix(const Matrix& covariates, unsigned threads = 1);

// Largest eigenvalue of n^-2 sum_i sum_j psi_i psi_j g_i g_j' W[i][j], the
// form shared by the projection and the indicator statistics.
LofStatistic quadratic_form_statistic(const Matrix& gradients, const Vector& marks,
                                      const Matrix& weights);

// psi(r_i) for every residual of the fit.
Vector residual_marks(const QuantileFit& fit);

// T_n. `gradient_covariates` are the null-model covariates (gradients come
// from the fit's design); A may be built from a wider covariate set.
LofStatistic lof_statistic(const QuantileFit& fit, const Matrix& gradient_covariates,
                           const ProjectionWeightMatrix& weights);

// n^-1/2 sum_i psi(r_i) g_i I(beta' X_i <= u), with X the projection covariates.
Vector projected_process(const QuantileFit& fit, const Matrix& gradient_covariates,
                         const Matrix& projection_covariates,
                         std::span<const double> beta, double u);

// Monte Carlo evaluation of the defining sphere integral. Independent of the
// closed form: directions are drawn uniformly on the sphere and the empirical
// measure of the projections is integrated exactly for each draw.
double mc_statistic(const QuantileFit& fit, const Matrix& gradient_covariates,
                    const Matrix& projection_covariates, std::size_t num_projections,
                    Stream& rng);

// Ratio mc_statistic / lof_statistic expected in the limit of many draws.
double expected_mc_ratio(int d);

}  // namespace qrlof
