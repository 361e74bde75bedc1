#include "core/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace qrlof {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Eigen::Index kBlockRows = 16;

// pi minus the angle between unit vectors a and b, via Kahan's
// 2 atan2(|a - b|, |a + b|), which stays accurate for nearly parallel or
// opposite directions where acos of the cosine loses half the digits.
double unit_complement(const double* a, const double* b, Eigen::Index d) {
  double minus = 0.0, plus = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    minus += (a[k] - b[k]) * (a[k] - b[k]);
    plus += (a[k] + b[k]) * (a[k] + b[k]);
  }
  return kPi - 2.0 * std::atan2(std::sqrt(minus), std::sqrt(plus));
}

Matrix gradients_of(const QuantileFit& fit, const Matrix& covariates) {
  Matrix g = design_matrix(covariates, fit.design_has_intercept);
  if (g.cols() != fit.theta.size())
    fail(ErrorCode::invalid_argument, "covariates do not match the fitted model");
  if (g.rows() != fit.residuals.size())
    fail(ErrorCode::invalid_argument, "covariates and residuals differ in length");
  return g;
}

double largest_eigenvalue(const Matrix& symmetric) {
  if (symmetric.rows() == 1) return symmetric(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

// Adds the angle sums of outer indices [first, last) into the upper triangle.
void accumulate_block(const Matrix& x, Eigen::Index first, Eigen::Index last,
                      Matrix& sum) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  Matrix unit(d, n);  // column i: direction of X_i - X_r
  std::vector<bool> zero(static_cast<std::size_t>(n));
  for (Eigen::Index r = first; r < last; ++r) {
    for (Eigen::Index i = 0; i < n; ++i) {
      unit.col(i) = (x.row(i) - x.row(r)).transpose();
      const double norm = unit.col(i).norm();
      zero[static_cast<std::size_t>(i)] = norm == 0.0;
      if (norm > 0.0) unit.col(i) /= norm;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool zj = zero[static_cast<std::size_t>(j)];
      for (Eigen::Index i = 0; i <= j; ++i) {
        const bool zi = zero[static_cast<std::size_t>(i)];
        double angle;
        if (zi && zj) {
          angle = 2.0 * kPi;
        } else if (zi || zj) {
          angle = kPi;
        } else {
          angle = unit_complement(unit.col(i).data(), unit.col(j).data(), d);
        }
        sum(i, j) += angle;
      }
    }
  }
}

}  // namespace

double complementary_angle(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    fail(ErrorCode::invalid_argument, "vectors differ in dimension");
  double uu = 0.0, vv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    uu += u[k] * u[k];
    vv += v[k] * v[k];
  }
  const bool u_zero = uu == 0.0;
  const bool v_zero = vv == 0.0;
  if (u_zero && v_zero) return 2.0 * kPi;
  if (u_zero || v_zero) return kPi;
  const double nu = std::sqrt(uu), nv = std::sqrt(vv);
  std::vector<double> a(u.size()), b(v.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    a[k] = u[k] / nu;
    b[k] = v[k] / nv;
  }
  return unit_complement(a.data(), b.data(), static_cast<Eigen::Index>(a.size()));
}

double weight_constant(int d) {
  return std::pow(kPi, 0.5 * d - 1.0) / std::tgamma(0.5 * d + 1.0);
}

double sphere_area(int d) {
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

double expected_mc_ratio(int d) {
  // The lune integral is A0 * pi^(d/2-1) / Gamma(d/2); c_d uses Gamma(d/2+1).
  return std::tgamma(0.5 * d + 1.0) / std::tgamma(0.5 * d);
}

ProjectionWeightMatrix weight_matrix(const Matrix& covariates, unsigned threads) {
  const Eigen::Index n = covariates.rows();
  const Eigen::Index d = covariates.cols();
  if (n < 1 || d < 1) fail(ErrorCode::invalid_argument, "weight matrix needs n, d >= 1");
  if (!covariates.allFinite())
    fail(ErrorCode::invalid_argument, "covariates contain non-finite values");

  const Eigen::Index blocks = (n + kBlockRows - 1) / kBlockRows;
  std::vector<Matrix> partial(static_cast<std::size_t>(blocks));
  parallel_for(static_cast<std::size_t>(blocks), threads, [&](std::size_t b) {
    Matrix& sum = partial[b];
    sum = Matrix::Zero(n, n);
    const auto first = static_cast<Eigen::Index>(b) * kBlockRows;
    accumulate_block(covariates, first, std::min(n, first + kBlockRows), sum);
  });
  // Fixed pairwise reduction tree.
  for (std::size_t stride = 1; stride < partial.size(); stride *= 2)
    for (std::size_t b = 0; b + stride < partial.size(); b += 2 * stride)
      partial[b] += partial[b + stride];

  ProjectionWeightMatrix result;
  result.dimension_d = static_cast<int>(d);
  result.scale_constant = weight_constant(static_cast<int>(d));
  result.values = std::move(partial.front());
  result.values *= result.scale_constant;
  result.values.triangularView<Eigen::StrictlyLower>() =
      result.values.transpose().triangularView<Eigen::StrictlyLower>();
  return result;
}

Vector residual_marks(const QuantileFit& fit) {
  Vector marks(fit.residuals.size());
  for (Eigen::Index i = 0; i < marks.size(); ++i)
    marks(i) = psi(fit.residuals(i), fit.tau);
  return marks;
}

LofStatistic quadratic_form_statistic(const Matrix& gradients, const Vector& marks,
                                      const Matrix& weights) {
  const Eigen::Index n = gradients.rows();
  if (marks.size() != n || weights.rows() != n || weights.cols() != n)
    fail(ErrorCode::invalid_argument, "statistic inputs differ in dimension");
  const Matrix marked = marks.asDiagonal() * gradients;
  Matrix core = marked.transpose() * (weights * marked);
  core /= static_cast<double>(n) * static_cast<double>(n);
  LofStatistic stat;
  stat.core_matrix = 0.5 * (core + core.transpose());
  stat.value = largest_eigenvalue(stat.core_matrix);
  return stat;
}

LofStatistic lof_statistic(const QuantileFit& fit, const Matrix& gradient_covariates,
                           const ProjectionWeightMatrix& weights) {
  const Matrix g = gradients_of(fit, gradient_covariates);
  return quadratic_form_statistic(g, residual_marks(fit), weights.values);
}

Vector projected_process(const QuantileFit& fit, const Matrix& gradient_covariates,
                         const Matrix& projection_covariates,
                         std::span<const double> beta, double u) {
  const Matrix g = gradients_of(fit, gradient_covariates);
  const Eigen::Index n = g.rows();
  if (projection_covariates.rows() != n ||
      projection_covariates.cols() != static_cast<Eigen::Index>(beta.size()))
    fail(ErrorCode::invalid_argument, "projection inputs differ in dimension");
  const Eigen::Map<const Vector> direction(beta.data(),
                                           static_cast<Eigen::Index>(beta.size()));
  if (std::abs(direction.norm() - 1.0) > 1e-12)
    fail(ErrorCode::invalid_argument, "projection direction must be a unit vector");

  Vector process = Vector::Zero(g.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (projection_covariates.row(i).dot(direction) <= u)
      process += psi(fit.residuals(i), fit.tau) * g.row(i).transpose();
  }
  return process / std::sqrt(static_cast<double>(n));
}

double mc_statistic(const QuantileFit& fit, const Matrix& gradient_covariates,
                    const Matrix& projection_covariates, std::size_t num_projections,
                    Stream& rng) {
  if (num_projections < 1)
    fail(ErrorCode::invalid_argument, "num_projections must be >= 1");
  const Matrix g = gradients_of(fit, gradient_covariates);
  const Eigen::Index n = g.rows();
  const Eigen::Index q = g.cols();
  const Eigen::Index d = projection_covariates.cols();
  if (projection_covariates.rows() != n)
    fail(ErrorCode::invalid_argument, "projection covariates differ in length");

  const Matrix marked = residual_marks(fit).asDiagonal() * g;
  Matrix integral = Matrix::Zero(q, q);
  Vector beta(d);
  Vector projections(n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  Matrix process(n, q);  // R(beta, beta'X_k) for every k

  for (std::size_t draw = 0; draw < num_projections; ++draw) {
    do {
      for (Eigen::Index k = 0; k < d; ++k) beta(k) = rng.normal();
    } while (beta.squaredNorm() == 0.0);
    beta.normalize();
    projections = projection_covariates * beta;
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return projections(a) < projections(b);
    });
    // Cumulative sums over sorted projections; ties share the value at the
    // end of their group since the indicator uses <=.
    Vector running = Vector::Zero(q);
    std::size_t start = 0;
    while (start < order.size()) {
      std::size_t stop = start;
      const double level = projections(order[start]);
      while (stop < order.size() && projections(order[stop]) == level) {
        running += marked.row(order[stop]).transpose();
        ++stop;
      }
      for (std::size_t s = start; s < stop; ++s) process.row(order[s]) = running;
      start = stop;
    }
    integral += process.transpose() * process;
  }
  // R carries n^-1/2, the empirical measure n^-1.
  integral *= sphere_area(static_cast<int>(d)) /
              (static_cast<double>(num_projections) * static_cast<double>(n) *
               static_cast<double>(n));
  return largest_eigenvalue(0.5 * (integral + integral.transpose()));
}

}  // namespace qrlof
