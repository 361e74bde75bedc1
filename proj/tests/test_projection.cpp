#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "core/error.hpp"
#include "core/projection.hpp"
#include "support.hpp"

using namespace qrlof;
using std::numbers::pi;

namespace {

double naive_statistic(const Matrix& g, const Vector& marks, const Matrix& w) {
  const Eigen::Index n = g.rows();
  Matrix core = Matrix::Zero(g.cols(), g.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      core += marks(i) * marks(j) * w(i, j) * g.row(i).transpose() * g.row(j);
  core /= static_cast<double>(n * n);
  core = 0.5 * (core + core.transpose()).eval();
  return Eigen::SelfAdjointEigenSolver<Matrix>(core).eigenvalues().maxCoeff();
}

}  // namespace

TEST_SUITE("projection_lof") {

TEST_CASE("complementary angle examples") {
  using V = std::vector<double>;
  CHECK(complementary_angle(V{1, 0}, V{1, 0}) == doctest::Approx(pi).epsilon(1e-15));
  CHECK(std::abs(complementary_angle(V{1, 0}, V{-1, 0})) < 1e-15);
  CHECK(complementary_angle(V{1, 0}, V{0, 1}) == doctest::Approx(pi / 2).epsilon(1e-15));
  CHECK(complementary_angle(V{0, 0}, V{0, 0}) == 2 * pi);
  CHECK(complementary_angle(V{0, 0}, V{3, 1}) == pi);
  CHECK(complementary_angle(V{2, 2}, V{0, 0}) == pi);
  // nearly collinear vectors must not produce NaN
  CHECK(std::isfinite(complementary_angle(V{1e-300, 1}, V{1e-300, 1})));
  CHECK(std::isfinite(complementary_angle(V{0.1, 0.3}, V{-0.1, -0.3})));
}

TEST_CASE("complementary angle is the measure of the joint half-space") {
  // In R^3 the set {b : b'u <= 0, b'v <= 0} covers (pi - angle) / (2 pi) of the sphere.
  Stream rng(2024, 0);
  using V = std::vector<double>;
  const V u{1.0, 0.2, -0.4};
  const V v{-0.3, 0.8, 0.5};
  const std::size_t draws = 400000;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < draws; ++k) {
    const double b0 = rng.normal(), b1 = rng.normal(), b2 = rng.normal();
    const bool a = b0 * u[0] + b1 * u[1] + b2 * u[2] <= 0;
    const bool c = b0 * v[0] + b1 * v[1] + b2 * v[2] <= 0;
    hits += a && c;
  }
  const double fraction = static_cast<double>(hits) / draws;
  const double expected = complementary_angle(u, v) / (2 * pi);
  const double se = std::sqrt(expected * (1 - expected) / draws);
  CHECK(std::abs(fraction - expected) < 4 * se);
}

TEST_CASE("constants") {
  CHECK(weight_constant(2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(weight_constant(1) == doctest::Approx(1.0 / (std::sqrt(pi) * 0.5 * std::sqrt(pi))).epsilon(1e-14));
  CHECK(weight_constant(3) == doctest::Approx(std::sqrt(pi) / (0.75 * std::sqrt(pi))).epsilon(1e-14));
  CHECK(sphere_area(2) == doctest::Approx(2 * pi).epsilon(1e-15));
  CHECK(sphere_area(3) == doctest::Approx(4 * pi).epsilon(1e-15));
  CHECK(expected_mc_ratio(2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(expected_mc_ratio(3) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("weight matrix small cases") {
  Matrix one(1, 3);
  one << 0.4, -1.0, 2.0;
  const auto w1 = weight_matrix(one);
  CHECK(w1.values(0, 0) == doctest::Approx(2 * pi * weight_constant(3)).epsilon(1e-15));
  CHECK(w1.dimension_d == 3);

  Matrix two(2, 2);
  two << 0.0, 0.0, 1.0, 2.0;
  const auto w2 = weight_matrix(two);
  CHECK(w2.values(0, 0) == doctest::Approx(3 * pi).epsilon(1e-15));
  CHECK(w2.values(1, 1) == doctest::Approx(3 * pi).epsilon(1e-15));
  CHECK(w2.values(0, 1) == doctest::Approx(2 * pi).epsilon(1e-15));
  CHECK(w2.values(1, 0) == w2.values(0, 1));

  Matrix bad = Matrix::Zero(3, 2);
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS(weight_matrix(bad), Error);
}

TEST_CASE("weight matrix invariants") {
  const DataSample s = testing::random_sample(30, 3, 8);
  const auto w = weight_matrix(s.covariates);
  const double bound = 30 * 2 * pi * w.scale_constant;
  for (Eigen::Index i = 0; i < 30; ++i)
    for (Eigen::Index j = 0; j < 30; ++j) {
      CHECK(w.values(i, j) == w.values(j, i));
      CHECK(w.values(i, j) >= 0.0);
      CHECK(w.values(i, j) <= bound);
    }

  SUBCASE("identical across thread counts") {
    for (unsigned threads : {2u, 3u, 8u}) CHECK(weight_matrix(s.covariates, threads).values == w.values);
  }
  SUBCASE("rotation invariance") {
    Eigen::HouseholderQR<Matrix> qr(Matrix::Random(3, 3));
    const Matrix rotation = qr.householderQ();
    const auto rotated = weight_matrix(s.covariates * rotation);
    CHECK((rotated.values - w.values).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("permutation invariance") {
    std::vector<Eigen::Index> order(30);
    std::iota(order.begin(), order.end(), 0);
    std::reverse(order.begin(), order.begin() + 17);
    Matrix permuted(30, 3);
    for (Eigen::Index i = 0; i < 30; ++i) permuted.row(i) = s.covariates.row(order[i]);
    const auto p = weight_matrix(permuted);
    for (Eigen::Index i = 0; i < 30; ++i)
      for (Eigen::Index j = 0; j < 30; ++j)
        CHECK(std::abs(p.values(i, j) - w.values(order[i], order[j])) < 1e-10);
  }
}

TEST_CASE("duplicate covariate rows use the degenerate rules") {
  Matrix x(3, 2);
  x << 0.5, 0.5, 0.5, 0.5, 1.0, 0.0;
  const auto w = weight_matrix(x);
  CHECK(w.values.allFinite());
  CHECK(w.values(0, 1) == w.values(0, 0));
}

TEST_CASE("statistic matches the naive quadratic form") {
  const DataSample s = testing::random_sample(25, 2, 31);
  const QuantileFit fit = fit_linear_quantile(s, 0.4);
  const auto w = weight_matrix(s.covariates);
  const LofStatistic stat = lof_statistic(fit, s.covariates, w);
  const Matrix g = design_matrix(s.covariates, true);
  const double naive = naive_statistic(g, residual_marks(fit), w.values);
  CHECK(stat.value == doctest::Approx(naive).epsilon(1e-12));
  CHECK(stat.value > 0.0);

  const Matrix& core = stat.core_matrix;
  CHECK((core - core.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  const auto eigen = Eigen::SelfAdjointEigenSolver<Matrix>(core).eigenvalues();
  CHECK(eigen.minCoeff() >= -1e-8 * core.trace());
  CHECK(stat.value == doctest::Approx(eigen.maxCoeff()).epsilon(1e-9));
}

TEST_CASE("homogeneity and permutation invariance of the statistic") {
  const DataSample s = testing::random_sample(20, 2, 4);
  const QuantileFit fit = fit_linear_quantile(s, 0.5);
  const Matrix g = design_matrix(s.covariates, true);
  const Vector marks = residual_marks(fit);
  const auto w = weight_matrix(s.covariates);
  const double base = quadratic_form_statistic(g, marks, w.values).value;
  CHECK(quadratic_form_statistic(g, marks, 4.0 * w.values).value == 4.0 * base);
  CHECK(quadratic_form_statistic(g, marks, 0.5 * w.values).value == 0.5 * base);

  std::vector<Eigen::Index> order(20);
  std::iota(order.begin(), order.end(), 0);
  std::rotate(order.begin(), order.begin() + 7, order.end());
  Matrix gp(20, g.cols());
  Vector mp(20);
  Matrix xp(20, 2);
  for (Eigen::Index i = 0; i < 20; ++i) {
    gp.row(i) = g.row(order[i]);
    mp(i) = marks(order[i]);
    xp.row(i) = s.covariates.row(order[i]);
  }
  const double permuted = quadratic_form_statistic(gp, mp, weight_matrix(xp).values).value;
  CHECK(std::abs(permuted - base) <= 1e-10 * std::max(1.0, base));
}

TEST_CASE("interpolating fit gives zero") {
  const DataSample s = testing::random_sample(3, 2, 12);
  const QuantileFit fit = fit_linear_quantile(s, 0.5);
  CHECK(fit.residuals.isZero());
  CHECK(lof_statistic(fit, s.covariates, weight_matrix(s.covariates)).value == 0.0);
  Stream rng(1, 0);
  CHECK(mc_statistic(fit, s.covariates, s.covariates, 100, rng) == 0.0);
}

TEST_CASE("projected process limits") {
  const DataSample s = testing::random_sample(15, 2, 9);
  const QuantileFit fit = fit_linear_quantile(s, 0.5);
  const std::vector<double> beta{0.6, 0.8};
  double lo = 1e300, hi = -1e300;
  for (Eigen::Index i = 0; i < 15; ++i) {
    const double p = 0.6 * s.covariates(i, 0) + 0.8 * s.covariates(i, 1);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  const Matrix g = design_matrix(s.covariates, true);
  const Vector total = g.transpose() * residual_marks(fit) / std::sqrt(15.0);
  const Vector at_top = projected_process(fit, s.covariates, s.covariates, beta, hi);
  CHECK((at_top - total).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(projected_process(fit, s.covariates, s.covariates, beta, lo - 1.0).isZero());
  CHECK_THROWS_AS(projected_process(fit, s.covariates, s.covariates, std::vector<double>{1, 1}, 0.0),
                  Error);
}

TEST_CASE("Monte Carlo sphere integral agrees with the closed form") {
  // d = 2: the two constants coincide, so the ratio tends to one.
  const DataSample s = testing::random_sample(25, 2, 55);
  const QuantileFit fit = fit_linear_quantile(s, 0.5);
  const double closed = lof_statistic(fit, s.covariates, weight_matrix(s.covariates)).value;
  Stream rng(3, 0);
  const double mc = mc_statistic(fit, s.covariates, s.covariates, 50000, rng);
  CHECK(mc / closed == doctest::Approx(expected_mc_ratio(2)).epsilon(0.04));
}

}
