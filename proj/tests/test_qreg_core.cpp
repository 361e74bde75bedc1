#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "core/error.hpp"
#include "core/quantile_regression.hpp"
#include "support.hpp"

using namespace qrlof;

namespace {

// Minimum check loss over every exact fit through q of the n observations.
double enumerate_basic_solutions(const Matrix& design, const Vector& y, double tau) {
  const int n = static_cast<int>(design.rows());
  const int q = static_cast<int>(design.cols());
  std::vector<int> pick(q);
  for (int k = 0; k < q; ++k) pick[k] = k;
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    Matrix sub(q, q);
    Vector rhs(q);
    for (int k = 0; k < q; ++k) {
      sub.row(k) = design.row(pick[k]);
      rhs(k) = y(pick[k]);
    }
    Eigen::FullPivLU<Matrix> lu(sub);
    if (lu.isInvertible()) {
      const Vector theta = lu.solve(rhs);
      double loss = 0.0;
      for (int i = 0; i < n; ++i) {
        const double r = y(i) - design.row(i).dot(theta);
        loss += r > 0 ? tau * r : (tau - 1.0) * r;
      }
      best = std::min(best, loss);
    }
    int k = q - 1;
    while (k >= 0 && pick[k] == n - q + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (int j = k + 1; j < q; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

void check_sign_counts(const QuantileFit& fit) {
  const double n = static_cast<double>(fit.residuals.size());
  std::size_t negative = 0, nonpositive = 0;
  for (double r : fit.residuals) {
    negative += r < 0;
    nonpositive += r <= 0;
  }
  CHECK(static_cast<double>(negative) <= n * fit.tau);
  CHECK(n * fit.tau <= static_cast<double>(nonpositive));
}

}  // namespace

TEST_SUITE("qreg_core") {

TEST_CASE("check loss and psi") {
  CHECK(check_loss(2.0, 0.5) == 1.0);
  CHECK(check_loss(-1.0, 0.25) == 0.75);
  CHECK(check_loss(0.0, 0.9) == 0.0);
  CHECK(psi(1.0, 0.5) == 0.5);
  CHECK(psi(-3.0, 0.25) == -0.75);
  CHECK(psi(0.0, 0.75) == 0.0);
  CHECK_THROWS_AS(check_loss(1.0, 0.0), Error);
  CHECK_THROWS_AS(psi(1.0, 1.0), Error);
  CHECK_THROWS_AS(check_loss(1.0, std::nan("")), Error);
}

TEST_CASE("psi is the derivative of the check loss away from zero") {
  const double h = 1e-8;
  for (double tau : {0.1, 0.5, 0.83})
    for (double r : {-2.5, -0.3, 0.01, 1.0, 7.0})
      CHECK(std::abs((check_loss(r + h, tau) - check_loss(r, tau)) / h - psi(r, tau)) < 1e-6);
}

TEST_CASE("model gradient") {
  const std::vector<double> theta{0.0, 0.0, 0.0};
  const Vector g = model_gradient(std::vector<double>{3.0, -1.0}, theta, true);
  REQUIRE(g.size() == 3);
  CHECK(g(0) == 1.0);
  CHECK(g(1) == 3.0);
  CHECK(g(2) == -1.0);
  const Vector zero =
      model_gradient(std::vector<double>{0.0, 0.0, 0.0}, std::vector<double>(4, 0.0), true);
  CHECK(zero.size() == 4);
  CHECK(zero(0) == 1.0);
  CHECK(zero.tail(3).isZero());
  const Vector plain = model_gradient(std::vector<double>{5.0}, std::vector<double>{0.0}, false);
  CHECK(plain.size() == 1);
  CHECK(plain(0) == 5.0);
}

TEST_CASE("intercept-only fit is the sample median") {
  const Matrix design = Matrix::Ones(3, 1);
  Vector y(3);
  y << 1.0, 2.0, 3.0;
  const QuantileFit fit = fit_design(design, y, 0.5, true);
  CHECK(fit.theta(0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(fit.objective == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("square system is interpolated") {
  Matrix design(2, 2);
  design << 1.0, 0.0, 1.0, 1.0;
  Vector y(2);
  y << 0.0, 1.0;
  for (double tau : {0.1, 0.5, 0.9}) {
    const QuantileFit fit = fit_design(design, y, tau, true);
    CHECK(std::abs(fit.theta(0)) < 1e-14);
    CHECK(fit.theta(1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fit.residuals.isZero());
  }
}

TEST_CASE("objective matches exhaustive search over basic solutions") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const DataSample s = testing::random_sample(20, 2, seed);
    const QuantileFit fit = fit_linear_quantile(s, 0.25);
    const double oracle =
        enumerate_basic_solutions(design_matrix(s.covariates, true), s.response, 0.25);
    CHECK(std::abs(fit.objective - oracle) <= 1e-8 * std::max(1.0, oracle));
  }
}

TEST_CASE("fit is optimal, interpolates q points and balances signs") {
  for (double tau : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    for (std::uint64_t seed = 10; seed < 14; ++seed) {
      const DataSample s = testing::random_sample(60, 3, seed);
      const QuantileFit fit = fit_linear_quantile(s, tau);
      check_sign_counts(fit);
      CHECK(fit.basis.size() == 4);
      for (auto i : fit.basis) CHECK(fit.residuals(i) == 0.0);

      const Matrix design = design_matrix(s.covariates, true);
      const Vector recomputed = s.response - design * fit.theta;
      for (Eigen::Index i = 0; i < recomputed.size(); ++i)
        CHECK(std::abs(recomputed(i) - fit.residuals(i)) <= 1e-10 * (1.0 + std::abs(s.response(i))));

      const double delta = 1e-4;
      for (Eigen::Index k = 0; k < fit.theta.size(); ++k) {
        for (double sign : {-1.0, 1.0}) {
          Vector theta = fit.theta;
          theta(k) += sign * delta;
          const double moved = total_check_loss(s.response - design * theta, tau);
          CHECK(moved >= fit.objective - 1e-10);
        }
      }
    }
  }
}

TEST_CASE("scaling the response scales the fit") {
  DataSample s = testing::random_sample(40, 2, 77);
  const QuantileFit base = fit_linear_quantile(s, 0.3);
  const double lambda = 3.7;
  s.response *= lambda;
  const QuantileFit scaled = fit_linear_quantile(s, 0.3);
  CHECK((scaled.theta - lambda * base.theta).norm() < 1e-9 * (1.0 + scaled.theta.norm()));
  CHECK(std::abs(scaled.objective - lambda * base.objective) < 1e-9 * scaled.objective);
}

TEST_CASE("ties and duplicated observations stay deterministic") {
  DataSample s;
  s.covariates.resize(8, 1);
  s.response.resize(8);
  for (int i = 0; i < 8; ++i) {
    s.covariates(i, 0) = i % 2;
    s.response(i) = i % 3;
  }
  const QuantileFit a = fit_linear_quantile(s, 0.5);
  const QuantileFit b = fit_linear_quantile(s, 0.5);
  CHECK(a.theta == b.theta);
  check_sign_counts(a);
  const double oracle =
      enumerate_basic_solutions(design_matrix(s.covariates, true), s.response, 0.5);
  CHECK(a.objective == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("warm start reaches the same optimum") {
  const DataSample s = testing::random_sample(50, 2, 5);
  const Matrix design = design_matrix(s.covariates, true);
  const QuantileFit cold = fit_design(design, s.response, 0.6, true);
  Vector shifted = s.response;
  for (Eigen::Index i = 0; i < shifted.size(); ++i) shifted(i) += 0.1 * std::sin(i);
  const QuantileFit warm = fit_design(design, shifted, 0.6, true, cold.basis);
  const QuantileFit fresh = fit_design(design, shifted, 0.6, true);
  CHECK(warm.objective == doctest::Approx(fresh.objective).epsilon(1e-10));
}

TEST_CASE("fit errors") {
  DataSample s = testing::random_sample(2, 2, 3);
  try {
    fit_linear_quantile(s, 0.5);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::underdetermined);
  }
  s = testing::random_sample(10, 2, 3);
  s.covariates.col(1) = 2.0 * s.covariates.col(0);
  try {
    fit_linear_quantile(s, 0.5);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::singular_design);
  }
  s = testing::random_sample(10, 2, 3);
  s.response(4) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(fit_linear_quantile(s, 0.5), Error);
  CHECK_THROWS_AS(fit_linear_quantile(testing::random_sample(10, 1, 1), 1.5), Error);
}

}
