#include "core/bootstrap.hpp"

#include <cmath>

#include "core/error.hpp"
#include "core/hz_test.hpp"
#include "core/parallel.hpp"
#include "core/projection.hpp"

namespace qrlof {

std::string_view to_string(StatisticKind kind) {
  return kind == StatisticKind::projection ? "projection" : "hz";
}

StatisticKind parse_statistic_kind(std::string_view name) {
  if (name == "projection") return StatisticKind::projection;
  if (name == "hz") return StatisticKind::hz;
  fail(ErrorCode::invalid_argument,
       "unknown statistic '" + std::string(name) + "' (expected projection or hz)");
}

TestProblem TestProblem::from_sample(const DataSample& sample, bool with_intercept) {
  sample.validate();
  return TestProblem{sample.response, sample.covariates, sample.covariates,
                     with_intercept};
}

void TestProblem::validate() const {
  const Eigen::Index n = response.size();
  if (n < 1) fail(ErrorCode::invalid_argument, "empty response");
  if (null_covariates.rows() != n || alternative_covariates.rows() != n)
    fail(ErrorCode::invalid_argument, "covariate rows and response length differ");
  if (alternative_covariates.cols() < 1)
    fail(ErrorCode::invalid_argument, "alternative needs at least one covariate");
  if (null_covariates.cols() == 0 && !with_intercept)
    fail(ErrorCode::invalid_argument, "null model has no parameters");
  if (!response.allFinite() || !null_covariates.allFinite() ||
      !alternative_covariates.allFinite())
    fail(ErrorCode::invalid_argument, "problem contains non-finite values");
}

double draw_multiplier(double tau, Stream& rng) {
  return rng.uniform() < tau ? -2.0 * tau : 2.0 * (1.0 - tau);
}

Vector bootstrap_response(const QuantileFit& fit, const Vector& fitted, Stream& rng) {
  if (fitted.size() != fit.residuals.size())
    fail(ErrorCode::invalid_argument, "fitted values and residuals differ in length");
  Vector y(fitted.size());
  for (Eigen::Index i = 0; i < y.size(); ++i)
    y(i) = fitted(i) + draw_multiplier(fit.tau, rng) * std::abs(fit.residuals(i));
  return y;
}

double bootstrap_p_value(double statistic, const std::vector<double>& bootstrap,
                         bool smoothed) {
  if (bootstrap.empty())
    fail(ErrorCode::invalid_argument, "no bootstrap statistics");
  std::size_t exceed = 0;
  for (double t : bootstrap)
    if (statistic <= t) ++exceed;
  if (smoothed)
    return static_cast<double>(exceed + 1) / static_cast<double>(bootstrap.size() + 1);
  return static_cast<double>(exceed) / static_cast<double>(bootstrap.size());
}

std::vector<TestReport> run_tests(const TestProblem& problem, double tau,
                                  const BootstrapConfig& config,
                                  const std::vector<StatisticKind>& kinds) {
  require_tau(tau);
  problem.validate();
  if (config.replications < 1)
    fail(ErrorCode::invalid_argument, "bootstrap replications must be >= 1");
  if (kinds.empty()) fail(ErrorCode::invalid_argument, "no statistic requested");

  const Matrix design = design_matrix(problem.null_covariates, problem.with_intercept);
  const QuantileFit fit = fit_design(design, problem.response, tau, problem.with_intercept);

  // Weights depend on the covariates only and are shared by every replicate.
  std::vector<Matrix> weights;
  weights.reserve(kinds.size());
  for (StatisticKind kind : kinds) {
    weights.push_back(kind == StatisticKind::projection
                          ? weight_matrix(problem.alternative_covariates,
                                          config.threads)
                                .values
                          : indicator_weight_matrix(problem.alternative_covariates));
  }

  const auto m = kinds.size();
  const Vector marks = residual_marks(fit);
  std::vector<double> observed(m);
  for (std::size_t k = 0; k < m; ++k)
    observed[k] = quadratic_form_statistic(design, marks, weights[k]).value;

  const Vector fitted = fit.fitted(problem.response);
  const std::size_t B = config.replications;
  std::vector<std::vector<double>> replicated(m, std::vector<double>(B));
  parallel_for(B, config.threads, [&](std::size_t b) {
    Stream rng(config.seed, b);
    const Vector y_star = bootstrap_response(fit, fitted, rng);
    const QuantileFit refit =
        fit_design(design, y_star, tau, problem.with_intercept, fit.basis);
    const Vector star_marks = residual_marks(refit);
    for (std::size_t k = 0; k < m; ++k)
      replicated[k][b] = quadratic_form_statistic(design, star_marks, weights[k]).value;
  });

  std::vector<TestReport> reports(m);
  for (std::size_t k = 0; k < m; ++k) {
    TestReport& report = reports[k];
    report.statistic = observed[k];
    report.bootstrap_statistics = std::move(replicated[k]);
    report.p_value = bootstrap_p_value(report.statistic, report.bootstrap_statistics,
                                       config.smoothed_p_value);
    report.tau = tau;
    report.replications = B;
    report.seed = config.seed;
    report.statistic_kind = kinds[k];
    report.smoothed_p_value = config.smoothed_p_value;
    report.n = static_cast<std::size_t>(problem.rows());
    report.d_null = static_cast<std::size_t>(problem.null_covariates.cols());
    report.d_alt = static_cast<std::size_t>(problem.alternative_covariates.cols());
  }
  return reports;
}

TestReport run_test(const TestProblem& problem, double tau, const BootstrapConfig& config) {
  return run_tests(problem, tau, config, {config.statistic_kind}).front();
}

TestReport run_test(const DataSample& sample, double tau, const BootstrapConfig& config) {
  return run_test(TestProblem::from_sample(sample), tau, config);
}

}  // namespace qrlof
