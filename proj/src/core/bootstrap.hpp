#pragma once

// Wild bootstrap calibration for the lack-of-fit statistics. Bootstrap errors
// are w_i |r_i| with a two-point multiplier whose tau-quantile is zero.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "core/quantile_regression.hpp"
#include "core/rng.hpp"

namespace qrlof {

enum class StatisticKind { projection, hz };

std::string_view to_string(StatisticKind kind);
StatisticKind parse_statistic_kind(std::string_view name);

struct BootstrapConfig {
  std::size_t replications = 500;  // B
  std::uint64_t seed = 0;
  StatisticKind statistic_kind = StatisticKind::projection;
  // (1 + #{T <= T*}) / (B + 1) instead of the plain proportion.
  bool smoothed_p_value = false;
  unsigned threads = 1;  // 0 = hardware concurrency
};

// Response, null-model covariates (possibly none) and the covariates the
// alternative searches over. Gradients always come from the null fit.
struct TestProblem {
  Vector response;
  Matrix null_covariates;
  Matrix alternative_covariates;
  bool with_intercept = true;

  static TestProblem from_sample(const DataSample& sample, bool with_intercept = true);
  Eigen::Index rows() const { return response.size(); }
  void validate() const;
};

struct TestReport {
  double statistic = 0.0;
  std::vector<double> bootstrap_statistics;
  double p_value = 1.0;
  double tau = 0.5;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  StatisticKind statistic_kind = StatisticKind::projection;
  bool smoothed_p_value = false;
  std::size_t n = 0;
  std::size_t d_null = 0;
  std::size_t d_alt = 0;

  bool operator==(const TestReport&) const = default;
};

// 2(1 - tau) with probability 1 - tau, -2 tau with probability tau.
double draw_multiplier(double tau, Stream& rng);

// fitted_i + w_i |r_i|, multipliers drawn in observation order.
Vector bootstrap_response(const QuantileFit& fit, const Vector& fitted, Stream& rng);

// (1/B) #{b : statistic <= bootstrap[b]}, or the smoothed variant.
double bootstrap_p_value(double statistic, const std::vector<double>& bootstrap,
                         bool smoothed = false);

TestReport run_test(const DataSample& sample, double tau, const BootstrapConfig& config);
TestReport run_test(const TestProblem& problem, double tau, const BootstrapConfig& config);

// Several statistics calibrated on the same bootstrap samples. Each report is
// identical to a single-statistic run_test with the same seed.
std::vector<TestReport> run_tests(const TestProblem& problem, double tau,
                                  const BootstrapConfig& config,
                                  const std::vector<StatisticKind>& kinds);

}  // namespace qrlof
