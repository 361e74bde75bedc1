#pragma once

// Simulation laboratory: data generators for the benchmark regression models
// and a Monte Carlo runner that tabulates rejection proportions.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/bootstrap.hpp"

namespace qrlof {

enum class ErrorKind { normal, lognormal, exponential, chi_squared, uniform, mixture };

std::string_view to_string(ErrorKind kind);
ErrorKind parse_error_kind(std::string_view name);

// tau-quantile of the uncentered law Z. The mixture 0.75 N(0,1) + 0.25 N(5,2^2)
// is inverted by bisection.
double quantile_of_z(ErrorKind kind, double df, double tau);

double draw_z(ErrorKind kind, double df, Stream& rng);

// eps = Z - z_tau, so the tau-quantile of eps is zero.
struct ErrorDistribution {
  ErrorKind kind = ErrorKind::normal;
  double df = 4.0;  // chi-squared only
  double tau = 0.5;

  double draw(Stream& rng) const { return draw_z(kind, df, rng) - quantile_of_z(kind, df, tau); }
};

enum class Deviation { quadratic, sine, exponential, logarithm };

std::string_view to_string(Deviation kind);
Deviation parse_deviation(std::string_view name);

struct ModelSpec {
  int model_id = 1;  // 1..8
  double tau = 0.5;
  double deviation_c = 0.0;               // model 6
  unsigned extra_dims_t = 0;              // model 8
  Deviation deviation_kind = Deviation::quadratic;  // model 7
  std::optional<ErrorKind> error_kind;    // defaults per model
  std::optional<double> chi_squared_df;   // defaults: 4 (model 5), 2 otherwise

  void validate() const;
  ErrorDistribution error() const;
  std::size_t null_dims() const;
  std::size_t alternative_dims() const;
  bool null_is_true() const;
};

struct SimulatedSample {
  TestProblem problem;
  bool null_is_true = true;
};

// Regression function plus error for one observation with covariates x
// (alternative dimension) and error value eps.
double model_response(const ModelSpec& spec, std::span<const double> x, double eps);

SimulatedSample generate_sample(const ModelSpec& spec, std::size_t n, Stream& rng);

struct ExperimentConfig {
  ModelSpec model;
  std::size_t n = 100;
  std::size_t replications = 200;
  std::size_t bootstrap = 200;
  std::uint64_t seed = 1;
  std::vector<double> alphas = {0.10, 0.05, 0.01};
  std::vector<StatisticKind> tests = {StatisticKind::projection, StatisticKind::hz};
  unsigned threads = 1;

  void validate() const;
};

struct RejectionRow {
  int model = 0;
  StatisticKind test = StatisticKind::projection;
  std::size_t n = 0;
  double tau = 0.5;
  double deviation_c = 0.0;
  unsigned extra_dims_t = 0;
  double alpha = 0.05;
  std::size_t rejections = 0;
  std::size_t replications = 0;
  double proportion = 0.0;
  std::uint64_t seed = 0;
};

struct RejectionTable {
  std::vector<RejectionRow> rows;
  // p-values per requested test, in replication order.
  std::vector<std::vector<double>> p_values;

  const RejectionRow& find(StatisticKind test, double alpha) const;
};

// Number of p-values with p <= alpha, per alpha.
std::vector<std::size_t> tally_rejections(const std::vector<double>& p_values,
                                          const std::vector<double>& alphas);

RejectionTable run_experiment(const ExperimentConfig& config);

// Rejection rows for each deviation size c (model 6 style), common seeds.
RejectionTable power_curve(const ExperimentConfig& config,
                           const std::vector<double>& c_values);

std::string rejection_table_csv(const RejectionTable& table);
std::string power_curve_csv(const RejectionTable& table);

}  // namespace qrlof
