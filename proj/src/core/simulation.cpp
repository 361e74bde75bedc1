#include "core/simulation.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace qrlof {

namespace {

constexpr std::uint64_t kDataTag = 0xDA7A;
constexpr std::uint64_t kBootstrapTag = 0xB007;

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double mixture_cdf(double z) {
  return 0.75 * standard_normal_cdf(z) + 0.25 * standard_normal_cdf((z - 5.0) / 2.0);
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

// Shortest text that reads back to the same double.
std::string format_number(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::normal: return "normal";
    case ErrorKind::lognormal: return "lognormal";
    case ErrorKind::exponential: return "exponential";
    case ErrorKind::chi_squared: return "chisq";
    case ErrorKind::uniform: return "uniform";
    case ErrorKind::mixture: return "mixture";
  }
  return "normal";
}

ErrorKind parse_error_kind(std::string_view name) {
  for (ErrorKind kind : {ErrorKind::normal, ErrorKind::lognormal, ErrorKind::exponential,
                         ErrorKind::chi_squared, ErrorKind::uniform, ErrorKind::mixture})
    if (name == to_string(kind)) return kind;
  fail(ErrorCode::invalid_argument, "unknown error law '" + std::string(name) + "'");
}

std::string_view to_string(Deviation kind) {
  switch (kind) {
    case Deviation::quadratic: return "quadratic";
    case Deviation::sine: return "sine";
    case Deviation::exponential: return "exp";
    case Deviation::logarithm: return "log";
  }
  return "quadratic";
}

Deviation parse_deviation(std::string_view name) {
  for (Deviation kind :
       {Deviation::quadratic, Deviation::sine, Deviation::exponential, Deviation::logarithm})
    if (name == to_string(kind)) return kind;
  fail(ErrorCode::invalid_argument, "unknown deviation '" + std::string(name) + "'");
}

double quantile_of_z(ErrorKind kind, double df, double tau) {
  require_tau(tau);
  switch (kind) {
    case ErrorKind::normal:
      return normal_quantile(tau);
    case ErrorKind::lognormal:
      return std::exp(normal_quantile(tau));
    case ErrorKind::exponential:
      return -std::log1p(-tau);
    case ErrorKind::chi_squared:
      if (!(df > 0.0) || !std::isfinite(df))
        fail(ErrorCode::invalid_argument, "chi-squared degrees of freedom must be positive");
      return boost::math::quantile(boost::math::chi_squared_distribution<double>(df), tau);
    case ErrorKind::uniform:
      return 2.0 * tau - 1.0;
    case ErrorKind::mixture: {
      double lo = -10.0;
      double hi = 20.0;
      while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (mixture_cdf(mid) < tau ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  fail(ErrorCode::invalid_argument, "unknown error law");
}

double draw_z(ErrorKind kind, double df, Stream& rng) {
  switch (kind) {
    case ErrorKind::normal: return rng.normal();
    case ErrorKind::lognormal: return std::exp(rng.normal());
    case ErrorKind::exponential: return rng.exponential();
    case ErrorKind::chi_squared: return rng.chi_squared(df);
    case ErrorKind::uniform: return rng.uniform(-1.0, 1.0);
    case ErrorKind::mixture: {
      const bool second = rng.uniform() < 0.25;
      const double z = rng.normal();
      return second ? 5.0 + 2.0 * z : z;
    }
  }
  return 0.0;
}

void ModelSpec::validate() const {
  if (model_id < 1 || model_id > 8)
    fail(ErrorCode::invalid_argument, "model id must be in 1..8");
  require_tau(tau);
  if (!std::isfinite(deviation_c))
    fail(ErrorCode::invalid_argument, "deviation c must be finite");
  if (deviation_c != 0.0 && model_id != 6)
    fail(ErrorCode::invalid_argument, "deviation c applies to model 6 only");
  if (extra_dims_t != 0 && model_id != 8)
    fail(ErrorCode::invalid_argument, "extra dimensions t apply to model 8 only");
  if (deviation_kind != Deviation::quadratic && model_id != 7)
    fail(ErrorCode::invalid_argument, "deviation kind applies to model 7 only");
  if (chi_squared_df && !(*chi_squared_df > 0.0))
    fail(ErrorCode::invalid_argument, "chi-squared degrees of freedom must be positive");
}

ErrorDistribution ModelSpec::error() const {
  ErrorDistribution law;
  law.tau = tau;
  if (error_kind) {
    law.kind = *error_kind;
  } else {
    law.kind = (model_id >= 6) ? ErrorKind::lognormal : ErrorKind::normal;
  }
  law.df = chi_squared_df.value_or(model_id == 5 ? 4.0 : 2.0);
  return law;
}

std::size_t ModelSpec::null_dims() const {
  switch (model_id) {
    case 2: return 5;
    case 4: return 1;
    case 5: return 0;
    default: return 2;
  }
}

std::size_t ModelSpec::alternative_dims() const {
  switch (model_id) {
    case 2: return 5;
    case 4: return 1;
    case 8: return 2 + extra_dims_t;
    default: return 2;
  }
}

bool ModelSpec::null_is_true() const {
  switch (model_id) {
    case 1: case 2: case 3: case 4: return true;
    case 6: return deviation_c == 0.0;
    default: return false;
  }
}

double model_response(const ModelSpec& spec, std::span<const double> x, double eps) {
  if (x.size() != spec.alternative_dims())
    fail(ErrorCode::invalid_argument, "covariate vector has the wrong dimension");
  switch (spec.model_id) {
    case 1:
      return 1.0 + x[0] + x[1] + eps;
    case 2:
      return 1.0 + x[0] + x[1] + x[2] + x[3] + x[4] + eps;
    case 3:
      return 1.0 + x[0] + x[1] + (x[0] + 0.5) * eps;
    case 4:
      return 1.0 + x[0] + (x[0] + 0.5) * eps;
    case 5:
      return 1.0 + (x[0] - x[1]) / 5.0 + eps;
    case 6:
      return 1.0 + x[0] + x[1] +
             spec.deviation_c * (x[0] * x[0] + x[1] * x[1] + x[0] * x[1]) + eps;
    case 7: {
      const double l = 1.0 + x[0] + x[1];
      double h = 0.0;
      switch (spec.deviation_kind) {
        case Deviation::quadratic:
          h = (x[0] * x[0] + x[1] * x[1] + x[0] * x[1]) / 3.0;
          break;
        case Deviation::sine:
          h = 5.0 * std::sin(0.6 * std::numbers::pi * l);
          break;
        case Deviation::exponential:
          h = 8.0 * std::exp(-0.5 * l);
          break;
        case Deviation::logarithm:
          h = 6.0 * std::log(std::abs(l));
          break;
      }
      return 1.0 + x[0] + x[1] + h + eps;
    }
    case 8:
      return 1.0 + x[0] + x[1] + (x[0] * x[0] + x[0] * x[1] + x[1] * x[1]) / 3.0 + eps;
    default:
      fail(ErrorCode::invalid_argument, "model id must be in 1..8");
  }
}

SimulatedSample generate_sample(const ModelSpec& spec, std::size_t n, Stream& rng) {
  spec.validate();
  const std::size_t d_alt = spec.alternative_dims();
  const std::size_t d_null = spec.null_dims();
  if (n < d_null + 1)
    fail(ErrorCode::invalid_argument, "sample size too small for the null model");

  const ErrorDistribution law = spec.error();
  const double z_tau = quantile_of_z(law.kind, law.df, law.tau);
  const auto rows = static_cast<Eigen::Index>(n);
  Matrix x(rows, static_cast<Eigen::Index>(d_alt));
  Vector y(rows);
  std::vector<double> row(d_alt);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < d_alt; ++k) {
      bool uniform = true;
      switch (spec.model_id) {
        case 5: uniform = false; break;
        case 6: case 7: uniform = (k == 0); break;
        case 8: uniform = (k % 2 == 0); break;  // X_1, X_3, ... uniform
        default: break;
      }
      row[k] = uniform ? rng.uniform() : rng.normal();
      x(i, static_cast<Eigen::Index>(k)) = row[k];
    }
    const double eps = draw_z(law.kind, law.df, rng) - z_tau;
    y(i) = model_response(spec, row, eps);
  }

  SimulatedSample sample;
  sample.problem.response = std::move(y);
  sample.problem.null_covariates = x.leftCols(static_cast<Eigen::Index>(d_null));
  sample.problem.alternative_covariates = std::move(x);
  sample.problem.with_intercept = true;
  sample.null_is_true = spec.null_is_true();
  return sample;
}

void ExperimentConfig::validate() const {
  model.validate();
  if (replications < 1) fail(ErrorCode::invalid_argument, "replications must be >= 1");
  if (bootstrap < 1) fail(ErrorCode::invalid_argument, "bootstrap replications must be >= 1");
  if (tests.empty()) fail(ErrorCode::invalid_argument, "no test selected");
  if (alphas.empty()) fail(ErrorCode::invalid_argument, "no significance level given");
  for (double a : alphas)
    if (!(a > 0.0 && a < 1.0))
      fail(ErrorCode::invalid_argument, "significance levels must lie in (0, 1)");
}

const RejectionRow& RejectionTable::find(StatisticKind test, double alpha) const {
  for (const RejectionRow& row : rows)
    if (row.test == test && row.alpha == alpha) return row;
  fail(ErrorCode::invalid_argument, "no such row in rejection table");
}

std::vector<std::size_t> tally_rejections(const std::vector<double>& p_values,
                                          const std::vector<double>& alphas) {
  std::vector<std::size_t> counts(alphas.size(), 0);
  for (double p : p_values)
    for (std::size_t a = 0; a < alphas.size(); ++a)
      if (p <= alphas[a]) ++counts[a];
  return counts;
}

RejectionTable run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::size_t tests = config.tests.size();
  RejectionTable table;
  table.p_values.assign(tests, std::vector<double>(config.replications));

  parallel_for(config.replications, config.threads, [&](std::size_t r) {
    Stream data_rng(derive_seed(config.seed, kDataTag, r), 0);
    const SimulatedSample sample = generate_sample(config.model, config.n, data_rng);
    BootstrapConfig boot;
    boot.replications = config.bootstrap;
    boot.seed = derive_seed(config.seed, kBootstrapTag, r);
    boot.threads = 1;
    const auto reports = run_tests(sample.problem, config.model.tau, boot, config.tests);
    for (std::size_t k = 0; k < tests; ++k) table.p_values[k][r] = reports[k].p_value;
  });

  for (std::size_t k = 0; k < tests; ++k) {
    const auto counts = tally_rejections(table.p_values[k], config.alphas);
    for (std::size_t a = 0; a < config.alphas.size(); ++a) {
      RejectionRow row;
      row.model = config.model.model_id;
      row.test = config.tests[k];
      row.n = config.n;
      row.tau = config.model.tau;
      row.deviation_c = config.model.deviation_c;
      row.extra_dims_t = config.model.extra_dims_t;
      row.alpha = config.alphas[a];
      row.rejections = counts[a];
      row.replications = config.replications;
      row.proportion =
          static_cast<double>(counts[a]) / static_cast<double>(config.replications);
      row.seed = config.seed;
      table.rows.push_back(row);
    }
  }
  return table;
}

RejectionTable power_curve(const ExperimentConfig& config,
                           const std::vector<double>& c_values) {
  if (c_values.empty()) fail(ErrorCode::invalid_argument, "no deviation sizes given");
  RejectionTable curve;
  for (double c : c_values) {
    ExperimentConfig point = config;
    point.model.deviation_c = c;
    RejectionTable table = run_experiment(point);
    curve.rows.insert(curve.rows.end(), table.rows.begin(), table.rows.end());
    for (auto& p : table.p_values) curve.p_values.push_back(std::move(p));
  }
  return curve;
}

std::string rejection_table_csv(const RejectionTable& table) {
  std::ostringstream out;
  out << "model,test,n,tau,alpha,rejections,replications,proportion,seed\n";
  for (const RejectionRow& row : table.rows) {
    out << row.model << ',' << to_string(row.test) << ',' << row.n << ','
        << format_number(row.tau) << ',' << format_number(row.alpha) << ','
        << row.rejections << ',' << row.replications << ','
        << format_number(row.proportion) << ',' << row.seed << '\n';
  }
  return out.str();
}

std::string power_curve_csv(const RejectionTable& table) {
  std::ostringstream out;
  out << "model,test,n,tau,c,alpha,rejections,replications,proportion,seed\n";
  for (const RejectionRow& row : table.rows) {
    out << row.model << ',' << to_string(row.test) << ',' << row.n << ','
        << format_number(row.tau) << ',' << format_number(row.deviation_c) << ','
        << format_number(row.alpha) << ',' << row.rejections << ','
        << row.replications << ',' << format_number(row.proportion) << ','
        << row.seed << '\n';
  }
  return out.str();
}

}  // namespace qrlof
