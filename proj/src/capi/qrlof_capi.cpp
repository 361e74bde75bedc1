// extern "C" surface over the C++ core. Exceptions never cross this boundary:
// each entry point maps them to a qrlof_status and records the message.

#include "qrlof/qrlof.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <algorithm>
#include <cstdlib>
#include <limits>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "core/dataset.hpp"
#include "core/error.hpp"
#include "core/projection.hpp"
#include "core/simulation.hpp"

struct qrlof_dataset {
  qrlof::LoadedDataset data;
};

struct qrlof_report {
  qrlof::TestReport report;
};

struct qrlof_table {
  qrlof::RejectionTable table;
  bool power_curve = false;
};

namespace {

thread_local std::string last_error;

qrlof_status to_status(qrlof::ErrorCode code) {
  switch (code) {
    case qrlof::ErrorCode::invalid_argument: return QRLOF_ERR_INVALID_ARGUMENT;
    case qrlof::ErrorCode::domain: return QRLOF_ERR_DOMAIN;
    case qrlof::ErrorCode::singular_design: return QRLOF_ERR_SINGULAR_DESIGN;
    case qrlof::ErrorCode::underdetermined: return QRLOF_ERR_UNDERDETERMINED;
    case qrlof::ErrorCode::parse: return QRLOF_ERR_PARSE;
    case qrlof::ErrorCode::io: return QRLOF_ERR_IO;
    case qrlof::ErrorCode::internal: return QRLOF_ERR_INTERNAL;
  }
  return QRLOF_ERR_INTERNAL;
}

template <class Fn>
qrlof_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return QRLOF_OK;
  } catch (const qrlof::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return QRLOF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return QRLOF_ERR_INTERNAL;
  }
}

void require(bool condition, const char* what) {
  if (!condition) qrlof::fail(qrlof::ErrorCode::invalid_argument, what);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<std::string> split_names(const char* list) {
  std::vector<std::string> names;
  if (!list) return names;
  std::stringstream stream(list);
  std::string token;
  while (std::getline(stream, token, ',')) {
    const auto first = token.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = token.find_last_not_of(" \t");
    names.push_back(token.substr(first, last - first + 1));
  }
  return names;
}

qrlof::StatisticKind to_kind(qrlof_statistic statistic) {
  switch (statistic) {
    case QRLOF_STATISTIC_PROJECTION: return qrlof::StatisticKind::projection;
    case QRLOF_STATISTIC_HZ: return qrlof::StatisticKind::hz;
  }
  qrlof::fail(qrlof::ErrorCode::invalid_argument, "unknown statistic");
}

qrlof::ExperimentConfig to_config(const qrlof_experiment_options& o) {
  qrlof::ExperimentConfig config;
  config.model.model_id = o.model;
  config.model.tau = o.tau;
  config.model.deviation_c = o.deviation_c;
  config.model.extra_dims_t = o.extra_dims_t;
  switch (o.deviation) {
    case QRLOF_DEVIATION_QUADRATIC: config.model.deviation_kind = qrlof::Deviation::quadratic; break;
    case QRLOF_DEVIATION_SINE: config.model.deviation_kind = qrlof::Deviation::sine; break;
    case QRLOF_DEVIATION_EXP: config.model.deviation_kind = qrlof::Deviation::exponential; break;
    case QRLOF_DEVIATION_LOG: config.model.deviation_kind = qrlof::Deviation::logarithm; break;
    default: qrlof::fail(qrlof::ErrorCode::invalid_argument, "unknown deviation");
  }
  switch (o.error_law) {
    case QRLOF_ERROR_DEFAULT: break;
    case QRLOF_ERROR_NORMAL: config.model.error_kind = qrlof::ErrorKind::normal; break;
    case QRLOF_ERROR_LOGNORMAL: config.model.error_kind = qrlof::ErrorKind::lognormal; break;
    case QRLOF_ERROR_EXPONENTIAL: config.model.error_kind = qrlof::ErrorKind::exponential; break;
    case QRLOF_ERROR_CHISQ: config.model.error_kind = qrlof::ErrorKind::chi_squared; break;
    case QRLOF_ERROR_UNIFORM: config.model.error_kind = qrlof::ErrorKind::uniform; break;
    case QRLOF_ERROR_MIXTURE: config.model.error_kind = qrlof::ErrorKind::mixture; break;
    default: qrlof::fail(qrlof::ErrorCode::invalid_argument, "unknown error law");
  }
  if (o.chisq_df > 0.0) config.model.chi_squared_df = o.chisq_df;
  config.n = o.n;
  config.replications = o.replications;
  config.bootstrap = o.bootstrap;
  config.seed = o.seed;
  if (o.alphas && o.alpha_count > 0) config.alphas.assign(o.alphas, o.alphas + o.alpha_count);
  config.tests.clear();
  if (o.run_projection) config.tests.push_back(qrlof::StatisticKind::projection);
  if (o.run_hz) config.tests.push_back(qrlof::StatisticKind::hz);
  config.threads = o.threads;
  return config;
}

std::string number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

const qrlof::RejectionRow* row_at(const qrlof_table* table, size_t row) {
  if (!table || row >= table->table.rows.size()) return nullptr;
  return &table->table.rows[row];
}

}  // namespace

extern "C" {

const char* qrlof_version(void) { return "1.0.0"; }

const char* qrlof_status_string(qrlof_status status) {
  switch (status) {
    case QRLOF_OK: return "ok";
    case QRLOF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case QRLOF_ERR_DOMAIN: return "domain error";
    case QRLOF_ERR_SINGULAR_DESIGN: return "singular design";
    case QRLOF_ERR_UNDERDETERMINED: return "under-determined fit";
    case QRLOF_ERR_PARSE: return "parse error";
    case QRLOF_ERR_IO: return "i/o error";
    case QRLOF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* qrlof_last_error(void) { return last_error.c_str(); }

void qrlof_string_free(char* s) { std::free(s); }

qrlof_status qrlof_dataset_from_csv(const char* path, const char* response,
                                    const char* covariates, char delimiter,
                                    qrlof_dataset** out) {
  return guarded([&] {
    require(path && out, "path and out must not be NULL");
    *out = nullptr;
    qrlof::DatasetFile file;
    file.path = path;
    file.response = response ? response : "";
    file.covariates = split_names(covariates);
    file.delimiter = delimiter ? delimiter : ',';
    auto dataset = std::make_unique<qrlof_dataset>();
    dataset->data = qrlof::load_csv(file);
    *out = dataset.release();
  });
}

qrlof_status qrlof_dataset_from_arrays(const double* covariates, const double* response,
                                       size_t n, size_t d, qrlof_dataset** out) {
  return guarded([&] {
    require(covariates && response && out, "arguments must not be NULL");
    *out = nullptr;
    auto dataset = std::make_unique<qrlof_dataset>();
    auto& sample = dataset->data.sample;
    const auto rows = static_cast<Eigen::Index>(n);
    const auto cols = static_cast<Eigen::Index>(d);
    sample.covariates = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                      Eigen::RowMajor>>(covariates, rows, cols);
    sample.response = Eigen::Map<const Eigen::VectorXd>(response, rows);
    sample.validate();
    dataset->data.response_name = "y";
    for (size_t k = 0; k < d; ++k)
      dataset->data.covariate_names.push_back("x" + std::to_string(k + 1));
    *out = dataset.release();
  });
}

void qrlof_dataset_free(qrlof_dataset* dataset) { delete dataset; }

size_t qrlof_dataset_rows(const qrlof_dataset* dataset) {
  return dataset ? static_cast<size_t>(dataset->data.sample.rows()) : 0;
}

size_t qrlof_dataset_cols(const qrlof_dataset* dataset) {
  return dataset ? static_cast<size_t>(dataset->data.sample.cols()) : 0;
}

const char* qrlof_dataset_column_name(const qrlof_dataset* dataset, size_t index) {
  if (!dataset || index >= dataset->data.covariate_names.size()) return nullptr;
  return dataset->data.covariate_names[index].c_str();
}

qrlof_status qrlof_dataset_resolve_columns(const qrlof_dataset* dataset, const char* list,
                                           size_t* indices, size_t capacity,
                                           size_t* count) {
  return guarded([&] {
    require(dataset && count, "dataset and count must not be NULL");
    const auto columns =
        qrlof::resolve_columns(list ? list : "", dataset->data.covariate_names);
    *count = columns.size();
    for (size_t k = 0; k < columns.size() && k < capacity && indices; ++k)
      indices[k] = columns[k];
  });
}

void qrlof_test_options_init(qrlof_test_options* options) {
  if (!options) return;
  *options = qrlof_test_options{};
  options->tau = 0.5;
  options->bootstrap = 500;
  options->seed = 0;
  options->statistic = QRLOF_STATISTIC_PROJECTION;
  options->null_uses_all = 1;
  options->with_intercept = 1;
  options->smoothed_p_value = 0;
  options->threads = 1;
}

qrlof_status qrlof_run_test(const qrlof_dataset* dataset, const qrlof_test_options* options,
                            qrlof_report** out) {
  return guarded([&] {
    require(dataset && options && out, "arguments must not be NULL");
    *out = nullptr;
    const auto d = static_cast<size_t>(dataset->data.sample.cols());
    qrlof::ProblemSpec problem;
    problem.tau = options->tau;
    problem.with_intercept = options->with_intercept != 0;
    if (options->alt_columns && options->alt_count > 0) {
      problem.alternative_columns.assign(options->alt_columns,
                                         options->alt_columns + options->alt_count);
    } else {
      for (size_t k = 0; k < d; ++k) problem.alternative_columns.push_back(k);
    }
    if (options->null_uses_all) {
      for (size_t k = 0; k < d; ++k) problem.null_columns.push_back(k);
    } else if (options->null_columns && options->null_count > 0) {
      problem.null_columns.assign(options->null_columns,
                                  options->null_columns + options->null_count);
    }
    problem.bootstrap.replications = options->bootstrap;
    problem.bootstrap.seed = options->seed;
    problem.bootstrap.statistic_kind = to_kind(options->statistic);
    problem.bootstrap.smoothed_p_value = options->smoothed_p_value != 0;
    problem.bootstrap.threads = options->threads;
    auto report = std::make_unique<qrlof_report>();
    report->report = qrlof::run_problem(dataset->data.sample, problem);
    *out = report.release();
  });
}

void qrlof_report_free(qrlof_report* report) { delete report; }

double qrlof_report_statistic(const qrlof_report* report) {
  return report ? report->report.statistic : std::numeric_limits<double>::quiet_NaN();
}

double qrlof_report_p_value(const qrlof_report* report) {
  return report ? report->report.p_value : std::numeric_limits<double>::quiet_NaN();
}

size_t qrlof_report_bootstrap_count(const qrlof_report* report) {
  return report ? report->report.bootstrap_statistics.size() : 0;
}

size_t qrlof_report_bootstrap_statistics(const qrlof_report* report, double* out,
                                         size_t capacity) {
  if (!report || !out) return 0;
  const auto& values = report->report.bootstrap_statistics;
  const size_t count = std::min(capacity, values.size());
  std::copy_n(values.begin(), count, out);
  return count;
}

qrlof_status qrlof_report_to_json(const qrlof_report* report, char** out) {
  return guarded([&] {
    require(report && out, "arguments must not be NULL");
    *out = copy_string(qrlof::report_to_json(report->report));
  });
}

qrlof_status qrlof_report_to_csv(const qrlof_report* report, char** out) {
  return guarded([&] {
    require(report && out, "arguments must not be NULL");
    const auto& r = report->report;
    std::ostringstream csv;
    csv << "statistic,p_value,tau,B,seed,statistic_kind,n,d_null,d_alt\n"
        << number(r.statistic) << ',' << number(r.p_value) << ',' << number(r.tau) << ','
        << r.replications << ',' << r.seed << ',' << qrlof::to_string(r.statistic_kind)
        << ',' << r.n << ',' << r.d_null << ',' << r.d_alt << '\n';
    *out = copy_string(csv.str());
  });
}

qrlof_status qrlof_report_from_json(const char* json, qrlof_report** out) {
  return guarded([&] {
    require(json && out, "arguments must not be NULL");
    *out = nullptr;
    auto report = std::make_unique<qrlof_report>();
    report->report = qrlof::report_from_json(json);
    *out = report.release();
  });
}

void qrlof_experiment_options_init(qrlof_experiment_options* options) {
  if (!options) return;
  *options = qrlof_experiment_options{};
  options->model = 1;
  options->tau = 0.5;
  options->deviation = QRLOF_DEVIATION_QUADRATIC;
  options->error_law = QRLOF_ERROR_DEFAULT;
  options->n = 100;
  options->replications = 200;
  options->bootstrap = 200;
  options->seed = 1;
  options->run_projection = 1;
  options->run_hz = 1;
  options->threads = 1;
}

qrlof_status qrlof_run_experiment(const qrlof_experiment_options* options,
                                  qrlof_table** out) {
  return guarded([&] {
    require(options && out, "arguments must not be NULL");
    *out = nullptr;
    auto table = std::make_unique<qrlof_table>();
    table->table = qrlof::run_experiment(to_config(*options));
    *out = table.release();
  });
}

qrlof_status qrlof_power_curve(const qrlof_experiment_options* options,
                               const double* c_values, size_t count, qrlof_table** out) {
  return guarded([&] {
    require(options && c_values && out, "arguments must not be NULL");
    *out = nullptr;
    auto table = std::make_unique<qrlof_table>();
    table->table = qrlof::power_curve(to_config(*options),
                                      std::vector<double>(c_values, c_values + count));
    table->power_curve = true;
    *out = table.release();
  });
}

void qrlof_table_free(qrlof_table* table) { delete table; }

size_t qrlof_table_rows(const qrlof_table* table) {
  return table ? table->table.rows.size() : 0;
}

double qrlof_table_proportion(const qrlof_table* table, size_t row) {
  const auto* r = row_at(table, row);
  return r ? r->proportion : std::numeric_limits<double>::quiet_NaN();
}

double qrlof_table_alpha(const qrlof_table* table, size_t row) {
  const auto* r = row_at(table, row);
  return r ? r->alpha : std::numeric_limits<double>::quiet_NaN();
}

qrlof_statistic qrlof_table_test(const qrlof_table* table, size_t row) {
  const auto* r = row_at(table, row);
  return r && r->test == qrlof::StatisticKind::hz ? QRLOF_STATISTIC_HZ
                                                 : QRLOF_STATISTIC_PROJECTION;
}

size_t qrlof_table_rejections(const qrlof_table* table, size_t row) {
  const auto* r = row_at(table, row);
  return r ? r->rejections : 0;
}

qrlof_status qrlof_table_to_csv(const qrlof_table* table, char** out) {
  return guarded([&] {
    require(table && out, "arguments must not be NULL");
    *out = copy_string(table->power_curve ? qrlof::power_curve_csv(table->table)
                                          : qrlof::rejection_table_csv(table->table));
  });
}

qrlof_status qrlof_table_to_json(const qrlof_table* table, char** out) {
  return guarded([&] {
    require(table && out, "arguments must not be NULL");
    std::ostringstream json;
    json << "{\"rows\":[";
    bool first = true;
    for (const auto& row : table->table.rows) {
      if (!first) json << ',';
      first = false;
      json << "{\"model\":" << row.model << ",\"test\":\"" << qrlof::to_string(row.test)
           << "\",\"n\":" << row.n << ",\"tau\":" << number(row.tau)
           << ",\"c\":" << number(row.deviation_c) << ",\"t\":" << row.extra_dims_t
           << ",\"alpha\":" << number(row.alpha) << ",\"rejections\":" << row.rejections
           << ",\"replications\":" << row.replications
           << ",\"proportion\":" << number(row.proportion) << ",\"seed\":" << row.seed
           << '}';
    }
    json << "]}";
    *out = copy_string(json.str());
  });
}

qrlof_status qrlof_oracle(const qrlof_dataset* dataset, double tau, size_t draws,
                          uint64_t seed, qrlof_oracle_result* out) {
  return guarded([&] {
    require(dataset && out, "arguments must not be NULL");
    const auto& sample = dataset->data.sample;
    const qrlof::QuantileFit fit = qrlof::fit_linear_quantile(sample, tau, true);
    const auto weights = qrlof::weight_matrix(sample.covariates);
    const double closed = qrlof::lof_statistic(fit, sample.covariates, weights).value;
    qrlof::Stream rng(seed, 0);
    const double mc =
        qrlof::mc_statistic(fit, sample.covariates, sample.covariates, draws, rng);
    const int d = static_cast<int>(sample.cols());
    out->lof_statistic = closed;
    out->mc_statistic = mc;
    out->ratio = closed > 0.0 ? mc / closed : std::numeric_limits<double>::quiet_NaN();
    out->expected_ratio = qrlof::expected_mc_ratio(d);
    out->draws = draws;
    out->dimension = static_cast<size_t>(d);
  });
}

}  // extern "C"
