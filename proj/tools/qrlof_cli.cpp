// qrlof command-line tool. Talks to the library only through the C API.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "qrlof/qrlof.h"

namespace {

struct Failure {
  std::string message;
};

void check(qrlof_status status, const char* what) {
  if (status == QRLOF_OK) return;
  std::string message = std::string(what) + ": " + qrlof_status_string(status);
  const std::string detail = qrlof_last_error();
  if (!detail.empty()) message += ": " + detail;
  throw Failure{message};
}

struct DatasetDeleter {
  void operator()(qrlof_dataset* d) const { qrlof_dataset_free(d); }
};
struct ReportDeleter {
  void operator()(qrlof_report* r) const { qrlof_report_free(r); }
};
struct TableDeleter {
  void operator()(qrlof_table* t) const { qrlof_table_free(t); }
};
using DatasetPtr = std::unique_ptr<qrlof_dataset, DatasetDeleter>;
using ReportPtr = std::unique_ptr<qrlof_report, ReportDeleter>;
using TablePtr = std::unique_ptr<qrlof_table, TableDeleter>;

void emit(char* text) {
  std::fputs(text, stdout);
  const std::size_t len = std::char_traits<char>::length(text);
  if (len == 0 || text[len - 1] != '\n') std::fputc('\n', stdout);
  qrlof_string_free(text);
}

struct DataOptions {
  std::string path;
  std::string response;
  std::string covariates;
  char delimiter = ',';
};

void add_data_options(CLI::App* cmd, DataOptions& data) {
  cmd->add_option("--data", data.path, "CSV file with a header row")->required();
  cmd->add_option("--response", data.response, "response column (default: first column)");
  cmd->add_option("--covariates", data.covariates,
                  "comma-separated covariate columns (default: all others)");
  cmd->add_option("--delimiter", data.delimiter, "field delimiter");
}

DatasetPtr load(const DataOptions& data) {
  qrlof_dataset* raw = nullptr;
  check(qrlof_dataset_from_csv(data.path.c_str(), data.response.c_str(),
                               data.covariates.c_str(), data.delimiter, &raw),
        "loading data");
  return DatasetPtr(raw);
}

std::vector<size_t> resolve(const qrlof_dataset* dataset, const std::string& list) {
  size_t count = 0;
  check(qrlof_dataset_resolve_columns(dataset, list.c_str(), nullptr, 0, &count),
        "resolving columns");
  std::vector<size_t> columns(count);
  check(qrlof_dataset_resolve_columns(dataset, list.c_str(), columns.data(), count, &count),
        "resolving columns");
  return columns;
}

qrlof_statistic parse_statistic(const std::string& name) {
  if (name == "projection") return QRLOF_STATISTIC_PROJECTION;
  if (name == "hz") return QRLOF_STATISTIC_HZ;
  throw Failure{"unknown statistic '" + name + "'"};
}

qrlof_error_law parse_error_law(const std::string& name) {
  if (name.empty() || name == "default") return QRLOF_ERROR_DEFAULT;
  if (name == "normal") return QRLOF_ERROR_NORMAL;
  if (name == "lognormal") return QRLOF_ERROR_LOGNORMAL;
  if (name == "exponential") return QRLOF_ERROR_EXPONENTIAL;
  if (name == "chisq") return QRLOF_ERROR_CHISQ;
  if (name == "uniform") return QRLOF_ERROR_UNIFORM;
  if (name == "mixture") return QRLOF_ERROR_MIXTURE;
  throw Failure{"unknown error law '" + name + "'"};
}

qrlof_deviation parse_deviation(const std::string& name) {
  if (name == "quadratic") return QRLOF_DEVIATION_QUADRATIC;
  if (name == "sine") return QRLOF_DEVIATION_SINE;
  if (name == "exp") return QRLOF_DEVIATION_EXP;
  if (name == "log") return QRLOF_DEVIATION_LOG;
  throw Failure{"unknown deviation '" + name + "'"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lack-of-fit tests for linear quantile regression"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qrlof_version()));

  // test
  DataOptions test_data;
  double tau = 0.5;
  size_t bootstrap = 500;
  uint64_t seed = 0;
  std::string statistic = "projection";
  std::string null_cols = "all";
  std::string alt_cols = "all";
  std::string out_format = "json";
  unsigned threads = 1;
  bool smoothed = false;
  bool no_intercept = false;
  auto* test = app.add_subcommand("test", "run a lack-of-fit test on a CSV dataset");
  add_data_options(test, test_data);
  test->add_option("--tau", tau, "quantile level")->capture_default_str();
  test->add_option("--bootstrap,-B", bootstrap, "bootstrap replications")->capture_default_str();
  test->add_option("--seed", seed, "random seed")->capture_default_str();
  test->add_option("--statistic", statistic, "projection or hz")
      ->check(CLI::IsMember({"projection", "hz"}))
      ->capture_default_str();
  test->add_option("--null-cols", null_cols,
                   "null-model covariates: positions, names, all or none")
      ->capture_default_str();
  test->add_option("--alt-cols", alt_cols, "alternative covariates")->capture_default_str();
  test->add_option("--out", out_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  test->add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();
  test->add_flag("--smoothed-p", smoothed, "report (1 + #) / (B + 1)");
  test->add_flag("--no-intercept", no_intercept, "fit without an intercept column");

  // simulate
  qrlof_experiment_options sim;
  qrlof_experiment_options_init(&sim);
  std::string error_law;
  std::string deviation = "quadratic";
  std::vector<double> alphas;
  std::vector<double> c_grid;
  std::string tests = "projection,hz";
  std::string sim_out = "csv";
  bool full_scale = false;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo rejection rates for a model");
  simulate->add_option("--model", sim.model, "model 1..8")->capture_default_str();
  simulate->add_option("--tau", sim.tau, "quantile level")->capture_default_str();
  simulate->add_option("--n", sim.n, "sample size")->capture_default_str();
  simulate->add_option("--reps", sim.replications, "Monte Carlo replications")
      ->capture_default_str();
  simulate->add_option("--bootstrap,-B", sim.bootstrap, "bootstrap replications")
      ->capture_default_str();
  simulate->add_option("--seed", sim.seed, "random seed")->capture_default_str();
  simulate->add_option("--c", sim.deviation_c, "deviation size (model 6)");
  simulate->add_option("--c-grid", c_grid, "power curve over these c values (model 6)")
      ->delimiter(',');
  simulate->add_option("--t", sim.extra_dims_t, "extra covariates (model 8)");
  simulate->add_option("--deviation", deviation, "quadratic, sine, exp or log (model 7)");
  simulate->add_option("--error", error_law,
                       "normal, lognormal, exponential, chisq, uniform or mixture");
  simulate->add_option("--df", sim.chisq_df, "chi-squared degrees of freedom");
  simulate->add_option("--alphas", alphas, "nominal levels")->delimiter(',');
  simulate->add_option("--tests", tests, "comma-separated: projection, hz")
      ->capture_default_str();
  simulate->add_option("--out", sim_out, "csv or json")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  simulate->add_option("--threads", sim.threads, "worker threads (0 = all cores)");
  simulate->add_flag("--full-scale", full_scale, "1000 replications, B = 500");

  // oracle
  DataOptions oracle_data;
  double oracle_tau = 0.5;
  size_t draws = 200000;
  uint64_t oracle_seed = 0;
  auto* oracle = app.add_subcommand(
      "oracle", "compare the closed-form statistic with a Monte Carlo sphere integral");
  add_data_options(oracle, oracle_data);
  oracle->add_option("--tau", oracle_tau, "quantile level")->capture_default_str();
  oracle->add_option("--draws", draws, "random directions")->capture_default_str();
  oracle->add_option("--seed", oracle_seed, "random seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*test) {
      DatasetPtr dataset = load(test_data);
      const auto alt = resolve(dataset.get(), alt_cols);
      const auto null = resolve(dataset.get(), null_cols);
      qrlof_test_options options;
      qrlof_test_options_init(&options);
      options.tau = tau;
      options.bootstrap = bootstrap;
      options.seed = seed;
      options.statistic = parse_statistic(statistic);
      options.null_uses_all = 0;
      options.null_columns = null.data();
      options.null_count = null.size();
      options.alt_columns = alt.data();
      options.alt_count = alt.size();
      options.with_intercept = no_intercept ? 0 : 1;
      options.smoothed_p_value = smoothed ? 1 : 0;
      options.threads = threads;
      qrlof_report* raw = nullptr;
      check(qrlof_run_test(dataset.get(), &options, &raw), "running test");
      ReportPtr report(raw);
      char* text = nullptr;
      if (out_format == "csv")
        check(qrlof_report_to_csv(report.get(), &text), "formatting report");
      else
        check(qrlof_report_to_json(report.get(), &text), "formatting report");
      emit(text);
    } else if (*simulate) {
      if (full_scale) {
        sim.replications = 1000;
        sim.bootstrap = 500;
      }
      sim.error_law = parse_error_law(error_law);
      sim.deviation = parse_deviation(deviation);
      sim.alphas = alphas.empty() ? nullptr : alphas.data();
      sim.alpha_count = alphas.size();
      sim.run_projection = 0;
      sim.run_hz = 0;
      std::string list = tests + ",";
      for (size_t start = 0, end; (end = list.find(',', start)) != std::string::npos;
           start = end + 1) {
        const std::string name = list.substr(start, end - start);
        if (name.empty()) continue;
        if (parse_statistic(name) == QRLOF_STATISTIC_HZ)
          sim.run_hz = 1;
        else
          sim.run_projection = 1;
      }
      qrlof_table* raw = nullptr;
      if (c_grid.empty())
        check(qrlof_run_experiment(&sim, &raw), "running experiment");
      else
        check(qrlof_power_curve(&sim, c_grid.data(), c_grid.size(), &raw),
              "running power curve");
      TablePtr table(raw);
      char* text = nullptr;
      if (sim_out == "json")
        check(qrlof_table_to_json(table.get(), &text), "formatting table");
      else
        check(qrlof_table_to_csv(table.get(), &text), "formatting table");
      emit(text);
    } else if (*oracle) {
      DatasetPtr dataset = load(oracle_data);
      qrlof_oracle_result result;
      check(qrlof_oracle(dataset.get(), oracle_tau, draws, oracle_seed, &result),
            "running oracle");
      std::printf(
          "{\"lof_statistic\":%.17g,\"mc_statistic\":%.17g,\"ratio\":%.17g,"
          "\"expected_ratio\":%.17g,\"draws\":%zu,\"dimension\":%zu}\n",
          result.lof_statistic, result.mc_statistic, result.ratio, result.expected_ratio,
          result.draws, result.dimension);
    }
  } catch (const Failure& failure) {
    std::fprintf(stderr, "qrlof: %s\n", failure.message.c_str());
    return 1;
  }
  return 0;
}
