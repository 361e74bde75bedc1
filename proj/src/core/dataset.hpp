#pragma once

// CSV ingestion, real-data testing problems and machine-readable reports.

#include <string>
#include <vector>

#include "core/bootstrap.hpp"

namespace qrlof {

struct DatasetFile {
  std::string path;
  std::string response;                 // empty: first column
  std::vector<std::string> covariates;  // empty: every other column
  char delimiter = ',';
};

struct LoadedDataset {
  DataSample sample;
  std::string response_name;
  std::vector<std::string> covariate_names;
};

LoadedDataset load_csv(const DatasetFile& file);

// Same as load_csv on in-memory text; `source` names the input in messages.
LoadedDataset parse_csv(const std::string& text, const DatasetFile& layout,
                        const std::string& source = "<memory>");

// Covariate index sets (0-based, into the dataset's covariates). The null set
// must be contained in the alternative set.
struct ProblemSpec {
  std::vector<std::size_t> null_columns;
  std::vector<std::size_t> alternative_columns;
  double tau = 0.5;
  BootstrapConfig bootstrap;
  bool with_intercept = true;

  void validate(std::size_t available) const;
};

// Comma-separated 1-based positions or column names; "all" or "" selects
// every covariate.
std::vector<std::size_t> resolve_columns(const std::string& list,
                                         const std::vector<std::string>& names);

TestProblem make_problem(const DataSample& sample, const ProblemSpec& problem);

// Null fit on the null columns, projections over the alternative columns.
TestReport run_problem(const DataSample& sample, const ProblemSpec& problem);

std::string report_to_json(const TestReport& report);
TestReport report_from_json(const std::string& json);

}  // namespace qrlof
