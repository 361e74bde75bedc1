#include "core/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace qrlof {

namespace {

using Record = std::vector<std::string>;

// RFC 4180: quoted fields may hold delimiters, doubled quotes and newlines.
std::vector<Record> split_records(const std::string& text, char delimiter,
                                  const std::string& source) {
  std::vector<Record> records;
  Record record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  for (std::size_t pos = 0; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field += '"';
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == delimiter) {
      end_field();
    } else if (c == '\r') {
      continue;
    } else if (c == '\n') {
      end_record();
      ++line;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) {
    std::ostringstream msg;
    msg << source << ": unterminated quoted field at line " << line;
    fail(ErrorCode::parse, msg.str());
  }
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

double parse_cell(const std::string& raw, std::size_t row, const std::string& column,
                  const std::string& source) {
  const std::string cell = trim(raw);
  auto complain = [&](const std::string& why) {
    std::ostringstream msg;
    msg << source << ": row " << row << ", column '" << column << "': " << why;
    fail(ErrorCode::parse, msg.str());
  };
  if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan")
    complain("missing value");
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size()) complain("cannot parse '" + cell + "' as a number");
  if (errno == ERANGE || !std::isfinite(value)) complain("value '" + cell + "' is not finite");
  return value;
}

std::size_t column_index(const Record& header, const std::string& name,
                         const std::string& source) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    fail(ErrorCode::parse, source + ": no column named '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::string format_number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

}  // namespace

LoadedDataset parse_csv(const std::string& text, const DatasetFile& layout,
                        const std::string& source) {
  std::vector<Record> records = split_records(text, layout.delimiter, source);
  if (records.empty()) fail(ErrorCode::parse, source + ": empty file (no header row)");
  Record header = records.front();
  for (auto& name : header) name = trim(name);
  if (records.size() < 2) fail(ErrorCode::parse, source + ": dataset has no rows");

  const std::size_t response_col =
      layout.response.empty() ? 0 : column_index(header, layout.response, source);
  std::vector<std::size_t> covariate_cols;
  if (layout.covariates.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (c != response_col) covariate_cols.push_back(c);
  } else {
    for (const auto& name : layout.covariates)
      covariate_cols.push_back(column_index(header, name, source));
  }
  if (covariate_cols.empty()) fail(ErrorCode::parse, source + ": no covariate columns");

  const auto n = static_cast<Eigen::Index>(records.size() - 1);
  const auto d = static_cast<Eigen::Index>(covariate_cols.size());
  LoadedDataset data;
  data.response_name = header[response_col];
  for (std::size_t c : covariate_cols) data.covariate_names.push_back(header[c]);
  data.sample.covariates.resize(n, d);
  data.sample.response.resize(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    const Record& record = records[static_cast<std::size_t>(i) + 1];
    const auto row = static_cast<std::size_t>(i) + 1;
    if (record.size() != header.size()) {
      std::ostringstream msg;
      msg << source << ": row " << row << " has " << record.size()
          << " fields, header has " << header.size();
      fail(ErrorCode::parse, msg.str());
    }
    data.sample.response(i) =
        parse_cell(record[response_col], row, header[response_col], source);
    for (Eigen::Index k = 0; k < d; ++k) {
      const std::size_t c = covariate_cols[static_cast<std::size_t>(k)];
      data.sample.covariates(i, k) = parse_cell(record[c], row, header[c], source);
    }
  }
  return data;
}

LoadedDataset load_csv(const DatasetFile& file) {
  std::ifstream in(file.path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open '" + file.path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), file, file.path);
}

void ProblemSpec::validate(std::size_t available) const {
  require_tau(tau);
  if (alternative_columns.empty())
    fail(ErrorCode::invalid_argument, "alternative covariate set is empty");
  for (std::size_t c : alternative_columns)
    if (c >= available) fail(ErrorCode::invalid_argument, "covariate index out of range");
  for (std::size_t c : null_columns)
    if (std::find(alternative_columns.begin(), alternative_columns.end(), c) ==
        alternative_columns.end())
      fail(ErrorCode::invalid_argument,
           "null covariate set must be contained in the alternative set");
  if (bootstrap.replications < 1)
    fail(ErrorCode::invalid_argument, "bootstrap replications must be >= 1");
}

std::vector<std::size_t> resolve_columns(const std::string& list,
                                         const std::vector<std::string>& names) {
  std::vector<std::size_t> columns;
  const std::string whole = trim(list);
  if (whole.empty() || whole == "all") {
    for (std::size_t c = 0; c < names.size(); ++c) columns.push_back(c);
    return columns;
  }
  if (whole == "none") return columns;
  std::stringstream stream(whole);
  std::string token;
  while (std::getline(stream, token, ',')) {
    token = trim(token);
    if (token.empty()) continue;
    const auto named = std::find(names.begin(), names.end(), token);
    if (named != names.end()) {
      columns.push_back(static_cast<std::size_t>(named - names.begin()));
      continue;
    }
    char* end = nullptr;
    const long position = std::strtol(token.c_str(), &end, 10);
    if (end != token.c_str() + token.size() || position < 1 ||
        static_cast<std::size_t>(position) > names.size())
      fail(ErrorCode::invalid_argument, "unknown covariate '" + token + "'");
    columns.push_back(static_cast<std::size_t>(position - 1));
  }
  return columns;
}

TestProblem make_problem(const DataSample& sample, const ProblemSpec& problem) {
  sample.validate();
  problem.validate(static_cast<std::size_t>(sample.cols()));
  auto pick = [&](const std::vector<std::size_t>& cols) {
    Matrix m(sample.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k)
      m.col(static_cast<Eigen::Index>(k)) =
          sample.covariates.col(static_cast<Eigen::Index>(cols[k]));
    return m;
  };
  return TestProblem{sample.response, pick(problem.null_columns),
                     pick(problem.alternative_columns), problem.with_intercept};
}

TestReport run_problem(const DataSample& sample, const ProblemSpec& problem) {
  return run_test(make_problem(sample, problem), problem.tau, problem.bootstrap);
}

std::string report_to_json(const TestReport& report) {
  std::ostringstream out;
  out << "{\"statistic\":" << format_number(report.statistic)
      << ",\"p_value\":" << format_number(report.p_value)
      << ",\"tau\":" << format_number(report.tau) << ",\"B\":" << report.replications
      << ",\"seed\":" << report.seed << ",\"statistic_kind\":\""
      << to_string(report.statistic_kind) << "\",\"n\":" << report.n
      << ",\"d_null\":" << report.d_null << ",\"d_alt\":" << report.d_alt
      << ",\"smoothed_p_value\":" << (report.smoothed_p_value ? "true" : "false")
      << ",\"bootstrap_statistics\":[";
  for (std::size_t b = 0; b < report.bootstrap_statistics.size(); ++b) {
    if (b) out << ',';
    out << format_number(report.bootstrap_statistics[b]);
  }
  out << "]}";
  return out.str();
}

TestReport report_from_json(const std::string& json) {
  try {
    const auto doc = nlohmann::json::parse(json);
    TestReport report;
    report.statistic = doc.at("statistic").get<double>();
    report.p_value = doc.at("p_value").get<double>();
    report.tau = doc.at("tau").get<double>();
    report.replications = doc.at("B").get<std::size_t>();
    report.seed = doc.at("seed").get<std::uint64_t>();
    report.statistic_kind = parse_statistic_kind(doc.at("statistic_kind").get<std::string>());
    report.n = doc.at("n").get<std::size_t>();
    report.d_null = doc.at("d_null").get<std::size_t>();
    report.d_alt = doc.at("d_alt").get<std::size_t>();
    report.smoothed_p_value = doc.value("smoothed_p_value", false);
    if (doc.contains("bootstrap_statistics"))
      report.bootstrap_statistics = doc.at("bootstrap_statistics").get<std::vector<double>>();
    return report;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, std::string("invalid report JSON: ") + e.what());
  }
}

}  // namespace qrlof
