#include "plg/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "plg/error.hpp"

namespace plg {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (*b == '+') ++b;
  const auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e && std::isfinite(out);
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table parse_table(std::istream& in, const std::string& source) {
  Table t;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    t.header = split(line);
    break;
  }
  require(!t.header.empty(), ErrorCode::parse_error, source + ": missing header row");
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size())
      fail(ErrorCode::parse_error, source + ": row " + std::to_string(line_no) + " has " +
                                       std::to_string(cells.size()) + " fields, header has " +
                                       std::to_string(t.header.size()));
    std::vector<double> row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (!parse_number(cells[j], row[j]))
        fail(ErrorCode::parse_error,
             source + ": row " + std::to_string(line_no) + ", column \"" + t.header[j] + "\": " +
                 (cells[j].empty() ? std::string("missing value")
                                   : "'" + cells[j] + "' is not a finite number"));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

Dataset parse_dataset_csv(std::istream& in, const std::string& source) {
  const Table t = parse_table(in, source);
  require(t.header[0] == "y", ErrorCode::parse_error,
          source + ": first column must be named \"y\", found \"" + t.header[0] + "\"");
  require(t.header.size() >= 2, ErrorCode::parse_error, source + ": no predictor columns");
  require(!t.rows.empty(), ErrorCode::parse_error, source + ": no data rows");
  const Eigen::Index n = static_cast<Eigen::Index>(t.rows.size());
  const Eigen::Index p = static_cast<Eigen::Index>(t.header.size()) - 1;
  Eigen::VectorXd y(n);
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = t.rows[i][0];
    for (Eigen::Index j = 0; j < p; ++j) X(i, j) = t.rows[i][j + 1];
  }
  return Dataset(std::move(y), std::move(X));
}

Dataset ingest_csv(const std::string& path) {
  auto in = open_in(path);
  return parse_dataset_csv(in, path);
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  auto out = open_out(path);
  out << "y";
  for (Eigen::Index j = 0; j < data.p(); ++j) out << ",x" << (j + 1);
  out << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << format_double(data.y()(i));
    for (Eigen::Index j = 0; j < data.p(); ++j) out << ',' << format_double(data.X()(i, j));
    out << '\n';
  }
  if (!out) fail(ErrorCode::io_error, "write to '" + path + "' failed");
}

void write_samples_csv(const std::string& path, const std::vector<std::string>& labels,
                       const Eigen::MatrixXd& draws) {
  require(static_cast<Eigen::Index>(labels.size()) == draws.cols(), ErrorCode::invalid_parameter,
          "label count must equal the number of columns");
  auto out = open_out(path);
  for (std::size_t j = 0; j < labels.size(); ++j) out << (j ? "," : "") << labels[j];
  out << '\n';
  std::string line;
  for (Eigen::Index i = 0; i < draws.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < draws.cols(); ++j) {
      if (j) line += ',';
      line += format_double(draws(i, j));
    }
    line += '\n';
    out << line;
  }
  if (!out) fail(ErrorCode::io_error, "write to '" + path + "' failed");
}

SamplesTable parse_samples_csv(std::istream& in, const std::string& source) {
  const Table t = parse_table(in, source);
  SamplesTable s;
  s.labels = t.header;
  s.draws.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < t.header.size(); ++j) s.draws(i, j) = t.rows[i][j];
  return s;
}

SamplesTable read_samples_csv(const std::string& path) {
  auto in = open_in(path);
  return parse_samples_csv(in, path);
}

ChainState read_state_csv(const std::string& path, const ModelSpec& spec, Eigen::Index p) {
  const SamplesTable t = read_samples_csv(path);
  require(t.draws.rows() == 1, ErrorCode::parse_error,
          path + ": a starting state needs exactly one value row");
  const auto labels = state_labels(spec, p);
  const bool with_sigma = t.labels.size() == labels.size();
  const std::size_t expect = labels.size() - (with_sigma ? 0 : 1);
  require(t.labels.size() == expect, ErrorCode::state_mismatch,
          path + ": expected " + std::to_string(labels.size() - 1) + " state columns");
  for (std::size_t j = 0; j < expect; ++j)
    require(t.labels[j] == labels[j], ErrorCode::state_mismatch,
            path + ": column " + std::to_string(j + 1) + " is \"" + t.labels[j] + "\", expected \"" +
                labels[j] + "\"");
  return unflatten(spec, p, t.draws.row(0).transpose(), with_sigma);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(number_or_null(m(i, j)));
    rows.push_back(r);
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) {
  json r = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) r.push_back(number_or_null(v(i)));
  return r;
}

}  // namespace

json summary_to_json(const SummaryReport& s) {
  json params = json::array();
  for (const auto& p : s.parameters) {
    params.push_back({{"label", p.label},
                      {"mean", number_or_null(p.mean)},
                      {"sd", number_or_null(p.sd)},
                      {"q025", number_or_null(p.q025)},
                      {"q50", number_or_null(p.q50)},
                      {"q975", number_or_null(p.q975)},
                      {"mcse", p.mcse ? number_or_null(*p.mcse) : json(nullptr)},
                      {"ess", number_or_null(p.ess)},
                      {"degenerate", p.degenerate}});
  }
  return {{"n_draws", s.n},
          {"batch_size", s.batch_size},
          {"parameters", params},
          {"multivariate",
           {{"ess", number_or_null(s.multivariate_ess.value)},
            {"fallback", s.multivariate_ess.fallback},
            {"degenerate", s.multivariate_ess.degenerate},
            {"batch_means_cov", matrix_json(s.batch_cov)}}}};
}

json multi_chain_to_json(const MultiChainSummary& m, const std::vector<std::string>& labels) {
  return {{"labels", labels},
          {"chain_means", matrix_json(m.chain_means)},
          {"between", vector_json(m.between)},
          {"within", vector_json(m.within)},
          {"psrf", vector_json(m.psrf)}};
}

json drift_report_to_json(const DriftReport& r) {
  return {{"schema_version", "1"},
          {"kind", "drift"},
          {"model", to_string(r.model)},
          {"phi", r.rate.phi},
          {"phi_alt", r.rate.phi_alt},
          {"phi_warning", r.rate.warning},
          {"L", r.L},
          {"multiplier", r.multiplier},
          {"d", r.d},
          {"epsilon", r.minor.epsilon},
          {"log_epsilon", number_or_null(r.minor.log_epsilon)},
          {"ridge", r.minor.ridge},
          {"numerator", r.minor.numerator},
          {"denominator", r.minor.denominator},
          {"exponent", r.minor.exponent},
          {"start_value", r.start_value ? number_or_null(*r.start_value) : json(nullptr)},
          {"inputs",
           {{"n", r.n},
            {"p", r.p},
            {"K", r.K},
            {"M", r.M},
            {"alpha", r.hyper.alpha},
            {"xi", r.hyper.xi},
            {"lambda1", r.hyper.lambda1},
            {"lambda2", r.hyper.lambda2},
            {"yty", r.yty}}}};
}

json check_to_json(const CheckResult& c) {
  json stats = json::array();
  for (const auto& s : c.statistics)
    stats.push_back({{"name", s.name}, {"value", number_or_null(s.value)}, {"passed", s.passed}});
  return {{"name", c.name},
          {"threshold", c.threshold},
          {"passed", c.passed},
          {"statistics", stats},
          {"details", c.details}};
}

json suite_to_json(const SuiteReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(check_to_json(c));
  return {{"schema_version", "1"},
          {"kind", "verify"},
          {"suite", r.suite},
          {"mutation", r.mutation},
          {"passed", r.passed()},
          {"checks", checks}};
}

}  // namespace plg
