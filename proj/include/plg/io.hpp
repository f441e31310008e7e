#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "plg/ergodicity.hpp"
#include "plg/gibbs.hpp"
#include "plg/model.hpp"
#include "plg/output_analysis.hpp"
#include "plg/verification.hpp"

namespace plg {

/// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

/// Header row required; a column named "y" first, predictors after it.
Dataset parse_dataset_csv(std::istream& in, const std::string& source = "<stream>");
Dataset ingest_csv(const std::string& path);
void write_dataset_csv(const std::string& path, const Dataset& data);

struct SamplesTable {
  std::vector<std::string> labels;
  Eigen::MatrixXd draws;
};

void write_samples_csv(const std::string& path, const std::vector<std::string>& labels,
                       const Eigen::MatrixXd& draws);
SamplesTable parse_samples_csv(std::istream& in, const std::string& source = "<stream>");
SamplesTable read_samples_csv(const std::string& path);

/// Starting state from a CSV with a header of state labels and one value
/// row; the sigma2 column is optional and ignored by the kernel.
ChainState read_state_csv(const std::string& path, const ModelSpec& spec, Eigen::Index p);

nlohmann::json summary_to_json(const SummaryReport& s);
nlohmann::json multi_chain_to_json(const MultiChainSummary& m, const std::vector<std::string>& labels);
nlohmann::json drift_report_to_json(const DriftReport& r);
nlohmann::json check_to_json(const CheckResult& c);
nlohmann::json suite_to_json(const SuiteReport& r);

/// A number, or null when not finite.
nlohmann::json number_or_null(double v);

}  // namespace plg
