#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "plg/error.hpp"
#include "plg/io.hpp"

using namespace plg;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "plg_io_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

ErrorCode code_of(const std::function<void()>& f, std::string* msg = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (msg) *msg = e.what();
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::io_error;
}

}  // namespace

TEST_CASE("dataset CSV: small table") {
  std::istringstream in("y,x1,x2\n1,2,3\n4,5,6\n7,8,9\n");
  const Dataset d = parse_dataset_csv(in);
  CHECK(d.n() == 3);
  CHECK(d.p() == 2);
  CHECK(d.y() == Eigen::Vector3d(1, 4, 7));
  CHECK(d.X()(2, 1) == 9.0);
}

TEST_CASE("dataset CSV: whitespace, blank lines, BOM and CRLF") {
  std::istringstream in("\xEF\xBB\xBFy , x1\r\n\r\n 1.5 , -2e-3\r\n+3,4\r\n");
  const Dataset d = parse_dataset_csv(in);
  CHECK(d.n() == 2);
  CHECK(d.X()(0, 0) == -2e-3);
  CHECK(d.y()(1) == 3.0);
}

TEST_CASE("dataset CSV: errors name the row and column") {
  std::string msg;
  std::istringstream bad("y,x1\nabc,1\n");
  CHECK(code_of([&] { parse_dataset_csv(bad, "d.csv"); }, &msg) == ErrorCode::parse_error);
  CHECK(msg.find("row 2") != std::string::npos);
  CHECK(msg.find("column \"y\"") != std::string::npos);

  std::istringstream bad2("y,x1\n1,2\n3,oops\n");
  CHECK(code_of([&] { parse_dataset_csv(bad2); }, &msg) == ErrorCode::parse_error);
  CHECK(msg.find("row 3, column \"x1\"") != std::string::npos);

  std::istringstream missing("y,x1\n1,\n");
  CHECK(code_of([&] { parse_dataset_csv(missing); }, &msg) == ErrorCode::parse_error);
  CHECK(msg.find("missing value") != std::string::npos);

  std::istringstream nonfinite("y,x1\n1,nan\n");
  CHECK(code_of([&] { parse_dataset_csv(nonfinite); }) == ErrorCode::parse_error);

  std::istringstream ragged("y,x1\n1,2,3\n");
  CHECK(code_of([&] { parse_dataset_csv(ragged); }) == ErrorCode::parse_error);

  std::istringstream order("x1,y\n1,2\n");
  CHECK(code_of([&] { parse_dataset_csv(order); }, &msg) == ErrorCode::parse_error);
  CHECK(msg.find("\"y\"") != std::string::npos);

  std::istringstream empty("");
  CHECK(code_of([&] { parse_dataset_csv(empty); }) == ErrorCode::parse_error);
  std::istringstream header_only("y,x1\n");
  CHECK(code_of([&] { parse_dataset_csv(header_only); }) == ErrorCode::parse_error);

  CHECK(code_of([] { ingest_csv("/nonexistent/plg/data.csv"); }) == ErrorCode::io_error);
}

TEST_CASE("dataset CSV round trip is exact") {
  const Dataset d = synthetic_dataset(7, 3, 5);
  const auto path = scratch("round.csv");
  write_dataset_csv(path.string(), d);
  const Dataset e = ingest_csv(path.string());
  CHECK(e.y() == d.y());
  CHECK(e.X() == d.X());
}

TEST_CASE("samples CSV round trip") {
  Eigen::MatrixXd m(3, 2);
  m << 0.1, 1e-300, -2.5, 1.0 / 3.0, 7e10, -0.0;
  const auto path = scratch("samples.csv");
  write_samples_csv(path.string(), {"a", "b"}, m);
  const SamplesTable t = read_samples_csv(path.string());
  CHECK(t.labels == std::vector<std::string>{"a", "b"});
  CHECK(t.draws == m);
  CHECK_THROWS_AS(write_samples_csv(path.string(), {"a"}, m), Error);
}

TEST_CASE("starting state CSV") {
  ModelSpec spec;
  spec.id = ModelId::bgl;
  spec.groups = GroupStructure({1, 2});
  const auto path = scratch("state.csv");
  const auto labels = state_labels(spec, 3);
  REQUIRE(labels.size() == 6);
  {
    std::ofstream out(path);
    for (std::size_t j = 0; j + 1 < labels.size(); ++j) out << (j ? "," : "") << labels[j];
    out << "\n0.5,-1,2,3,4\n";
  }
  const auto s = std::get<GroupState>(read_state_csv(path.string(), spec, 3));
  CHECK(s.beta == Eigen::Vector3d(0.5, -1, 2));
  CHECK(s.tau2 == Eigen::Vector2d(3, 4));
  CHECK(!s.sigma2.has_value());
  {
    std::ofstream out(path);
    for (std::size_t j = 0; j < labels.size(); ++j) out << (j ? "," : "") << labels[j];
    out << "\n0.5,-1,2,3,4,1.5\n";
  }
  CHECK(*std::get<GroupState>(read_state_csv(path.string(), spec, 3)).sigma2 == 1.5);
  {
    std::ofstream out(path);
    out << "a,b\n1,2\n";
  }
  CHECK(code_of([&] { read_state_csv(path.string(), spec, 3); }) == ErrorCode::state_mismatch);
  {
    std::ofstream out(path);
    for (std::size_t j = 0; j + 1 < labels.size(); ++j) out << (j ? "," : "") << labels[j];
    out << "\n0.5,-1,2,3,4\n0.5,-1,2,3,4\n";
  }
  CHECK(code_of([&] { read_state_csv(path.string(), spec, 3); }) == ErrorCode::parse_error);
}

TEST_CASE("shortest round-trip formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  for (double v : {1.0 / 3.0, 2.0 / 7.0, 1e300, 5e-324}) CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
}

TEST_CASE("JSON writers") {
  CHECK(number_or_null(INFINITY).is_null());
  CHECK(number_or_null(NAN).is_null());
  CHECK(number_or_null(2.0) == 2.0);

  CheckResult c;
  c.name = "x";
  c.statistics.push_back({"z", NAN, false});
  c.settle();
  const auto j = check_to_json(c);
  CHECK(j["statistics"][0]["value"].is_null());
  CHECK(j["passed"] == false);

  SuiteReport r;
  r.suite = "prior";
  r.mutation = "none";
  r.checks.push_back(c);
  const auto s = suite_to_json(r);
  CHECK(s["kind"] == "verify");
  CHECK(s["passed"] == false);

  const auto sum = summary_to_json(summarize(Eigen::MatrixXd::Constant(2, 1, 1.0), {"a"}));
  CHECK(sum["parameters"][0]["mcse"].is_null());
  CHECK(sum["n_draws"] == 2);
}
