#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "plg/plg.h"

using nlohmann::json;

namespace {

struct Data {
  std::vector<double> y, X;
  size_t n, p;
};

Data toy(size_t n, size_t p) {
  Data d{std::vector<double>(n), std::vector<double>(n * p), n, p};
  unsigned s = 12345;
  auto next = [&] {
    s = s * 1103515245u + 12345u;
    return ((s >> 8) & 0xFFFF) / 65536.0 - 0.5;
  };
  for (size_t j = 0; j < p; ++j)
    for (size_t i = 0; i < n; ++i) d.X[j * n + i] = next();
  for (size_t i = 0; i < n; ++i) d.y[i] = d.X[i] - d.X[n + i] + 0.3 * next();
  return d;
}

plg_dataset* make(const Data& d) {
  plg_dataset* ds = nullptr;
  REQUIRE(plg_dataset_create(d.y.data(), d.X.data(), d.n, d.p, &ds) == PLG_OK);
  return ds;
}

plg_chain_config chain_cfg(long iters) {
  plg_chain_config c{};
  c.n_iter = iters;
  c.burn_in = 0;
  c.thin = 1;
  c.seed = 9;
  c.init = PLG_INIT_DEFAULT;
  return c;
}

std::vector<double> draws_of(const plg_chain* c, size_t& rows, size_t& cols) {
  REQUIRE(plg_chain_dims(c, &rows, &cols) == PLG_OK);
  std::vector<double> v(rows * cols);
  REQUIRE(plg_chain_draws(c, v.data(), v.size()) == PLG_OK);
  return v;
}

}  // namespace

TEST_CASE("version and status strings") {
  CHECK(std::string(plg_version()) == "1.0.0");
  CHECK(std::string(plg_status_string(PLG_OK)) == "ok");
  CHECK(std::string(plg_status_string(PLG_ERR_PARSE)) == "parse-error");
  CHECK(std::string(plg_status_string(PLG_ERR_DEGENERATE_EPSILON)) == "degenerate-epsilon");
  plg_model_id m;
  CHECK(plg_parse_model("bsgl", &m) == PLG_OK);
  CHECK(m == PLG_MODEL_BSGL);
  CHECK(plg_parse_model("ridge", &m) == PLG_ERR_CONFIG);
  CHECK(std::strlen(plg_last_error()) > 0);
}

TEST_CASE("datasets") {
  const Data d = toy(8, 3);
  plg_dataset* ds = make(d);
  size_t n = 0, p = 0;
  CHECK(plg_dataset_dims(ds, &n, &p) == PLG_OK);
  CHECK(n == 8);
  CHECK(p == 3);
  plg_dataset_free(ds);
  plg_dataset_free(nullptr);

  CHECK(plg_dataset_create(nullptr, d.X.data(), 8, 3, &ds) == PLG_ERR_INVALID_PARAMETER);
  CHECK(plg_dataset_load_csv("/nonexistent/x.csv", &ds) == PLG_ERR_IO);

  const auto path = std::filesystem::temp_directory_path() / "plg_capi_bad.csv";
  {
    std::ofstream out(path);
    out << "y,x1\n1,2\n3,zz\n";
  }
  CHECK(plg_dataset_load_csv(path.string().c_str(), &ds) == PLG_ERR_PARSE);
  CHECK(std::string(plg_last_error()).find("row 3, column \"x1\"") != std::string::npos);
}

TEST_CASE("running chains") {
  const Data d = toy(10, 4);
  plg_dataset* ds = make(d);
  const int groups[] = {2, 2};
  const plg_model_config bgl{PLG_MODEL_BGL, 1.0, 1.0, 1.0, 1.0, groups, 2};
  plg_chain_config cfg = chain_cfg(100);
  cfg.burn_in = 10;
  cfg.thin = 3;
  plg_chain* c = nullptr;
  REQUIRE(plg_run_chain(ds, &bgl, &cfg, 0, &c) == PLG_OK);
  size_t rows, cols;
  draws_of(c, rows, cols);
  CHECK(rows == 30);
  CHECK(cols == 4 + 2 + 1);
  const char* label = nullptr;
  CHECK(plg_chain_label(c, 0, &label) == PLG_OK);
  CHECK(std::string(label) == "beta.1");
  CHECK(plg_chain_label(c, cols - 1, &label) == PLG_OK);
  CHECK(std::string(label) == "sigma2");
  CHECK(plg_chain_label(c, cols, &label) == PLG_ERR_INVALID_PARAMETER);
  plg_chain_free(c);

  const plg_model_config no_groups{PLG_MODEL_BGL, 1.0, 1.0, 1.0, 1.0, nullptr, 0};
  CHECK(plg_run_chain(ds, &no_groups, &cfg, 0, &c) == PLG_ERR_CONFIG);
  const int bad[] = {3, 2};
  const plg_model_config wrong{PLG_MODEL_BSGL, 1.0, 1.0, 1.0, 1.0, bad, 2};
  CHECK(plg_run_chain(ds, &wrong, &cfg, 0, &c) == PLG_ERR_STRUCTURE);
  const plg_model_config neg{PLG_MODEL_BFL, -1.0, 1.0, 1.0, 1.0, nullptr, 0};
  CHECK(plg_run_chain(ds, &neg, &cfg, 0, &c) == PLG_ERR_INVALID_PARAMETER);
  plg_chain_config zero_iter = chain_cfg(0);
  const plg_model_config bfl{PLG_MODEL_BFL, 1.0, 1.0, 1.0, 1.0, nullptr, 0};
  CHECK(plg_run_chain(ds, &bfl, &zero_iter, 0, &c) == PLG_ERR_CONFIG);
  plg_dataset_free(ds);
}

TEST_CASE("chains are deterministic and streams differ") {
  const Data d = toy(10, 4);
  plg_dataset* ds = make(d);
  const plg_model_config bfl{PLG_MODEL_BFL, 1.0, 0.5, 1.0, 1.0, nullptr, 0};
  const plg_chain_config cfg = chain_cfg(200);
  plg_chain* a[3] = {};
  plg_chain* b = nullptr;
  REQUIRE(plg_run_chains(ds, &bfl, &cfg, 3, 2, a) == PLG_OK);
  REQUIRE(plg_run_chain(ds, &bfl, &cfg, 1, &b) == PLG_OK);
  size_t r, c;
  const auto v1 = draws_of(a[1], r, c);
  CHECK(v1 == draws_of(b, r, c));
  CHECK(v1 != draws_of(a[0], r, c));
  for (auto* x : a) plg_chain_free(x);
  plg_chain_free(b);
  plg_dataset_free(ds);
}

TEST_CASE("summary JSON and batch-means MCSE") {
  const Data d = toy(12, 3);
  plg_dataset* ds = make(d);
  const plg_model_config bfl{PLG_MODEL_BFL, 1.0, 1.0, 1.0, 1.0, nullptr, 0};
  plg_chain_config cfg = chain_cfg(2500);
  cfg.fast_np = 1;
  plg_chain* ch[2] = {};
  REQUIRE(plg_run_chains(ds, &bfl, &cfg, 2, 1, ch) == PLG_OK);
  char* out = nullptr;
  const char* sources[] = {"a.csv", "b.csv"};
  REQUIRE(plg_summary_json(ch, 2, sources, "{\"model\":\"bfl\"}", &out) == PLG_OK);
  const json j = json::parse(out);
  plg_string_free(out);
  CHECK(j["kind"] == "summary");
  CHECK(j["config"]["model"] == "bfl");
  CHECK(j["chains"].size() == 2);
  CHECK(j["chains"][1]["source"] == "b.csv");
  CHECK(!j["multi_chain"].is_null());

  size_t rows, cols;
  const auto v = draws_of(ch[0], rows, cols);
  const size_t b = static_cast<size_t>(std::floor(std::sqrt(double(rows))));
  const size_t a = rows / b;
  for (size_t col = 0; col < cols; ++col) {
    std::vector<double> means(a, 0.0);
    for (size_t k = 0; k < a; ++k) {
      for (size_t i = 0; i < b; ++i) means[k] += v[(k * b + i) * cols + col];
      means[k] /= double(b);
    }
    double g = 0.0;
    for (double m : means) g += m;
    g /= double(a);
    double ss = 0.0;
    for (double m : means) ss += (m - g) * (m - g);
    const double mcse = std::sqrt(double(b) * ss / double(a - 1) / double(rows));
    CHECK(j["chains"][0]["parameters"][col]["mcse"].get<double>() == doctest::Approx(mcse).epsilon(1e-9));
  }

  REQUIRE(plg_summary_json(ch, 1, nullptr, nullptr, &out) == PLG_OK);
  const json one = json::parse(out);
  plg_string_free(out);
  CHECK(one["multi_chain"].is_null());
  CHECK(one["config"].is_null());
  CHECK(plg_summary_json(ch, 1, nullptr, "{not json", &out) == PLG_ERR_PARSE);

  const auto path = std::filesystem::temp_directory_path() / "plg_capi_chain.csv";
  REQUIRE(plg_chain_write_csv(ch[0], path.string().c_str()) == PLG_OK);
  plg_chain* back = nullptr;
  REQUIRE(plg_chain_load_csv(path.string().c_str(), &back) == PLG_OK);
  size_t r2, c2;
  CHECK(draws_of(back, r2, c2) == v);
  plg_chain* mixed[2] = {back, nullptr};
  const int groups[] = {3};
  const plg_model_config bgl{PLG_MODEL_BGL, 1.0, 1.0, 1.0, 1.0, groups, 1};
  REQUIRE(plg_run_chain(ds, &bgl, &cfg, 0, &mixed[1]) == PLG_OK);
  CHECK(plg_summary_json(mixed, 2, nullptr, nullptr, &out) == PLG_ERR_STATE_MISMATCH);
  plg_chain_free(back);
  plg_chain_free(mixed[1]);
  for (auto* x : ch) plg_chain_free(x);
  plg_dataset_free(ds);
}

TEST_CASE("drift report JSON") {
  const Data d = toy(10, 5);
  plg_dataset* ds = make(d);
  const plg_model_config bfl{PLG_MODEL_BFL, 1.0, 1.0, 1.0, 1.0, nullptr, 0};
  char* out = nullptr;
  REQUIRE(plg_drift_report_json(ds, &bfl, 1.0, 1, &out) == PLG_OK);
  const json j = json::parse(out);
  plg_string_free(out);
  CHECK(j["phi"] == 0.5);
  CHECK(j["start_value"].is_number());
  CHECK(j["epsilon"].get<double>() > 0.0);
  CHECK(plg_drift_report_json(ds, &bfl, 0.5, 0, &out) == PLG_ERR_INVALID_PARAMETER);
  plg_dataset_free(ds);
}

TEST_CASE("verification through the C API") {
  CHECK(plg_is_known_suite("prior"));
  CHECK(!plg_is_known_suite("bogus"));
  char* out = nullptr;
  int passed = -1;
  REQUIRE(plg_verify_json("prior", 20240601, nullptr, 1, &out, &passed) == PLG_OK);
  const json j = json::parse(out);
  plg_string_free(out);
  CHECK(passed == 1);
  CHECK(j["passed"] == true);
  CHECK(j["checks"].size() == 4);
  CHECK(plg_verify_json("bogus", 1, nullptr, 1, &out, &passed) == PLG_ERR_CONFIG);
  CHECK(plg_verify_json("prior", 1, "not-a-mutation", 1, &out, &passed) == PLG_ERR_CONFIG);
}
