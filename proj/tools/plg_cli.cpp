// plg: fit, diagnose and verify penalized-regression Gibbs samplers.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "plg/plg.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct RuntimeFailure {
  std::string message;
};

void check(plg_status s, const std::string& context) {
  if (s != PLG_OK)
    throw RuntimeFailure{context + ": " + plg_status_string(s) + ": " + plg_last_error()};
}

std::string take(char* s) {
  std::string out(s);
  plg_string_free(s);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw RuntimeFailure{"cannot open " + path.string() + " for writing"};
  f << text << '\n';
  if (!f) throw RuntimeFailure{"write failed for " + path.string()};
}

int thread_cap(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("PLG_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0 && cap < n) n = static_cast<int>(cap);
  }
  return n;
}

std::vector<int> parse_groups(const std::string& text) {
  std::vector<int> sizes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--groups", "not an integer: '" + item + "'");
    }
    if (used != item.size() || v <= 0)
      throw CLI::ValidationError("--groups", "group sizes must be positive integers");
    sizes.push_back(v);
  }
  if (sizes.empty()) throw CLI::ValidationError("--groups", "empty group list");
  return sizes;
}

struct ChainSet {
  std::vector<plg_chain*> chains;
  ~ChainSet() {
    for (auto* c : chains) plg_chain_free(c);
  }
};

struct DatasetHandle {
  plg_dataset* ds = nullptr;
  ~DatasetHandle() { plg_dataset_free(ds); }
};

struct FitArgs {
  std::string model;
  std::string data;
  std::string groups;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double alpha = 1.0;
  double xi = 1.0;
  long iters = 10000;
  std::optional<long> burnin;
  long thin = 1;
  std::uint64_t seed = 1;
  int chains = 1;
  std::string init = "default";
  std::string out = ".";
  bool fast_np = false;
};

int cmd_fit(const FitArgs& a) {
  plg_model_config mc{};
  if (plg_parse_model(a.model.c_str(), &mc.model) != PLG_OK)
    throw CLI::ValidationError("--model", plg_last_error());
  std::vector<int> sizes;
  if (mc.model == PLG_MODEL_BFL) {
    if (!a.groups.empty()) throw CLI::ValidationError("--groups", "only valid for bgl and bsgl");
  } else {
    if (a.groups.empty()) throw CLI::ValidationError("--groups", "required for bgl and bsgl");
    sizes = parse_groups(a.groups);
  }
  mc.lambda1 = a.lambda1;
  mc.lambda2 = a.lambda2;
  mc.alpha = a.alpha;
  mc.xi = a.xi;
  mc.group_sizes = sizes.empty() ? nullptr : sizes.data();
  mc.num_groups = sizes.size();

  plg_chain_config cc{};
  cc.n_iter = a.iters;
  cc.burn_in = a.burnin ? *a.burnin : a.iters / 10;
  cc.thin = a.thin;
  cc.seed = a.seed;
  cc.fast_np = a.fast_np ? 1 : 0;
  std::string init_path;
  if (a.init == "default") {
    cc.init = PLG_INIT_DEFAULT;
  } else if (a.init == "zero") {
    cc.init = PLG_INIT_ZERO;
  } else if (a.init.rfind("file:", 0) == 0 && a.init.size() > 5) {
    cc.init = PLG_INIT_FILE;
    init_path = a.init.substr(5);
    cc.init_path = init_path.c_str();
  } else {
    throw CLI::ValidationError("--init", "expected default, zero or file:<path>");
  }

  DatasetHandle data;
  check(plg_dataset_load_csv(a.data.c_str(), &data.ds), "reading " + a.data);

  const fs::path out_dir(a.out);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw RuntimeFailure{"cannot create " + out_dir.string() + ": " + ec.message()};

  ChainSet set;
  set.chains.assign(static_cast<std::size_t>(a.chains), nullptr);
  check(plg_run_chains(data.ds, &mc, &cc, a.chains, thread_cap(a.chains), set.chains.data()),
        "sampling");

  std::vector<std::string> names;
  for (int i = 0; i < a.chains; ++i) {
    names.push_back("samples_" + std::to_string(i) + ".csv");
    check(plg_chain_write_csv(set.chains[i], (out_dir / names.back()).string().c_str()),
          "writing " + names.back());
  }

  json config = {{"model", a.model},
                 {"data", a.data},
                 {"groups", sizes},
                 {"lambda1", a.lambda1},
                 {"lambda2", a.lambda2},
                 {"alpha", a.alpha},
                 {"xi", a.xi},
                 {"iters", cc.n_iter},
                 {"burnin", cc.burn_in},
                 {"thin", cc.thin},
                 {"seed", cc.seed},
                 {"chains", a.chains},
                 {"init", a.init},
                 {"fast_np", a.fast_np}};
  std::vector<const char*> sources;
  for (const auto& n : names) sources.push_back(n.c_str());
  char* summary = nullptr;
  check(plg_summary_json(set.chains.data(), set.chains.size(), sources.data(),
                         config.dump().c_str(), &summary),
        "summarizing");
  write_text(out_dir / "summary.json", take(summary));

  char* drift = nullptr;
  check(plg_drift_report_json(data.ds, &mc, 1.0, 1, &drift), "drift report");
  write_text(out_dir / "drift.json", take(drift));

  std::cout << "wrote " << a.chains << " chain(s) to " << out_dir.string() << '\n';
  return kExitOk;
}

int cmd_diagnose(const std::vector<std::string>& paths, const std::string& out) {
  ChainSet set;
  for (const auto& p : paths) {
    plg_chain* c = nullptr;
    check(plg_chain_load_csv(p.c_str(), &c), "reading " + p);
    set.chains.push_back(c);
  }
  std::vector<const char*> sources;
  for (const auto& p : paths) sources.push_back(p.c_str());
  char* summary = nullptr;
  check(plg_summary_json(set.chains.data(), set.chains.size(), sources.data(), nullptr, &summary),
        "summarizing");
  const std::string text = take(summary);
  if (out == "-") {
    std::cout << text << '\n';
  } else {
    const fs::path target(out);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    write_text(target, text);
  }
  return kExitOk;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& mutation,
               int threads, const std::string& out) {
  if (!plg_is_known_suite(suite.c_str()))
    throw CLI::ValidationError("--suite", "unknown suite '" + suite + "'");
  char* report = nullptr;
  int passed = 0;
  check(plg_verify_json(suite.c_str(), seed, mutation.empty() ? nullptr : mutation.c_str(),
                        thread_cap(threads), &report, &passed),
        "verify");
  const std::string text = take(report);
  const fs::path target(out);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  write_text(target, text);

  const json doc = json::parse(text);
  for (const auto& c : doc["checks"])
    std::cout << (c["passed"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>()
              << '\n';
  std::cout << (passed ? "all checks passed" : "some checks failed") << '\n';
  return passed ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gibbs samplers for the Bayesian fused, group and sparse group lasso"};
  app.set_version_flag("--version", std::string(plg_version()));
  app.require_subcommand(1);

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "run one or more chains and write samples and reports");
  f->add_option("--model", fit.model, "bfl, bgl or bsgl")->required();
  f->add_option("--data", fit.data, "CSV with a y column then predictors")->required();
  f->add_option("--groups", fit.groups, "comma-separated group sizes, e.g. 2,3,1");
  f->add_option("--lambda1", fit.lambda1)->capture_default_str();
  f->add_option("--lambda2", fit.lambda2)->capture_default_str();
  f->add_option("--alpha", fit.alpha)->capture_default_str();
  f->add_option("--xi", fit.xi)->capture_default_str();
  f->add_option("--iters", fit.iters)->capture_default_str()->check(CLI::PositiveNumber);
  f->add_option("--burnin", fit.burnin, "default: 10% of --iters")->check(CLI::NonNegativeNumber);
  f->add_option("--thin", fit.thin)->capture_default_str()->check(CLI::PositiveNumber);
  f->add_option("--seed", fit.seed)->capture_default_str();
  f->add_option("--chains", fit.chains)->capture_default_str()->check(CLI::PositiveNumber);
  f->add_option("--init", fit.init, "default, zero or file:<path>")->capture_default_str();
  f->add_option("--out", fit.out, "output directory")->capture_default_str();
  f->add_flag("--fast-np", fit.fast_np, "use the O(n^2 p) Gaussian sampler");

  std::vector<std::string> chain_paths;
  std::string diag_out = "summary.json";
  auto* d = app.add_subcommand("diagnose", "summarize stored chains");
  d->add_option("chains", chain_paths, "samples CSV files")->required()->check(CLI::ExistingFile);
  d->add_option("--out", diag_out, "output file, or - for stdout")->capture_default_str();

  std::string suite = "all";
  std::string mutation;
  std::uint64_t verify_seed = 20240601;
  int verify_threads = 0;
  std::string verify_out = "report.json";
  auto* v = app.add_subcommand("verify", "run correctness and ergodicity checks");
  v->add_option("--suite", suite, "geweke, prior, drift, oracle or all")->capture_default_str();
  v->add_option("--seed", verify_seed)->capture_default_str();
  v->add_option("--threads", verify_threads, "0 = all cores");
  v->add_option("--out", verify_out)->capture_default_str();
  v->add_option("--mutation", mutation)->group("");

  try {
    app.parse(argc, argv);
    if (*f) return cmd_fit(fit);
    if (*d) return cmd_diagnose(chain_paths, diag_out);
    if (*v) return cmd_verify(suite, verify_seed, mutation, verify_threads, verify_out);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const RuntimeFailure& e) {
    std::cerr << "error: " << e.message << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
