#include "plg/plg.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "plg/ergodicity.hpp"
#include "plg/error.hpp"
#include "plg/gibbs.hpp"
#include "plg/io.hpp"
#include "plg/output_analysis.hpp"
#include "plg/solvers.hpp"
#include "plg/verification.hpp"

struct plg_dataset {
  plg::Dataset data;
};

struct plg_chain {
  std::vector<std::string> labels;
  Eigen::MatrixXd draws;
};

namespace {

thread_local std::string g_last_error;

plg_status set_error(plg_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
plg_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return PLG_OK;
  } catch (const plg::Error& e) {
    return set_error(static_cast<plg_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(PLG_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(PLG_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(PLG_ERR_INTERNAL, "unknown failure");
  }
}

void need(const void* p, const char* what) {
  if (!p) plg::fail(plg::ErrorCode::invalid_parameter, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

plg::ModelSpec to_spec(const plg_model_config* m) {
  need(m, "model config");
  plg::ModelSpec spec;
  switch (m->model) {
    case PLG_MODEL_BFL: spec.id = plg::ModelId::bfl; break;
    case PLG_MODEL_BGL: spec.id = plg::ModelId::bgl; break;
    case PLG_MODEL_BSGL: spec.id = plg::ModelId::bsgl; break;
    default: plg::fail(plg::ErrorCode::config_error, "unknown model id");
  }
  spec.hyper = plg::Hyperparameters{m->lambda1, m->lambda2, m->alpha, m->xi};
  if (spec.id == plg::ModelId::bfl) {
    if (m->num_groups != 0)
      plg::fail(plg::ErrorCode::config_error, "group sizes are only valid for bgl and bsgl");
  } else {
    if (!m->group_sizes || m->num_groups == 0)
      plg::fail(plg::ErrorCode::config_error, "bgl and bsgl need group sizes");
    spec.groups = plg::GroupStructure(std::vector<int>(m->group_sizes, m->group_sizes + m->num_groups));
  }
  return spec;
}

plg::ChainConfig to_config(const plg_chain_config* c, const plg::ModelSpec& spec,
                           const plg::Dataset& data) {
  need(c, "chain config");
  plg::ChainConfig cfg;
  cfg.n_iter = c->n_iter;
  cfg.burn_in = c->burn_in;
  cfg.thin = c->thin;
  cfg.seed = c->seed;
  cfg.method = c->fast_np ? plg::GaussianMethod::fast_np : plg::GaussianMethod::cholesky;
  switch (c->init) {
    case PLG_INIT_DEFAULT: cfg.init = plg::InitMode::default_start; break;
    case PLG_INIT_ZERO: cfg.init = plg::InitMode::zero; break;
    case PLG_INIT_FILE:
      need(c->init_path, "init_path");
      cfg.init = plg::InitMode::custom;
      cfg.init_state = plg::read_state_csv(c->init_path, spec, data.p());
      break;
    default: plg::fail(plg::ErrorCode::config_error, "unknown init mode");
  }
  cfg.validate();
  return cfg;
}

plg_chain* wrap(plg::ChainOutput&& out) {
  return new plg_chain{std::move(out.labels), std::move(out.draws)};
}

}  // namespace

extern "C" {

const char* plg_version(void) { return "1.0.0"; }

const char* plg_last_error(void) { return g_last_error.c_str(); }

const char* plg_status_string(plg_status s) {
  switch (s) {
    case PLG_OK: return "ok";
    case PLG_ERR_INTERNAL: return "internal-error";
    default:
      if (s >= PLG_ERR_INVALID_PARAMETER && s <= PLG_ERR_QUADRATURE)
        return plg::to_string(static_cast<plg::ErrorCode>(static_cast<int>(s)));
      return "unknown";
  }
}

plg_status plg_parse_model(const char* name, plg_model_id* out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    *out = static_cast<plg_model_id>(static_cast<int>(plg::parse_model_id(name)));
  });
}

plg_status plg_dataset_load_csv(const char* path, plg_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new plg_dataset{plg::ingest_csv(path)};
  });
}

plg_status plg_dataset_create(const double* y, const double* X, size_t n, size_t p,
                              plg_dataset** out) {
  return guarded([&] {
    need(y, "y");
    need(X, "X");
    need(out, "out");
    const auto ni = static_cast<Eigen::Index>(n), pi = static_cast<Eigen::Index>(p);
    *out = new plg_dataset{plg::Dataset(Eigen::Map<const Eigen::VectorXd>(y, ni),
                                        Eigen::Map<const Eigen::MatrixXd>(X, ni, pi))};
  });
}

plg_status plg_dataset_dims(const plg_dataset* ds, size_t* n, size_t* p) {
  return guarded([&] {
    need(ds, "dataset");
    if (n) *n = static_cast<size_t>(ds->data.n());
    if (p) *p = static_cast<size_t>(ds->data.p());
  });
}

void plg_dataset_free(plg_dataset* ds) { delete ds; }

plg_status plg_run_chain(const plg_dataset* ds, const plg_model_config* model,
                         const plg_chain_config* config, uint64_t stream_id, plg_chain** out) {
  return guarded([&] {
    need(ds, "dataset");
    need(out, "out");
    const plg::ModelSpec spec = to_spec(model);
    plg::ChainConfig cfg = to_config(config, spec, ds->data);
    cfg.stream_id = stream_id;
    *out = wrap(plg::run_chain(spec, ds->data, cfg));
  });
}

plg_status plg_run_chains(const plg_dataset* ds, const plg_model_config* model,
                          const plg_chain_config* config, int n_chains, int threads,
                          plg_chain** out) {
  return guarded([&] {
    need(ds, "dataset");
    need(out, "out");
    const plg::ModelSpec spec = to_spec(model);
    const plg::ChainConfig cfg = to_config(config, spec, ds->data);
    auto outs = plg::run_chains(spec, ds->data, cfg, n_chains, threads);
    for (std::size_t i = 0; i < outs.size(); ++i) out[i] = wrap(std::move(outs[i]));
  });
}

plg_status plg_chain_load_csv(const char* path, plg_chain** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    plg::SamplesTable t = plg::read_samples_csv(path);
    *out = new plg_chain{std::move(t.labels), std::move(t.draws)};
  });
}

plg_status plg_chain_write_csv(const plg_chain* chain, const char* path) {
  return guarded([&] {
    need(chain, "chain");
    need(path, "path");
    plg::write_samples_csv(path, chain->labels, chain->draws);
  });
}

plg_status plg_chain_dims(const plg_chain* chain, size_t* rows, size_t* cols) {
  return guarded([&] {
    need(chain, "chain");
    if (rows) *rows = static_cast<size_t>(chain->draws.rows());
    if (cols) *cols = static_cast<size_t>(chain->draws.cols());
  });
}

plg_status plg_chain_label(const plg_chain* chain, size_t col, const char** label) {
  return guarded([&] {
    need(chain, "chain");
    need(label, "label");
    if (col >= chain->labels.size())
      plg::fail(plg::ErrorCode::invalid_parameter, "column index out of range");
    *label = chain->labels[col].c_str();
  });
}

plg_status plg_chain_draws(const plg_chain* chain, double* out, size_t len) {
  return guarded([&] {
    need(chain, "chain");
    need(out, "out");
    const auto r = chain->draws.rows(), c = chain->draws.cols();
    if (len < static_cast<size_t>(r * c))
      plg::fail(plg::ErrorCode::invalid_parameter, "output buffer too small");
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(out, r, c) =
        chain->draws;
  });
}

void plg_chain_free(plg_chain* chain) { delete chain; }

plg_status plg_summary_json(const plg_chain* const* chains, size_t n_chains,
                            const char* const* sources, const char* config_json, char** out_json) {
  return guarded([&] {
    need(chains, "chains");
    need(out_json, "out_json");
    if (n_chains == 0) plg::fail(plg::ErrorCode::invalid_parameter, "no chains given");
    using nlohmann::json;
    json doc = {{"schema_version", "1"}, {"kind", "summary"}};
    if (config_json) {
      try {
        doc["config"] = json::parse(config_json);
      } catch (const json::parse_error& e) {
        plg::fail(plg::ErrorCode::parse_error, std::string("config_json: ") + e.what());
      }
    } else {
      doc["config"] = nullptr;
    }
    json list = json::array();
    std::vector<Eigen::MatrixXd> mats;
    for (size_t i = 0; i < n_chains; ++i) {
      need(chains[i], "chain");
      if (chains[i]->labels != chains[0]->labels)
        plg::fail(plg::ErrorCode::state_mismatch, "chains have different columns");
      json s = plg::summary_to_json(plg::summarize(chains[i]->draws, chains[i]->labels));
      s["chain"] = i;
      s["source"] = sources && sources[i] ? json(sources[i]) : json(nullptr);
      list.push_back(std::move(s));
      mats.push_back(chains[i]->draws);
    }
    doc["chains"] = std::move(list);
    doc["multi_chain"] =
        n_chains >= 2 ? plg::multi_chain_to_json(plg::between_within(mats), chains[0]->labels)
                      : json(nullptr);
    doc["notes"] = json::array(
        {"MCSE and ESS use non-overlapping batch means with batch size floor(sqrt(N)).",
         "The Markov chain CLT behind the MCSE assumes a finite 2+delta moment of each "
         "column; this is not checked."});
    *out_json = dup_string(doc.dump(2));
  });
}

plg_status plg_drift_report_json(const plg_dataset* ds, const plg_model_config* model,
                                 double multiplier, int with_default_start, char** out_json) {
  return guarded([&] {
    need(ds, "dataset");
    need(out_json, "out_json");
    const plg::ModelSpec spec = to_spec(model);
    std::optional<plg::ChainState> start;
    if (with_default_start) start = plg::default_start(spec, ds->data);
    const plg::DriftReport r = plg::drift_report(spec, ds->data, multiplier, start);
    *out_json = dup_string(plg::drift_report_to_json(r).dump(2));
  });
}

plg_status plg_verify_json(const char* suite, uint64_t seed, const char* mutation, int threads,
                           char** out_json, int* passed) {
  return guarded([&] {
    need(suite, "suite");
    need(out_json, "out_json");
    plg::SuiteOptions opt;
    opt.seed = seed;
    opt.threads = threads;
    if (mutation) opt.mutation = plg::parse_mutation(mutation);
    const plg::SuiteReport rep = plg::run_verification_suite(suite, opt);
    *out_json = dup_string(plg::suite_to_json(rep).dump(2));
    if (passed) *passed = rep.passed() ? 1 : 0;
  });
}

int plg_is_known_suite(const char* suite) { return suite && plg::is_known_suite(suite) ? 1 : 0; }

void plg_string_free(char* s) { std::free(s); }

}  // extern "C"
