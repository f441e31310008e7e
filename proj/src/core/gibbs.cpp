#include "plg/gibbs.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "plg/error.hpp"
#include "plg/solvers.hpp"

namespace plg {

namespace {

constexpr double kZero = 1e-300;

ReciprocalScaleLaw scale_law(double norm, double lambda, double sigma2, bool drop_sigma = false) {
  ReciprocalScaleLaw law;
  law.ig_shape = lambda * lambda;
  if (norm < kZero) {
    law.fallback = true;
    law.ig_mean = std::numeric_limits<double>::infinity();
    return law;
  }
  law.ig_mean = (drop_sigma ? lambda : lambda * std::sqrt(sigma2)) / norm;
  if (!std::isfinite(law.ig_mean)) {
    law.fallback = true;
    law.ig_mean = std::numeric_limits<double>::infinity();
  }
  return law;
}

double block_norm(const Eigen::VectorXd& beta, const GroupStructure& g, int k) {
  if (g.size(k) == 1) return std::abs(beta(g.start(k)));
  return beta.segment(g.start(k), g.size(k)).stableNorm();
}

// Returns the scale itself, i.e. the reciprocal of the Inverse-Gaussian draw.
double draw_scale(const ReciprocalScaleLaw& law, RngStream& rng) {
  if (law.fallback) return sample_gamma(0.5, law.ig_shape / 2.0, rng);
  const double x = sample_inverse_gaussian(law.ig_mean, law.ig_shape, rng);
  const double s = 1.0 / x;
  return s > 0.0 ? s : std::numeric_limits<double>::denorm_min();
}

double sigma2_shape(const Dataset& data, const Hyperparameters& h, Mutation m) {
  const double n = static_cast<double>(data.n());
  const double p = static_cast<double>(data.p());
  if (m == Mutation::sigma2_shape) return (n + 2.0 * h.alpha) / 2.0;
  return (n + p + 2.0 * h.alpha) / 2.0;
}

double sigma2_rate(const Dataset& data, const Hyperparameters& h, const Eigen::VectorXd& beta,
                   const SymTridiagonal& P, Mutation m) {
  double r = data.residual_sum_of_squares(beta) + P.quadratic_form(beta);
  if (m != Mutation::missing_xi) r += 2.0 * h.xi;
  return r / 2.0;
}

double draw_sigma2(const Dataset& data, const Hyperparameters& h, const Eigen::VectorXd& beta,
                   const SymTridiagonal& P, Mutation m, RngStream& rng) {
  const double rate = sigma2_rate(data, h, beta, P, m);
  require(rate > 0.0 && std::isfinite(rate), ErrorCode::invalid_parameter,
          "sigma2 full conditional has a non-positive rate (xi = 0 with an exact fit)");
  return sample_inverse_gamma(sigma2_shape(data, h, m), rate, rng);
}

Eigen::VectorXd draw_beta(const Dataset& data, const SymTridiagonal& P, double sigma2,
                          GaussianMethod method, RngStream& rng) {
  if (method == GaussianMethod::fast_np)
    return sample_gaussian_regression_conditional_np(data.X(), data.y(), P, sigma2, rng);
  return sample_gaussian_regression_conditional(data.xtx(), data.xty(), P, sigma2, rng);
}

SymTridiagonal fused_precision(const FusedState& s, Mutation m) {
  SymTridiagonal P = build_fused_precision(s.tau2, s.w2);
  if (m == Mutation::dropped_offdiag)
    return SymTridiagonal(P.diag(), Eigen::VectorXd::Zero(P.off().size()));
  return P;
}

Eigen::VectorXd concat(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out(a.size() + b.size());
  out << a, b;
  return out;
}

double require_sigma2(const std::optional<double>& s) {
  require(s.has_value(), ErrorCode::state_mismatch,
          "full-conditional parameters need a state carrying sigma2");
  return *s;
}

void fill_beta_params(FullConditionals& fc, const Dataset& data, const SymTridiagonal& P,
                      double sigma2) {
  Eigen::MatrixXd A = data.xtx() + P.dense();
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  require(llt.info() == Eigen::Success, ErrorCode::decomposition_failure,
          "X'X + prior precision is not positive definite");
  fc.beta_mean = llt.solve(data.xty());
  const Eigen::Index p = A.rows();
  fc.beta_cov_factor =
      std::sqrt(sigma2) * llt.matrixU().solve(Eigen::MatrixXd::Identity(p, p));
}

}  // namespace

std::string to_string(Mutation m) {
  switch (m) {
    case Mutation::none: return "none";
    case Mutation::sigma2_shape: return "sigma2-shape";
    case Mutation::ig_mean: return "ig-mean";
    case Mutation::update_order: return "update-order";
    case Mutation::missing_xi: return "missing-xi";
    case Mutation::dropped_offdiag: return "dropped-offdiag";
  }
  return "?";
}

Mutation parse_mutation(const std::string& s) {
  for (Mutation m : {Mutation::none, Mutation::sigma2_shape, Mutation::ig_mean,
                     Mutation::update_order, Mutation::missing_xi, Mutation::dropped_offdiag})
    if (to_string(m) == s) return m;
  fail(ErrorCode::config_error, "unknown mutation '" + s + "'");
}

FullConditionals full_conditional_params(const ModelSpec& spec, const ChainState& state,
                                         const Dataset& data) {
  validate_state(spec, data.p(), state);
  const Hyperparameters& h = spec.hyper;
  FullConditionals fc;
  fc.sigma2_shape = sigma2_shape(data, h, Mutation::none);
  const SymTridiagonal P = prior_precision(spec, state);
  std::visit(
      [&](const auto& st) {
        using T = std::decay_t<decltype(st)>;
        const double s2 = require_sigma2(st.sigma2);
        fc.sigma2_rate = sigma2_rate(data, h, st.beta, P, Mutation::none);
        const Eigen::Index p = st.beta.size();
        if constexpr (std::is_same_v<T, FusedState>) {
          for (Eigen::Index i = 0; i < p; ++i)
            fc.tau2.push_back(scale_law(std::abs(st.beta(i)), h.lambda1, s2));
          for (Eigen::Index i = 0; i + 1 < p; ++i)
            fc.second.push_back(scale_law(std::abs(st.beta(i + 1) - st.beta(i)), h.lambda2, s2));
        } else {
          const GroupStructure& g = spec.groups;
          for (int k = 0; k < g.num_groups(); ++k)
            fc.tau2.push_back(
                scale_law(block_norm(st.beta, g, k), h.lambda1, s2));
          if constexpr (std::is_same_v<T, SparseGroupState>)
            for (Eigen::Index i = 0; i < p; ++i)
              fc.second.push_back(scale_law(std::abs(st.beta(i)), h.lambda2, s2));
        }
        fill_beta_params(fc, data, P, s2);
      },
      state);
  return fc;
}

FusedState bfl_step(const FusedState& s, const Dataset& data, const Hyperparameters& h,
                    RngStream& rng, const KernelOptions& opt) {
  const Mutation m = opt.mutation;
  const Eigen::Index p = s.beta.size();

  const SymTridiagonal P0 = fused_precision(s, m);
  const double sigma2 = draw_sigma2(data, h, s.beta, P0, m, rng);

  FusedState next;
  next.sigma2 = sigma2;
  next.tau2.resize(p);
  next.w2.resize(p > 0 ? p - 1 : 0);
  const bool drop = m == Mutation::ig_mean;
  for (Eigen::Index i = 0; i < p; ++i)
    next.tau2(i) = draw_scale(scale_law(std::abs(s.beta(i)), h.lambda1, sigma2, drop), rng);
  for (Eigen::Index i = 0; i + 1 < p; ++i)
    next.w2(i) =
        draw_scale(scale_law(std::abs(s.beta(i + 1) - s.beta(i)), h.lambda2, sigma2, drop), rng);

  const FusedState& scales_for_beta = m == Mutation::update_order ? s : next;
  const SymTridiagonal P1 = fused_precision(scales_for_beta, m);
  next.beta = draw_beta(data, P1, sigma2, opt.method, rng);

  if (opt.trace) {
    opt.trace->sigma2_beta = s.beta;
    opt.trace->sigma2_scales = concat(s.tau2, s.w2);
    opt.trace->scales_beta = s.beta;
    opt.trace->scales_sigma2 = sigma2;
    opt.trace->beta_scales = concat(scales_for_beta.tau2, scales_for_beta.w2);
    opt.trace->beta_sigma2 = sigma2;
  }
  return next;
}

GroupState bgl_step(const GroupState& s, const Dataset& data, const Hyperparameters& h,
                    const GroupStructure& groups, RngStream& rng, const KernelOptions& opt) {
  const SymTridiagonal P0 = build_group_precision(s.tau2, groups);
  const double sigma2 = draw_sigma2(data, h, s.beta, P0, Mutation::none, rng);

  GroupState next;
  next.sigma2 = sigma2;
  next.tau2.resize(groups.num_groups());
  for (int k = 0; k < groups.num_groups(); ++k) {
    const double norm = block_norm(s.beta, groups, k);
    next.tau2(k) = draw_scale(scale_law(norm, h.lambda1, sigma2), rng);
  }
  const SymTridiagonal P1 = build_group_precision(next.tau2, groups);
  next.beta = draw_beta(data, P1, sigma2, opt.method, rng);

  if (opt.trace) {
    opt.trace->sigma2_beta = s.beta;
    opt.trace->sigma2_scales = s.tau2;
    opt.trace->scales_beta = s.beta;
    opt.trace->scales_sigma2 = sigma2;
    opt.trace->beta_scales = next.tau2;
    opt.trace->beta_sigma2 = sigma2;
  }
  return next;
}

SparseGroupState bsgl_step(const SparseGroupState& s, const Dataset& data,
                           const Hyperparameters& h, const GroupStructure& groups,
                           RngStream& rng, const KernelOptions& opt) {
  const Eigen::Index p = s.beta.size();
  const SymTridiagonal P0 = build_sparse_precision(s.tau2, s.gamma2, groups);
  const double sigma2 = draw_sigma2(data, h, s.beta, P0, Mutation::none, rng);

  SparseGroupState next;
  next.sigma2 = sigma2;
  next.tau2.resize(groups.num_groups());
  next.gamma2.resize(p);
  for (int k = 0; k < groups.num_groups(); ++k) {
    const double norm = block_norm(s.beta, groups, k);
    next.tau2(k) = draw_scale(scale_law(norm, h.lambda1, sigma2), rng);
  }
  for (Eigen::Index i = 0; i < p; ++i)
    next.gamma2(i) = draw_scale(scale_law(std::abs(s.beta(i)), h.lambda2, sigma2), rng);
  const SymTridiagonal P1 = build_sparse_precision(next.tau2, next.gamma2, groups);
  next.beta = draw_beta(data, P1, sigma2, opt.method, rng);

  if (opt.trace) {
    opt.trace->sigma2_beta = s.beta;
    opt.trace->sigma2_scales = concat(s.tau2, s.gamma2);
    opt.trace->scales_beta = s.beta;
    opt.trace->scales_sigma2 = sigma2;
    opt.trace->beta_scales = concat(next.tau2, next.gamma2);
    opt.trace->beta_sigma2 = sigma2;
  }
  return next;
}

ChainState step(const ModelSpec& spec, const ChainState& s, const Dataset& data, RngStream& rng,
                const KernelOptions& opt) {
  require(model_of(s) == spec.id, ErrorCode::state_mismatch, "state does not match the model");
  switch (spec.id) {
    case ModelId::bfl: return bfl_step(std::get<FusedState>(s), data, spec.hyper, rng, opt);
    case ModelId::bgl:
      return bgl_step(std::get<GroupState>(s), data, spec.hyper, spec.groups, rng, opt);
    case ModelId::bsgl:
      return bsgl_step(std::get<SparseGroupState>(s), data, spec.hyper, spec.groups, rng, opt);
  }
  fail(ErrorCode::state_mismatch, "unknown model");
}

Eigen::VectorXd scales_of(const ChainState& s) {
  return std::visit(
      [](const auto& st) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, FusedState>) return concat(st.tau2, st.w2);
        else if constexpr (std::is_same_v<T, GroupState>) return st.tau2;
        else return concat(st.tau2, st.gamma2);
      },
      s);
}

void ChainConfig::validate() const {
  require(n_iter >= 1, ErrorCode::config_error, "n_iter must be positive");
  require(burn_in >= 0 && burn_in < n_iter, ErrorCode::config_error,
          "burn_in must satisfy 0 <= burn_in < n_iter");
  require(thin >= 1, ErrorCode::config_error, "thin must be >= 1");
  if (init == InitMode::custom)
    require(init_state.has_value(), ErrorCode::config_error, "custom init needs a state");
}

ChainState zero_state(const ModelSpec& spec, Eigen::Index p) {
  const Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  const int K = spec.groups.num_groups();
  switch (spec.id) {
    case ModelId::bfl:
      return FusedState{beta, Eigen::VectorXd::Ones(p), Eigen::VectorXd::Ones(p - 1), std::nullopt};
    case ModelId::bgl: return GroupState{beta, Eigen::VectorXd::Ones(K), std::nullopt};
    case ModelId::bsgl:
      return SparseGroupState{beta, Eigen::VectorXd::Ones(K), Eigen::VectorXd::Ones(p),
                              std::nullopt};
  }
  fail(ErrorCode::config_error, "unknown model");
}

ChainState initial_state(const ModelSpec& spec, const Dataset& data, const ChainConfig& config) {
  switch (config.init) {
    case InitMode::default_start: return default_start(spec, data);
    case InitMode::zero: return zero_state(spec, data.p());
    case InitMode::custom: {
      require(config.init_state.has_value(), ErrorCode::config_error, "custom init needs a state");
      validate_state(spec, data.p(), *config.init_state);
      return *config.init_state;
    }
  }
  fail(ErrorCode::config_error, "unknown init mode");
}

namespace {

ChainOutput run_from(const ModelSpec& spec, const Dataset& data, const ChainConfig& config,
                     const ChainState& init) {
  ChainOutput out;
  out.spec = spec;
  out.config = config;
  out.initial = init;
  out.labels = state_labels(spec, data.p());
  const long kept = (config.n_iter - config.burn_in) / config.thin;
  out.draws.resize(kept, static_cast<Eigen::Index>(out.labels.size()));

  RngStream rng(config.seed, config.stream_id);
  KernelOptions opt;
  opt.method = config.method;
  ChainState s = init;
  long row = 0;
  for (long t = 1; t <= config.n_iter; ++t) {
    s = step(spec, s, data, rng, opt);
    if (t > config.burn_in && (t - config.burn_in) % config.thin == 0 && row < kept)
      out.draws.row(row++) = flatten(s).transpose();
  }
  return out;
}

}  // namespace

ChainOutput run_chain(const ModelSpec& spec, const Dataset& data, const ChainConfig& config) {
  spec.validate(data);
  config.validate();
  return run_from(spec, data, config, initial_state(spec, data, config));
}

std::vector<ChainOutput> run_chains(const ModelSpec& spec, const Dataset& data,
                                    const ChainConfig& config, int chains, int threads) {
  require(chains >= 1, ErrorCode::config_error, "chains must be >= 1");
  spec.validate(data);
  config.validate();
  const ChainState init = initial_state(spec, data, config);

  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, chains);

  std::vector<ChainOutput> out(chains);
  std::vector<std::exception_ptr> errors(chains);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int c = next++; c < chains; c = next++) {
      try {
        ChainConfig cc = config;
        cc.stream_id = static_cast<std::uint64_t>(c);
        out[c] = run_from(spec, data, cc, init);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace plg
