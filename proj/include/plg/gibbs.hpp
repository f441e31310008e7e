#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "plg/distributions.hpp"
#include "plg/model.hpp"
#include "plg/rng.hpp"

namespace plg {

/// Parameters of the Inverse-Gaussian law of a reciprocal scale 1/s. When the
/// driving coefficient norm is zero the law degenerates to its
/// Inverse-Gamma(1/2, shape/2) limit and `fallback` is set.
struct ReciprocalScaleLaw {
  double ig_mean = 0.0;
  double ig_shape = 0.0;
  bool fallback = false;
};

struct FullConditionals {
  double sigma2_shape = 0.0;
  double sigma2_rate = 0.0;
  std::vector<ReciprocalScaleLaw> tau2;
  std::vector<ReciprocalScaleLaw> second;  // w2 (fused) or gamma2 (sparse group); empty otherwise
  Eigen::VectorXd beta_mean;
  Eigen::MatrixXd beta_cov_factor;  // F with sigma2 (X'X + P)^{-1} = F F'
};

/// Full-conditional parameters evaluated at `state`. Requires state.sigma2.
FullConditionals full_conditional_params(const ModelSpec& spec, const ChainState& state,
                                         const Dataset& data);

/// Seeded single-formula defects, used to check that the verification
/// harness notices them. Only the fused kernel honours these.
enum class Mutation { none, sigma2_shape, ig_mean, update_order, missing_xi, dropped_offdiag };

std::string to_string(Mutation m);
Mutation parse_mutation(const std::string& s);

/// What each block of one sweep actually conditioned on.
struct StepTrace {
  Eigen::VectorXd sigma2_beta;    // beta used by the sigma2 draw
  Eigen::VectorXd sigma2_scales;  // scales used by the sigma2 draw
  Eigen::VectorXd scales_beta;    // beta used by the scale draws
  double scales_sigma2 = 0.0;     // sigma2 used by the scale draws
  Eigen::VectorXd beta_scales;    // scales used by the beta draw
  double beta_sigma2 = 0.0;       // sigma2 used by the beta draw
};

struct KernelOptions {
  GaussianMethod method = GaussianMethod::cholesky;
  Mutation mutation = Mutation::none;
  StepTrace* trace = nullptr;
};

FusedState bfl_step(const FusedState& s, const Dataset& data, const Hyperparameters& hyper,
                    RngStream& rng, const KernelOptions& opt = {});
GroupState bgl_step(const GroupState& s, const Dataset& data, const Hyperparameters& hyper,
                    const GroupStructure& groups, RngStream& rng, const KernelOptions& opt = {});
SparseGroupState bsgl_step(const SparseGroupState& s, const Dataset& data,
                           const Hyperparameters& hyper, const GroupStructure& groups,
                           RngStream& rng, const KernelOptions& opt = {});

/// One sweep of whichever kernel matches the state.
ChainState step(const ModelSpec& spec, const ChainState& s, const Dataset& data, RngStream& rng,
                const KernelOptions& opt = {});

/// Scales (all variance components except sigma2) in flattened order.
Eigen::VectorXd scales_of(const ChainState& s);

enum class InitMode { default_start, zero, custom };

struct ChainConfig {
  long n_iter = 1000;
  long burn_in = 0;
  long thin = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  InitMode init = InitMode::default_start;
  std::optional<ChainState> init_state;  // used when init == custom
  GaussianMethod method = GaussianMethod::cholesky;

  void validate() const;
};

struct ChainOutput {
  Eigen::MatrixXd draws;  // kept iterations x flattened state
  std::vector<std::string> labels;
  ModelSpec spec;
  ChainConfig config;
  ChainState initial;
};

/// beta = 0 with every scale set to one.
ChainState zero_state(const ModelSpec& spec, Eigen::Index p);

ChainState initial_state(const ModelSpec& spec, const Dataset& data, const ChainConfig& config);

ChainOutput run_chain(const ModelSpec& spec, const Dataset& data, const ChainConfig& config);

/// Runs `chains` chains with stream ids 0..chains-1 on at most `threads`
/// workers (0 = hardware concurrency).
std::vector<ChainOutput> run_chains(const ModelSpec& spec, const Dataset& data,
                                    const ChainConfig& config, int chains, int threads = 0);

}  // namespace plg
