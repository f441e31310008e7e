#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "plg/gibbs.hpp"
#include "plg/model.hpp"
#include "plg/rng.hpp"

namespace plg {

struct Statistic {
  std::string name;
  double value = 0.0;
  bool passed = true;
};

struct CheckResult {
  std::string name;
  double threshold = 0.0;
  bool passed = true;
  std::vector<Statistic> statistics;
  std::string details;

  /// Recomputes `passed` from the statistics.
  void settle();
};

// ---- joint-distribution simulation ---------------------------------------

struct JointDraw {
  ChainState state;  // carries sigma2
  Eigen::VectorXd y;
};

/// Draws (beta, scales, sigma2) from the prior and y from the likelihood.
/// Needs alpha > 0 and xi > 0 so the sigma2 prior is proper.
JointDraw sample_joint(const ModelSpec& spec, const Eigen::MatrixXd& X, RngStream& rng);

/// beta_1, beta_1^2, sigma2, log sigma2, tau2_1, beta_1 sigma2.
std::vector<std::string> test_function_names();
Eigen::VectorXd test_functions(const ChainState& s);

struct GewekeOptions {
  ModelSpec spec;  // defaults to alpha = 3, xi = 2 when built by default_geweke_spec
  int n = 4;
  long replicates = 10000;
  int gibbs_substeps = 1;
  std::uint64_t seed = 1;
  KernelOptions kernel;
  double threshold = 4.0;
};

ModelSpec default_geweke_spec(ModelId model, int p = 3);

/// Marginal-conditional vs successive-conditional simulator comparison.
CheckResult geweke_joint_test(const GewekeOptions& opt);

/// One Gibbs step from an exact joint draw (keeping its y) against a fresh
/// independent joint draw; two-sample z-tests on the test functions.
CheckResult one_step_stationarity_test(const GewekeOptions& opt);

/// Runs one sweep with parameter capture and checks which values each block
/// conditioned on.
CheckResult update_order_check(const ModelSpec& spec, const KernelOptions& kernel,
                               std::uint64_t seed, int sweeps = 20);

// ---- prior checks ----------------------------------------------------------

struct ProprietyOptions {
  int p = 3;
  double lambda1 = 1.0, lambda2 = 1.0;
  long samples = 100000;
  std::uint64_t seed = 2;
  double max_relative_error = 0.05;
};

/// Importance-sampling estimate of the normalizing constant of the fused
/// scale prior; also checks det(S)^{1/2} prod (tau2)^{-1/2} <= 2^{p/2} pointwise.
CheckResult fused_prior_propriety_check(const ProprietyOptions& opt);

/// Closed form of the same constant for p = 1.
double fused_prior_constant_p1(double lambda1);

struct MarginalPriorOptions {
  int p = 2;
  double lambda1 = 1.0, lambda2 = 1.0, sigma2 = 1.0;
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
  long samples = 1000000;
  std::uint64_t seed = 3;
  double threshold = 3.0;
};

/// Estimates pi(beta | sigma2) / pi(beta' | sigma2) by integrating the scale
/// prior out and compares it with the Laplace-form ratio.
CheckResult fused_marginal_prior_check(const MarginalPriorOptions& opt);

double laplace_log_ratio(const Eigen::VectorXd& b, const Eigen::VectorXd& b2, double lambda1,
                         double lambda2, double sigma2);

// ---- p = 1 posterior oracle ------------------------------------------------

struct PosteriorMoments {
  double beta_mean = 0.0;
  double beta_var = 0.0;
  double sigma2_mean = 0.0;
  double sigma2_var = 0.0;
  double relative_error = 0.0;  // worst quadrature error estimate over the integrals
};

/// Posterior moments for the one-coefficient model (fused and group lasso
/// coincide at p = 1), by nested quadrature: closed-form over beta given
/// sigma2, adaptive Gauss-Kronrod over log sigma2.
PosteriorMoments posterior_oracle_1d(const Dataset& data, const Hyperparameters& hyper,
                                     double tolerance = 1e-10);

/// Standard-normal design, coefficients (1, -0.5, 0, 0.75, 0, ...), unit noise.
Dataset synthetic_dataset(int n, int p, std::uint64_t seed);

// ---- suites ----------------------------------------------------------------

struct SuiteReport {
  std::string suite;
  std::string mutation;
  std::vector<CheckResult> checks;
  bool passed() const;
};

struct SuiteOptions {
  std::uint64_t seed = 20240601;
  Mutation mutation = Mutation::none;
  int threads = 0;
};

/// suite is one of geweke, prior, drift, oracle, all.
SuiteReport run_verification_suite(const std::string& suite, const SuiteOptions& opt);
bool is_known_suite(const std::string& suite);

}  // namespace plg
