#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "plg/gibbs.hpp"
#include "plg/model.hpp"

namespace plg {

/// V(state) for the state's model. Never reads sigma2.
double drift_value(const ModelSpec& spec, const ChainState& state, const Dataset& data);

struct DriftRate {
  double phi = 0.0;
  /// Sparse group lasso only: the variant with denominators 2 and 2M; equals
  /// phi for the other models.
  double phi_alt = 0.0;
  bool warning = false;  // n < 3: the sub-unit guarantee does not apply
};

DriftRate drift_rate(ModelId model, long n, long p, double alpha, int M = 1, double lambda1 = 1.0,
                     double lambda2 = 1.0);

double drift_constant(ModelId model, long n, long p, double alpha, double xi, double yty,
                      int M = 1, double lambda1 = 1.0, double lambda2 = 1.0);

double small_set_radius(double phi, double L, double multiplier = 1.0);

struct Minorization {
  double epsilon = 0.0;
  double log_epsilon = 0.0;
  double ridge = 0.0;        // c in y'y - y'X(X'X + cI)^{-1}X'y
  double numerator = 0.0;
  double denominator = 0.0;
  double exponent = 0.0;
};

Minorization minorization_epsilon(const ModelSpec& spec, double d, const Dataset& data);

struct DriftReport {
  ModelId model = ModelId::bfl;
  long n = 0, p = 0;
  int K = 0, M = 0;
  Hyperparameters hyper;
  double yty = 0.0;
  DriftRate rate;
  double L = 0.0;
  double multiplier = 1.0;
  double d = 0.0;
  Minorization minor;
  std::optional<double> start_value;  // V at the default starting value
};

DriftReport drift_report(const ModelSpec& spec, const Dataset& data, double multiplier = 1.0,
                         const std::optional<ChainState>& start = std::nullopt);

struct EmpiricalDriftRow {
  double value = 0.0;       // V(state)
  double mean_next = 0.0;   // Monte Carlo E[V(next) | state]
  double mc_se = 0.0;
  double bound = 0.0;       // phi V + L
  bool satisfied = false;
};

struct EmpiricalDriftResult {
  std::vector<EmpiricalDriftRow> rows;
  long replicates = 0;
  double phi = 0.0;
  double L = 0.0;
  bool all_satisfied() const;
  int violations() const;
};

/// Averages V over `replicates` independent one-step transitions from each
/// state; state i uses stream derive(i) of (seed, 0).
EmpiricalDriftResult empirical_drift_check(const ModelSpec& spec,
                                           const std::vector<ChainState>& states,
                                           const Dataset& data, long replicates,
                                           std::uint64_t seed, int threads = 0);

}  // namespace plg
