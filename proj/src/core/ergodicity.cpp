#include "plg/ergodicity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "plg/error.hpp"

namespace plg {

double drift_value(const ModelSpec& spec, const ChainState& state, const Dataset& data) {
  validate_state(spec, data.p(), state);
  const Hyperparameters& h = spec.hyper;
  return std::visit(
      [&](const auto& st) {
        using T = std::decay_t<decltype(st)>;
        double v = data.residual_sum_of_squares(st.beta);
        const double l1sq = h.lambda1 * h.lambda1;
        const double l2sq = h.lambda2 * h.lambda2;
        if constexpr (std::is_same_v<T, FusedState>) {
          v += fused_quadratic_form(st.beta, st.tau2, st.w2);
          v += l1sq / 4.0 * st.tau2.sum() + l2sq / 4.0 * st.w2.sum();
        } else if constexpr (std::is_same_v<T, GroupState>) {
          v += build_group_precision(st.tau2, spec.groups).quadratic_form(st.beta);
          v += l1sq / 4.0 * st.tau2.sum();
        } else {
          v += build_sparse_precision(st.tau2, st.gamma2, spec.groups).quadratic_form(st.beta);
          v += l1sq / 4.0 * st.tau2.sum() + l2sq / 4.0 * st.gamma2.sum();
        }
        return v;
      },
      state);
}

namespace {

double denominator_np(long n, long p, double alpha) {
  const double den = static_cast<double>(n + p) + 2.0 * alpha - 2.0;
  require(den > 0.0, ErrorCode::invalid_parameter, "n + p + 2 alpha must exceed 2");
  return den;
}

}  // namespace

DriftRate drift_rate(ModelId model, long n, long p, double alpha, int M, double lambda1,
                     double lambda2) {
  require(n >= 1 && p >= 1, ErrorCode::invalid_parameter, "n and p must be positive");
  require(std::isfinite(alpha) && alpha >= 0.0, ErrorCode::invalid_parameter, "alpha must be >= 0");
  DriftRate r;
  r.warning = n < 3;
  const double first = static_cast<double>(p) / denominator_np(n, p, alpha);
  if (model != ModelId::bsgl) {
    r.phi = r.phi_alt = std::max(first, 0.5);
    return r;
  }
  require(M >= 1, ErrorCode::invalid_parameter, "M must be >= 1");
  require(lambda1 > 0.0 && lambda2 > 0.0, ErrorCode::invalid_parameter, "lambdas must be positive");
  const double ratio = (lambda1 * lambda1) / (lambda2 * lambda2);
  const double s = 1.0 + ratio + 1.0 / ratio;
  const double a = 1.0 + 1.0 / ratio;  // 1 + lambda2^2/lambda1^2
  const double b = 1.0 + ratio;        // 1 + lambda1^2/lambda2^2
  r.phi = std::max({first, a / (8.0 * s), b / (8.0 * M * s)});
  r.phi_alt = std::max({first, a / (2.0 * s), b / (2.0 * M * s)});
  return r;
}

double drift_constant(ModelId model, long n, long p, double alpha, double xi, double yty, int M,
                      double lambda1, double lambda2) {
  require(xi >= 0.0 && yty >= 0.0, ErrorCode::invalid_parameter, "xi and y'y must be >= 0");
  const double den = denominator_np(n, p, alpha);
  const double pd = static_cast<double>(p);
  const double m = static_cast<double>(n + p) + 2.0 * alpha;
  const double tail = 2.0 * pd * xi / den;
  switch (model) {
    case ModelId::bfl: return yty + pd / 2.0 * (m + 2.0) + tail;
    case ModelId::bgl: return yty + pd / 4.0 * (1.0 + M * m / 2.0) + tail;
    case ModelId::bsgl: {
      const double ratio = (lambda1 * lambda1) / (lambda2 * lambda2);
      const double A = (1.0 + ratio + 1.0 / ratio) * m;
      return yty + pd / 4.0 * (2.0 + A * M) + tail;
    }
  }
  fail(ErrorCode::invalid_parameter, "unknown model");
}

double small_set_radius(double phi, double L, double multiplier) {
  require(phi >= 0.0 && phi < 1.0, ErrorCode::invalid_parameter, "phi must lie in [0, 1)");
  require(L > 0.0 && multiplier >= 1.0, ErrorCode::invalid_parameter,
          "L must be positive and the multiplier >= 1");
  return multiplier * 2.0 * L / (1.0 - phi);
}

Minorization minorization_epsilon(const ModelSpec& spec, double d, const Dataset& data) {
  spec.validate(data);
  require(std::isfinite(d) && d > 0.0, ErrorCode::invalid_parameter, "d must be positive");
  const Hyperparameters& h = spec.hyper;
  const double pd = static_cast<double>(data.p());
  const double K = static_cast<double>(spec.groups.num_groups());
  Minorization m;
  double prefactor_log = -1.0;
  switch (spec.id) {
    case ModelId::bfl:
      m.ridge = h.lambda1 * h.lambda1 / (8.0 * d);
      m.denominator = d + 2.0 * h.xi + 8.0 * pd * pd * d * d;
      break;
    case ModelId::bgl:
      m.ridge = h.lambda1 * h.lambda1 / (4.0 * d);
      m.denominator = d + 2.0 * h.xi + 4.0 * K * K * d * d;
      prefactor_log = -0.5;
      break;
    case ModelId::bsgl:
      m.ridge = (h.lambda1 * h.lambda1 + h.lambda2 * h.lambda2) / (4.0 * d);
      m.denominator = d + 2.0 * h.xi + 4.0 * pd * pd * d * d + 4.0 * K * K * d * d;
      break;
  }
  // y'y - y'X(X'X + cI)^{-1}X'y = ||y - X b||^2 + c ||b||^2 at the ridge solution b
  Eigen::MatrixXd A = data.xtx();
  A.diagonal().array() += m.ridge;
  const Eigen::VectorXd b = A.llt().solve(data.xty());
  m.numerator = data.residual_sum_of_squares(b) + m.ridge * b.squaredNorm() + 2.0 * h.xi;
  if (!(m.numerator > 0.0))
    fail(ErrorCode::degenerate_epsilon,
         "minorization numerator y'y - y'X(X'X + cI)^{-1}X'y + 2 xi is " +
             std::to_string(m.numerator) + " (ridge c = " + std::to_string(m.ridge) + ")");
  m.exponent = static_cast<double>(data.n() + data.p()) / 2.0 + h.alpha;
  m.log_epsilon = prefactor_log + m.exponent * (std::log(m.numerator) - std::log(m.denominator));
  m.epsilon = std::exp(m.log_epsilon);
  return m;
}

DriftReport drift_report(const ModelSpec& spec, const Dataset& data, double multiplier,
                         const std::optional<ChainState>& start) {
  spec.validate(data);
  DriftReport r;
  r.model = spec.id;
  r.n = data.n();
  r.p = data.p();
  r.K = spec.id == ModelId::bfl ? 0 : spec.groups.num_groups();
  r.M = spec.id == ModelId::bfl ? 1 : spec.groups.max_size();
  r.hyper = spec.hyper;
  r.yty = data.yty();
  const Hyperparameters& h = spec.hyper;
  r.rate = drift_rate(spec.id, r.n, r.p, h.alpha, r.M, h.lambda1, h.lambda2);
  r.L = drift_constant(spec.id, r.n, r.p, h.alpha, h.xi, r.yty, r.M, h.lambda1, h.lambda2);
  r.multiplier = multiplier;
  r.d = small_set_radius(r.rate.phi, r.L, multiplier);
  r.minor = minorization_epsilon(spec, r.d, data);
  if (start) r.start_value = drift_value(spec, *start, data);
  return r;
}

bool EmpiricalDriftResult::all_satisfied() const { return violations() == 0; }

int EmpiricalDriftResult::violations() const {
  return static_cast<int>(
      std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.satisfied; }));
}

EmpiricalDriftResult empirical_drift_check(const ModelSpec& spec,
                                           const std::vector<ChainState>& states,
                                           const Dataset& data, long replicates,
                                           std::uint64_t seed, int threads) {
  spec.validate(data);
  require(replicates >= 1000, ErrorCode::invalid_parameter, "replicates must be >= 1000");
  const Hyperparameters& h = spec.hyper;
  const int M = spec.id == ModelId::bfl ? 1 : spec.groups.max_size();
  EmpiricalDriftResult res;
  res.replicates = replicates;
  res.phi = drift_rate(spec.id, data.n(), data.p(), h.alpha, M, h.lambda1, h.lambda2).phi;
  res.L = drift_constant(spec.id, data.n(), data.p(), h.alpha, h.xi, data.yty(), M, h.lambda1,
                         h.lambda2);
  res.rows.resize(states.size());

  const RngStream root(seed, 0);
  std::vector<std::exception_ptr> errors(states.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < states.size(); i = next++) {
      try {
        EmpiricalDriftRow& row = res.rows[i];
        row.value = drift_value(spec, states[i], data);
        RngStream rng = root.derive(i);
        double mean = 0.0, m2 = 0.0;
        for (long r = 0; r < replicates; ++r) {
          const double v = drift_value(spec, step(spec, states[i], data, rng), data);
          const double delta = v - mean;
          mean += delta / static_cast<double>(r + 1);
          m2 += delta * (v - mean);
        }
        row.mean_next = mean;
        row.mc_se = std::sqrt(m2 / static_cast<double>(replicates - 1) / replicates);
        row.bound = res.phi * row.value + res.L;
        row.satisfied = row.mean_next <= row.bound + 3.0 * row.mc_se;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp<int>(workers, 1, std::max<int>(1, static_cast<int>(states.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return res;
}

}  // namespace plg
