#include "plg/verification.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "plg/distributions.hpp"
#include "plg/ergodicity.hpp"
#include "plg/error.hpp"
#include "plg/output_analysis.hpp"
#include "plg/solvers.hpp"

namespace plg {

void CheckResult::settle() {
  passed = std::all_of(statistics.begin(), statistics.end(),
                       [](const Statistic& s) { return s.passed; });
}

namespace {

constexpr double kPi = 3.14159265358979323846;

double laplace(double rate, RngStream& rng) {
  const double e = -std::log(rng.uniform()) / rate;
  return rng.uniform() < 0.5 ? -e : e;
}

double reciprocal_ig_scale(double norm, double lambda, double sigma, RngStream& rng) {
  if (norm < 1e-300) return sample_gamma(0.5, lambda * lambda / 2.0, rng);
  return 1.0 / sample_inverse_gaussian(lambda * sigma / norm, lambda * lambda, rng);
}

double total_variation(const Eigen::VectorXd& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i + 1 < b.size(); ++i) s += std::abs(b(i + 1) - b(i));
  return s;
}

Eigen::VectorXd normals(Eigen::Index k, RngStream& rng) {
  Eigen::VectorXd z(k);
  for (Eigen::Index i = 0; i < k; ++i) z(i) = rng.normal();
  return z;
}

Eigen::MatrixXd normal_matrix(Eigen::Index r, Eigen::Index c, RngStream& rng) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.normal();
  return m;
}

struct Moments {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

Moments column_moments(const Eigen::MatrixXd& g) {
  Moments m;
  m.mean = monte_carlo_mean(g);
  m.var = sample_cov(g).diagonal();
  return m;
}

void add_z(CheckResult& res, const std::string& prefix, const std::vector<std::string>& names,
           const Eigen::VectorXd& diff, const Eigen::VectorXd& se) {
  for (Eigen::Index j = 0; j < diff.size(); ++j) {
    Statistic s;
    s.name = prefix + names[j];
    s.value = se(j) > 0.0 ? diff(j) / se(j) : (diff(j) == 0.0 ? 0.0 : INFINITY);
    s.passed = std::abs(s.value) < res.threshold;
    res.statistics.push_back(s);
  }
}

}  // namespace

Dataset synthetic_dataset(int n, int p, std::uint64_t seed) {
  RngStream rng(seed, 0xDA7A);
  const Eigen::MatrixXd X = normal_matrix(n, p, rng);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  const double pattern[] = {1.0, -0.5, 0.0, 0.75, 0.0};
  for (int i = 0; i < p; ++i) beta(i) = pattern[i % 5];
  const Eigen::VectorXd y = X * beta + normals(n, rng);
  return Dataset(y, X);
}

// ---- joint simulation ------------------------------------------------------

JointDraw sample_joint(const ModelSpec& spec, const Eigen::MatrixXd& X, RngStream& rng) {
  const Hyperparameters& h = spec.hyper;
  require(h.alpha > 0.0 && h.xi > 0.0, ErrorCode::config_error,
          "joint simulation needs alpha > 0 and xi > 0 (proper sigma2 prior)");
  const Eigen::Index p = X.cols();
  const double sigma2 = sample_inverse_gamma(h.alpha, h.xi, rng);
  const double sigma = std::sqrt(sigma2);
  JointDraw out;
  Eigen::VectorXd beta(p);
  switch (spec.id) {
    case ModelId::bfl: {
      do {
        for (Eigen::Index i = 0; i < p; ++i) beta(i) = laplace(h.lambda1 / sigma, rng);
      } while (rng.uniform() >= std::exp(-h.lambda2 * total_variation(beta) / sigma));
      FusedState s;
      s.beta = beta;
      s.tau2.resize(p);
      s.w2.resize(p - 1);
      for (Eigen::Index i = 0; i < p; ++i)
        s.tau2(i) = reciprocal_ig_scale(std::abs(beta(i)), h.lambda1, sigma, rng);
      for (Eigen::Index i = 0; i + 1 < p; ++i)
        s.w2(i) = reciprocal_ig_scale(std::abs(beta(i + 1) - beta(i)), h.lambda2, sigma, rng);
      s.sigma2 = sigma2;
      out.state = s;
      break;
    }
    case ModelId::bgl: {
      const GroupStructure& g = spec.groups;
      GroupState s;
      s.tau2.resize(g.num_groups());
      for (int k = 0; k < g.num_groups(); ++k) {
        s.tau2(k) = sample_gamma((g.size(k) + 1) / 2.0, h.lambda1 * h.lambda1 / 2.0, rng);
        for (int j = 0; j < g.size(k); ++j)
          beta(g.start(k) + j) = sigma * std::sqrt(s.tau2(k)) * rng.normal();
      }
      s.beta = beta;
      s.sigma2 = sigma2;
      out.state = s;
      break;
    }
    case ModelId::bsgl: {
      const GroupStructure& g = spec.groups;
      auto group_norms = [&](const Eigen::VectorXd& b) {
        double t = 0.0;
        for (int k = 0; k < g.num_groups(); ++k) t += b.segment(g.start(k), g.size(k)).norm();
        return t;
      };
      do {
        for (Eigen::Index i = 0; i < p; ++i) beta(i) = laplace(h.lambda2 / sigma, rng);
      } while (rng.uniform() >= std::exp(-h.lambda1 * group_norms(beta) / sigma));
      SparseGroupState s;
      s.beta = beta;
      s.tau2.resize(g.num_groups());
      s.gamma2.resize(p);
      for (int k = 0; k < g.num_groups(); ++k)
        s.tau2(k) =
            reciprocal_ig_scale(beta.segment(g.start(k), g.size(k)).norm(), h.lambda1, sigma, rng);
      for (Eigen::Index i = 0; i < p; ++i)
        s.gamma2(i) = reciprocal_ig_scale(std::abs(beta(i)), h.lambda2, sigma, rng);
      s.sigma2 = sigma2;
      out.state = s;
      break;
    }
  }
  out.y = X * beta + sigma * normals(X.rows(), rng);
  return out;
}

std::vector<std::string> test_function_names() {
  return {"beta1", "beta1_sq", "sigma2", "log_sigma2", "tau2_1", "beta1_sigma2"};
}

Eigen::VectorXd test_functions(const ChainState& s) {
  return std::visit(
      [](const auto& st) {
        const double b = st.beta(0);
        const double s2 = st.sigma2.value();
        Eigen::VectorXd g(6);
        g << b, b * b, s2, std::log(s2), st.tau2(0), b * s2;
        return g;
      },
      s);
}

ModelSpec default_geweke_spec(ModelId model, int p) {
  ModelSpec spec;
  spec.id = model;
  spec.hyper = Hyperparameters{1.0, 1.0, 3.0, 2.0};
  if (model != ModelId::bfl) {
    std::vector<int> sizes;
    int left = p;
    while (left > 0) {
      const int m = std::min(2, left);
      sizes.push_back(m);
      left -= m;
    }
    spec.groups = GroupStructure(sizes);
  }
  return spec;
}

namespace {

void check_geweke_options(const GewekeOptions& opt) {
  require(opt.spec.hyper.alpha > 1.0 && opt.spec.hyper.xi > 0.0, ErrorCode::config_error,
          "joint-distribution tests need alpha > 1 and xi > 0 for finite prior moments of sigma2");
  require(opt.replicates >= 100 && opt.n >= 1 && opt.gibbs_substeps >= 1,
          ErrorCode::config_error, "invalid joint-distribution test options");
  opt.spec.hyper.validate(opt.spec.id);
}

Eigen::MatrixXd design_for(const GewekeOptions& opt, Eigen::Index p) {
  RngStream rng(opt.seed, 0xD5);
  return normal_matrix(opt.n, p, rng);
}

Eigen::Index spec_dimension(const ModelSpec& spec, int fallback_p) {
  return spec.id == ModelId::bfl ? fallback_p : spec.groups.total_size();
}

}  // namespace

CheckResult geweke_joint_test(const GewekeOptions& opt) {
  check_geweke_options(opt);
  const int p_default = 3;
  const Eigen::Index p = spec_dimension(opt.spec, p_default);
  const Eigen::MatrixXd X = design_for(opt, p);
  const long N = opt.replicates;
  const auto names = test_function_names();

  RngStream mc_rng(opt.seed, 1);
  Eigen::MatrixXd g_mc(N, 6);
  for (long r = 0; r < N; ++r)
    g_mc.row(r) = test_functions(sample_joint(opt.spec, X, mc_rng).state).transpose();

  RngStream sc_rng(opt.seed, 2);
  JointDraw cur = sample_joint(opt.spec, X, sc_rng);
  Dataset data(cur.y, X);
  ChainState state = cur.state;
  Eigen::MatrixXd g_sc(N, 6);
  for (long r = 0; r < N; ++r) {
    for (int k = 0; k < opt.gibbs_substeps; ++k)
      state = step(opt.spec, state, data, sc_rng, opt.kernel);
    const double sigma = std::sqrt(std::visit([](const auto& s) { return *s.sigma2; }, state));
    const Eigen::VectorXd& beta = std::visit([](const auto& s) -> const Eigen::VectorXd& { return s.beta; }, state);
    data = data.with_response(X * beta + sigma * normals(X.rows(), sc_rng));
    g_sc.row(r) = test_functions(state).transpose();
  }

  CheckResult res;
  res.name = "geweke-" + to_string(opt.spec.id);
  res.threshold = opt.threshold;
  const Moments mc = column_moments(g_mc);
  const Eigen::VectorXd sc_mean = monte_carlo_mean(g_sc);
  const Eigen::VectorXd sc_var = batch_means_cov(g_sc).diagonal();
  const Eigen::VectorXd se = (mc.var / N + sc_var / N).cwiseSqrt();
  add_z(res, "z_", names, mc.mean - sc_mean, se);
  res.settle();
  std::ostringstream d;
  d << "n=" << opt.n << " p=" << p << " replicates=" << N << " substeps=" << opt.gibbs_substeps
    << " mutation=" << to_string(opt.kernel.mutation);
  res.details = d.str();
  return res;
}

CheckResult one_step_stationarity_test(const GewekeOptions& opt) {
  check_geweke_options(opt);
  const Eigen::Index p = spec_dimension(opt.spec, 3);
  const Eigen::MatrixXd X = design_for(opt, p);
  const long N = opt.replicates;

  RngStream a_rng(opt.seed, 3);
  RngStream b_rng(opt.seed, 4);
  Eigen::MatrixXd g_step(N, 6), g_joint(N, 6);
  Dataset data(Eigen::VectorXd::Zero(X.rows()), X);
  for (long r = 0; r < N; ++r) {
    JointDraw j = sample_joint(opt.spec, X, a_rng);
    data = data.with_response(j.y);
    g_step.row(r) = test_functions(step(opt.spec, j.state, data, a_rng, opt.kernel)).transpose();
    g_joint.row(r) = test_functions(sample_joint(opt.spec, X, b_rng).state).transpose();
  }
  CheckResult res;
  res.name = "one-step-" + to_string(opt.spec.id);
  res.threshold = opt.threshold;
  const Moments a = column_moments(g_step);
  const Moments b = column_moments(g_joint);
  add_z(res, "z_", test_function_names(), a.mean - b.mean, ((a.var + b.var) / N).cwiseSqrt());
  res.settle();
  res.details = "replicates=" + std::to_string(N) + " mutation=" + to_string(opt.kernel.mutation);
  return res;
}

CheckResult update_order_check(const ModelSpec& spec, const KernelOptions& kernel,
                               std::uint64_t seed, int sweeps) {
  CheckResult res;
  res.name = "update-order-" + to_string(spec.id);
  res.threshold = 0.0;
  const Eigen::Index p = spec_dimension(spec, 3);
  RngStream rng(seed, 5);
  ModelSpec sim = spec;
  sim.hyper.alpha = std::max(sim.hyper.alpha, 3.0);
  sim.hyper.xi = std::max(sim.hyper.xi, 2.0);
  const Eigen::MatrixXd X = normal_matrix(6, p, rng);
  int bad[6] = {0, 0, 0, 0, 0, 0};
  for (int t = 0; t < sweeps; ++t) {
    JointDraw j = sample_joint(sim, X, rng);
    Dataset data(j.y, X);
    StepTrace trace;
    KernelOptions k = kernel;
    k.trace = &trace;
    const ChainState next = step(spec, j.state, data, rng, k);
    const Eigen::VectorXd& b0 = std::visit([](const auto& s) -> const Eigen::VectorXd& { return s.beta; }, j.state);
    const double s2 = std::visit([](const auto& s) { return *s.sigma2; }, next);
    bad[0] += trace.sigma2_beta != b0;
    bad[1] += trace.sigma2_scales != scales_of(j.state);
    bad[2] += trace.scales_beta != b0;
    bad[3] += trace.scales_sigma2 != s2;
    bad[4] += trace.beta_scales != scales_of(next);
    bad[5] += trace.beta_sigma2 != s2;
  }
  const char* names[6] = {"sigma2_uses_previous_beta", "sigma2_uses_previous_scales",
                          "scales_use_previous_beta", "scales_use_new_sigma2",
                          "beta_uses_new_scales",     "beta_uses_new_sigma2"};
  for (int i = 0; i < 6; ++i) res.statistics.push_back({names[i], double(bad[i]), bad[i] == 0});
  res.settle();
  res.details = "mismatching sweeps out of " + std::to_string(sweeps);
  return res;
}

// ---- prior checks ----------------------------------------------------------

double fused_prior_constant_p1(double lambda1) { return 2.0 / (lambda1 * lambda1); }

CheckResult fused_prior_propriety_check(const ProprietyOptions& opt) {
  require(opt.p >= 1 && opt.p <= 6, ErrorCode::config_error, "propriety check needs 1 <= p <= 6");
  require(opt.lambda1 > 0.0 && opt.lambda2 > 0.0 && opt.samples >= 100, ErrorCode::config_error,
          "invalid propriety-check options");
  RngStream rng(opt.seed, 6);
  const int p = opt.p;
  const double bound = std::pow(2.0, p / 2.0);
  double sum = 0.0, sumsq = 0.0, min_margin = INFINITY;
  long violations = 0;
  Eigen::VectorXd tau2(p), w2(p - 1);
  for (long s = 0; s < opt.samples; ++s) {
    for (int i = 0; i < p; ++i) tau2(i) = sample_gamma(1.0, opt.lambda1 * opt.lambda1 / 2.0, rng);
    for (int i = 0; i + 1 < p; ++i) w2(i) = sample_gamma(0.5, opt.lambda2 * opt.lambda2 / 2.0, rng);
    const double det_prec = build_fused_precision(tau2, w2).determinant();
    const double w = std::exp(-0.5 * std::log(det_prec) - 0.5 * tau2.array().log().sum());
    if (w > bound * (1.0 + 1e-12)) ++violations;
    min_margin = std::min(min_margin, bound - w);
    sum += w;
    sumsq += w * w;
  }
  const double N = static_cast<double>(opt.samples);
  const double mean = sum / N;
  const double var = std::max(0.0, (sumsq - N * mean * mean) / (N - 1.0));
  const double scale = std::pow(2.0 / (opt.lambda1 * opt.lambda1), p) *
                       std::pow(std::sqrt(2.0 * kPi) / opt.lambda2, p - 1);
  const double estimate = mean * scale;
  const double rel = std::sqrt(var / N) / mean;

  CheckResult res;
  res.name = "prior-propriety-p" + std::to_string(p);
  res.threshold = opt.max_relative_error;
  res.statistics.push_back({"normalizing_constant", estimate, std::isfinite(estimate) && estimate > 0});
  res.statistics.push_back({"relative_mc_error", rel, rel < opt.max_relative_error});
  res.statistics.push_back({"bound_violations", double(violations), violations == 0});
  res.statistics.push_back({"min_bound_margin", min_margin, min_margin >= -1e-12 * bound});
  if (p == 1) {
    const double exact = fused_prior_constant_p1(opt.lambda1);
    const double diff = std::abs(estimate - exact) / exact;
    res.statistics.push_back({"closed_form_relative_difference", diff,
                              diff <= std::max(3.0 * rel, 1e-12)});
  }
  res.settle();
  res.details = "samples=" + std::to_string(opt.samples);
  return res;
}

double laplace_log_ratio(const Eigen::VectorXd& b, const Eigen::VectorXd& b2, double lambda1,
                         double lambda2, double sigma2) {
  const double sigma = std::sqrt(sigma2);
  return -(lambda1 * (b.lpNorm<1>() - b2.lpNorm<1>()) +
           lambda2 * (total_variation(b) - total_variation(b2))) /
         sigma;
}

CheckResult fused_marginal_prior_check(const MarginalPriorOptions& opt) {
  require(opt.p >= 1 && opt.p <= 4, ErrorCode::config_error, "marginal prior check needs p <= 4");
  require(!opt.pairs.empty() && opt.samples >= 100, ErrorCode::config_error,
          "marginal prior check needs beta pairs and samples");
  const int p = opt.p;
  const std::size_t m = opt.pairs.size();
  for (const auto& pr : opt.pairs)
    require(pr.first.size() == p && pr.second.size() == p, ErrorCode::config_error,
            "beta pair dimension mismatch");
  RngStream rng(opt.seed, 7);
  // accumulators: a, b, a^2, b^2, ab per pair
  std::vector<std::array<double, 5>> acc(m, {0, 0, 0, 0, 0});
  Eigen::VectorXd tau2(p), w2(p - 1);
  for (long s = 0; s < opt.samples; ++s) {
    for (int i = 0; i < p; ++i) tau2(i) = sample_gamma(0.5, opt.lambda1 * opt.lambda1 / 2.0, rng);
    for (int i = 0; i + 1 < p; ++i) w2(i) = sample_gamma(0.5, opt.lambda2 * opt.lambda2 / 2.0, rng);
    const Eigen::MatrixXd P = build_fused_precision(tau2, w2).dense();
    for (std::size_t k = 0; k < m; ++k) {
      const auto& [b1, b2] = opt.pairs[k];
      const double a = std::exp(-b1.dot(P * b1) / (2.0 * opt.sigma2));
      const double b = std::exp(-b2.dot(P * b2) / (2.0 * opt.sigma2));
      auto& c = acc[k];
      c[0] += a;
      c[1] += b;
      c[2] += a * a;
      c[3] += b * b;
      c[4] += a * b;
    }
  }
  CheckResult res;
  res.name = "marginal-prior-p" + std::to_string(p);
  res.threshold = opt.threshold;
  const double N = static_cast<double>(opt.samples);
  for (std::size_t k = 0; k < m; ++k) {
    const auto& c = acc[k];
    const double ma = c[0] / N, mb = c[1] / N;
    const double va = (c[2] - N * ma * ma) / (N - 1.0);
    const double vb = (c[3] - N * mb * mb) / (N - 1.0);
    const double cab = (c[4] - N * ma * mb) / (N - 1.0);
    const double ratio = ma / mb;
    const double exact = std::exp(laplace_log_ratio(opt.pairs[k].first, opt.pairs[k].second,
                                                    opt.lambda1, opt.lambda2, opt.sigma2));
    const double rel_var = std::max(0.0, va / (ma * ma) + vb / (mb * mb) - 2.0 * cab / (ma * mb)) / N;
    const double se = ratio * std::sqrt(rel_var);
    Statistic st;
    st.name = "z_pair_" + std::to_string(k + 1);
    if (opt.pairs[k].first == opt.pairs[k].second)
      st.value = ratio == 1.0 ? 0.0 : INFINITY;
    else
      st.value = se > 0.0 ? (ratio - exact) / se : (ratio == exact ? 0.0 : INFINITY);
    st.passed = std::abs(st.value) <= opt.threshold;
    res.statistics.push_back(st);
  }
  res.settle();
  res.details = "samples=" + std::to_string(opt.samples) + " pairs=" + std::to_string(m);
  return res;
}

// ---- p = 1 posterior oracle ------------------------------------------------

namespace {

double log_normal_cdf(double x) {
  if (x > -20.0) return std::log(0.5 * std::erfc(-x / std::sqrt(2.0)));
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2) +
                        105.0 / (x2 * x2 * x2 * x2);
  return -0.5 * x2 - 0.5 * std::log(2.0 * kPi) - std::log(-x) + std::log(series);
}

double log_normal_pdf(double x) { return -0.5 * x * x - 0.5 * std::log(2.0 * kPi); }

double log_add(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

struct SliceValues {
  double log_density = 0.0;  // of u = log sigma2, unnormalized
  double beta_mean = 0.0;    // E[beta | sigma2, y]
  double beta_sq = 0.0;      // E[beta^2 | sigma2, y]
};

}  // namespace

PosteriorMoments posterior_oracle_1d(const Dataset& data, const Hyperparameters& h,
                                     double tolerance) {
  require(data.p() == 1, ErrorCode::invalid_parameter, "posterior oracle needs p = 1");
  require(h.lambda1 > 0.0 && h.alpha >= 0.0 && h.xi >= 0.0, ErrorCode::invalid_parameter,
          "invalid hyperparameters");
  const double a = data.xtx()(0, 0);
  const double b = data.xty()(0);
  const double yty = data.yty();
  const double n = static_cast<double>(data.n());
  const double lam = h.lambda1;
  require(a > 0.0, ErrorCode::invalid_parameter, "posterior oracle needs a non-zero column");
  require(n / 2.0 + h.alpha > 1.0, ErrorCode::invalid_parameter,
          "posterior mean of sigma2 needs n/2 + alpha > 1");

  auto slice = [&](double u) {
    const double s2 = std::exp(u);
    const double s = std::exp(0.5 * u);
    const double v = s / std::sqrt(a);
    const double mp = (b - lam * s) / a;
    const double mm = (b + lam * s) / a;
    const double lwp = a * mp * mp / (2.0 * s2) + log_normal_cdf(mp / v);
    const double lwm = a * mm * mm / (2.0 * s2) + log_normal_cdf(-mm / v);
    const double lse = log_add(lwp, lwm);
    SliceValues out;
    out.log_density = -(n / 2.0) * u + std::log(lam) - 0.5 * u - yty / (2.0 * s2) +
                      std::log(v * std::sqrt(2.0 * kPi)) + lse - (h.alpha + 1.0) * u - h.xi / s2 + u;
    const double wp = std::exp(lwp - lse);
    const double wm = std::exp(lwm - lse);
    const double rp = std::exp(log_normal_pdf(mp / v) - log_normal_cdf(mp / v));
    const double rm = std::exp(log_normal_pdf(mm / v) - log_normal_cdf(-mm / v));
    const double ep = mp + v * rp;
    const double em = mm - v * rm;
    const double e2p = mp * mp + v * v + mp * v * rp;
    const double e2m = mm * mm + v * v - mm * v * rm;
    out.beta_mean = wp * ep + wm * em;
    out.beta_sq = wp * e2p + wm * e2m;
    return out;
  };

  // locate the mass on a coarse grid around the data scale
  const double centre = std::log((yty + 2.0 * h.xi) / (n + 2.0 * h.alpha) + 1e-300);
  double best = -INFINITY, best_u = centre;
  for (double u = centre - 60.0; u <= centre + 60.0; u += 0.05) {
    const double l = slice(u).log_density;
    if (l > best) {
      best = l;
      best_u = u;
    }
  }
  require(std::isfinite(best), ErrorCode::quadrature_failure, "posterior density not finite");
  const double cut = best - 60.0;
  double lo = best_u, hi = best_u;
  while (slice(lo).log_density > cut && lo > best_u - 200.0) lo -= 0.25;
  while (slice(hi).log_density > cut && hi < best_u + 200.0) hi += 0.25;

  using boost::math::quadrature::gauss_kronrod;
  auto integrate = [&](auto g, double& err) {
    return gauss_kronrod<double, 61>::integrate(g, lo, hi, 20, tolerance, &err);
  };
  auto dens = [&](double u) { return std::exp(slice(u).log_density - best); };
  double e0, e1, e2, e3, e4;
  const double I0 = integrate(dens, e0);
  const double I1 = integrate([&](double u) { const auto s = slice(u); return std::exp(s.log_density - best) * s.beta_mean; }, e1);
  const double I2 = integrate([&](double u) { const auto s = slice(u); return std::exp(s.log_density - best) * s.beta_sq; }, e2);
  const double I3 = integrate([&](double u) { return dens(u) * std::exp(u); }, e3);
  const double I4 = integrate([&](double u) { return dens(u) * std::exp(2.0 * u); }, e4);
  require(I0 > 0.0 && std::isfinite(I0), ErrorCode::quadrature_failure,
          "posterior normalizing integral failed");

  PosteriorMoments m;
  m.beta_mean = I1 / I0;
  const double beta_sq = I2 / I0;
  m.beta_var = beta_sq - m.beta_mean * m.beta_mean;
  m.sigma2_mean = I3 / I0;
  m.sigma2_var = I4 / I0 - m.sigma2_mean * m.sigma2_mean;
  const double beta_scale = std::sqrt(std::max(beta_sq, 1e-300));
  m.relative_error = std::max({e0 / I0, e1 / (I0 * beta_scale), e2 / std::abs(I2), e3 / I3, e4 / I4});
  if (!(m.relative_error < 1e-4))
    fail(ErrorCode::quadrature_failure,
         "posterior quadrature error estimate " + std::to_string(m.relative_error) + " exceeds 1e-4");
  return m;
}

// ---- suites ----------------------------------------------------------------

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

bool is_known_suite(const std::string& s) {
  return s == "geweke" || s == "prior" || s == "drift" || s == "oracle" || s == "all";
}

namespace {

template <class F>
void record(SuiteReport& rep, const std::string& name, F&& run) {
  try {
    rep.checks.push_back(run());
  } catch (const Error& e) {
    CheckResult c;
    c.name = name;
    c.passed = false;
    c.details = std::string("raised ") + to_string(e.code()) + ": " + e.what();
    rep.checks.push_back(c);
  }
}

void geweke_suite(SuiteReport& rep, const SuiteOptions& opt) {
  for (ModelId id : {ModelId::bfl, ModelId::bgl, ModelId::bsgl}) {
    GewekeOptions g;
    g.spec = default_geweke_spec(id);
    g.seed = opt.seed + static_cast<std::uint64_t>(id);
    if (id == ModelId::bfl) g.kernel.mutation = opt.mutation;
    const std::string tag = to_string(id);
    record(rep, "geweke-" + tag, [&] { return geweke_joint_test(g); });
    g.replicates = 100000;
    record(rep, "one-step-" + tag, [&] { return one_step_stationarity_test(g); });
    record(rep, "update-order-" + tag, [&] { return update_order_check(g.spec, g.kernel, opt.seed); });
  }
}

void prior_suite(SuiteReport& rep, const SuiteOptions& opt) {
  for (int p : {1, 3}) {
    ProprietyOptions o;
    o.p = p;
    o.seed = opt.seed;
    rep.checks.push_back(fused_prior_propriety_check(o));
  }
  for (int p : {1, 2}) {
    MarginalPriorOptions o;
    o.p = p;
    o.seed = opt.seed;
    RngStream rng(opt.seed, 40 + p);
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd b1(p), b2(p);
      for (int i = 0; i < p; ++i) {
        b1(i) = 3.0 * rng.uniform() - 1.5;
        b2(i) = 3.0 * rng.uniform() - 1.5;
      }
      o.pairs.emplace_back(b1, b2);
    }
    rep.checks.push_back(fused_marginal_prior_check(o));
  }
}

std::vector<ChainState> random_states(const ModelSpec& spec, const Dataset& data, int count,
                                      RngStream& rng) {
  std::vector<ChainState> states;
  const Eigen::Index p = data.p();
  for (int c = 0; c < count; ++c) {
    ChainState s = zero_state(spec, p);
    std::visit(
        [&](auto& st) {
          using T = std::decay_t<decltype(st)>;
          for (Eigen::Index i = 0; i < p; ++i) st.beta(i) = 2.0 * rng.normal();
          for (Eigen::Index i = 0; i < st.tau2.size(); ++i) st.tau2(i) = std::exp(2.0 * rng.normal());
          if constexpr (std::is_same_v<T, FusedState>)
            for (Eigen::Index i = 0; i < st.w2.size(); ++i) st.w2(i) = std::exp(2.0 * rng.normal());
          if constexpr (std::is_same_v<T, SparseGroupState>)
            for (Eigen::Index i = 0; i < st.gamma2.size(); ++i)
              st.gamma2(i) = std::exp(2.0 * rng.normal());
        },
        s);
    states.push_back(std::move(s));
  }
  return states;
}

void drift_suite(SuiteReport& rep, const SuiteOptions& opt) {
  const Dataset data = synthetic_dataset(15, 4, opt.seed);
  for (ModelId id : {ModelId::bfl, ModelId::bgl, ModelId::bsgl}) {
    ModelSpec spec;
    spec.id = id;
    spec.hyper = Hyperparameters{1.0, 1.0, 1.0, 1.0};
    if (id != ModelId::bfl) spec.groups = GroupStructure({2, 2});
    RngStream rng(opt.seed, 60 + static_cast<int>(id));
    std::vector<ChainState> states = random_states(spec, data, 20, rng);
    states.push_back(default_start(spec, data));
    const EmpiricalDriftResult r = empirical_drift_check(spec, states, data, 2000, opt.seed, opt.threads);
    CheckResult c;
    c.name = "empirical-drift-" + to_string(id);
    c.threshold = 3.0;
    double worst = -INFINITY;
    for (const auto& row : r.rows) worst = std::max(worst, (row.mean_next - row.bound) / row.mc_se);
    c.statistics.push_back({"violations", double(r.violations()), r.violations() == 0});
    c.statistics.push_back({"max_excess_in_se", worst, worst <= 3.0});
    const DriftReport dr = drift_report(spec, data);
    c.statistics.push_back({"phi", dr.rate.phi, dr.rate.phi < 1.0});
    c.statistics.push_back({"epsilon_log", dr.minor.log_epsilon, std::isfinite(dr.minor.log_epsilon)});
    c.settle();
    c.details = "states=" + std::to_string(states.size()) + " replicates=2000";
    rep.checks.push_back(c);
  }
}

CheckResult oracle_check(const SuiteOptions& opt) {
  const Dataset data = synthetic_dataset(6, 1, opt.seed);
  ModelSpec spec;
  spec.id = ModelId::bfl;
  spec.hyper = Hyperparameters{1.0, 1.0, 2.0, 1.0};
  const PosteriorMoments pm = posterior_oracle_1d(data, spec.hyper);

  // one chain, kernel honouring any mutation
  ChainState s = default_start(spec, data);
  RngStream rng(opt.seed, 80);
  KernelOptions k;
  k.mutation = opt.mutation;
  const long iters = 100000, burn = 1000;
  Eigen::MatrixXd draws(iters, 2);
  for (long t = 0; t < burn + iters; ++t) {
    s = step(spec, s, data, rng, k);
    if (t >= burn) {
      const auto& f = std::get<FusedState>(s);
      draws(t - burn, 0) = f.beta(0);
      draws(t - burn, 1) = *f.sigma2;
    }
  }
  const Eigen::VectorXd mean = monte_carlo_mean(draws);
  const Eigen::VectorXd mcse = (batch_means_cov(draws).diagonal() / double(iters)).cwiseSqrt();
  CheckResult c;
  c.name = "posterior-oracle-bfl-p1";
  c.threshold = 3.0;
  const double zb = (mean(0) - pm.beta_mean) / mcse(0);
  const double zs = (mean(1) - pm.sigma2_mean) / mcse(1);
  c.statistics.push_back({"z_beta_mean", zb, std::abs(zb) <= 3.0});
  c.statistics.push_back({"z_sigma2_mean", zs, std::abs(zs) <= 3.0});
  c.statistics.push_back({"quadrature_relative_error", pm.relative_error, pm.relative_error < 1e-4});
  c.settle();
  c.details = "iterations=100000 burn_in=1000";
  return c;
}

}  // namespace

SuiteReport run_verification_suite(const std::string& suite, const SuiteOptions& opt) {
  require(is_known_suite(suite), ErrorCode::config_error, "unknown suite '" + suite + "'");
  SuiteReport rep;
  rep.suite = suite;
  rep.mutation = to_string(opt.mutation);
  const bool all = suite == "all";
  if (all || suite == "geweke") geweke_suite(rep, opt);
  if (all || suite == "prior") prior_suite(rep, opt);
  if (all || suite == "drift") drift_suite(rep, opt);
  if (all || suite == "oracle")
    record(rep, "posterior-oracle-bfl-p1", [&] { return oracle_check(opt); });
  return rep;
}

}  // namespace plg
