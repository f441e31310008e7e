#include "plg/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "plg/error.hpp"

namespace plg {

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t) {
  return v.unaryExpr([t](double x) { return soft_threshold(x, t); });
}

Eigen::VectorXd block_soft_threshold(const Eigen::VectorXd& v, double t) {
  const double norm = v.norm();
  if (norm <= t) return Eigen::VectorXd::Zero(v.size());
  return v * (1.0 - t / norm);
}

Eigen::VectorXd tv_prox(const Eigen::VectorXd& v, double lambda) {
  const Eigen::Index n = v.size();
  Eigen::VectorXd out(n);
  if (n == 0) return out;
  if (!(lambda > 0.0) || n == 1) return v;

  Eigen::Index k = 0, k0 = 0, kplus = 0, kminus = 0;
  double umin = lambda, umax = -lambda;
  double vmin = v(0) - lambda, vmax = v(0) + lambda;
  const double twolambda = 2.0 * lambda;
  const double minlambda = -lambda;
  for (;;) {
    while (k == n - 1) {
      if (umin < 0.0) {
        do out(k0++) = vmin;
        while (k0 <= kminus);
        k = kminus = k0;
        vmin = v(k);
        umin = lambda;
        umax = vmin + umin - vmax;
      } else if (umax > 0.0) {
        do out(k0++) = vmax;
        while (k0 <= kplus);
        k = kplus = k0;
        vmax = v(k);
        umax = minlambda;
        umin = vmax + umax - vmin;
      } else {
        vmin += umin / static_cast<double>(k - k0 + 1);
        do out(k0++) = vmin;
        while (k0 <= k);
        return out;
      }
    }
    if ((umin += v(k + 1) - vmin) < minlambda) {
      do out(k0++) = vmin;
      while (k0 <= kminus);
      k = kplus = kminus = k0;
      vmin = v(k);
      vmax = vmin + twolambda;
      umin = lambda;
      umax = minlambda;
    } else if ((umax += v(k + 1) - vmax) > lambda) {
      do out(k0++) = vmax;
      while (k0 <= kplus);
      k = kplus = kminus = k0;
      vmax = v(k);
      vmin = vmax - twolambda;
      umin = lambda;
      umax = minlambda;
    } else {
      ++k;
      if (umin >= lambda) {
        kminus = k;
        vmin += (umin - lambda) / static_cast<double>(kminus - k0 + 1);
        umin = lambda;
      }
      if (umax <= minlambda) {
        kplus = k;
        vmax += (umax + lambda) / static_cast<double>(kplus - k0 + 1);
        umax = minlambda;
      }
    }
  }
}

Eigen::VectorXd fused_prox(const Eigen::VectorXd& v, double t1, double t2) {
  return soft_threshold(tv_prox(v, t2), t1);
}

Eigen::VectorXd group_prox(const Eigen::VectorXd& v, const GroupStructure& groups, double t) {
  Eigen::VectorXd out(v.size());
  for (int k = 0; k < groups.num_groups(); ++k)
    out.segment(groups.start(k), groups.size(k)) =
        block_soft_threshold(v.segment(groups.start(k), groups.size(k)), t);
  return out;
}

Eigen::VectorXd sparse_group_prox(const Eigen::VectorXd& v, const GroupStructure& groups,
                                  double t1, double t2) {
  return group_prox(soft_threshold(v, t1), groups, t2);
}

namespace {

double smooth_loss(const Dataset& d, const Eigen::VectorXd& b) {
  return std::max(0.0, d.yty() - 2.0 * b.dot(d.xty()) + b.dot(d.xtx() * b));
}

double total_variation(const Eigen::VectorXd& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i + 1 < b.size(); ++i) s += std::abs(b(i + 1) - b(i));
  return s;
}

double group_norm_sum(const Eigen::VectorXd& b, const GroupStructure& g) {
  double s = 0.0;
  for (int k = 0; k < g.num_groups(); ++k) s += b.segment(g.start(k), g.size(k)).norm();
  return s;
}

// Monotone FISTA with backtracking on ||y - X b||^2 + penalty(b).
template <class Prox, class Penalty>
PenalizedSolution mfista(const Dataset& d, Prox prox, Penalty penalty, const SolverOptions& opt) {
  const Eigen::Index p = d.p();
  auto grad = [&](const Eigen::VectorXd& b) -> Eigen::VectorXd {
    return 2.0 * (d.xtx() * b - d.xty());
  };
  auto F = [&](const Eigen::VectorXd& b) { return smooth_loss(d, b) + penalty(b); };

  double L = std::max(2.0 * d.xtx().diagonal().maxCoeff(), 1e-12);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd yv = x;
  double t = 1.0;
  double Fx = F(x);

  PenalizedSolution sol;
  if (opt.record_objective) sol.objective_trace.push_back(Fx);
  for (long it = 1; it <= opt.max_iter; ++it) {
    const Eigen::VectorXd g = grad(yv);
    const double fy = smooth_loss(d, yv);
    Eigen::VectorXd z;
    for (int bt = 0; bt < 200; ++bt) {
      z = prox(Eigen::VectorXd(yv - g / L), 1.0 / L);
      const Eigen::VectorXd dz = z - yv;
      if (smooth_loss(d, z) <= fy + g.dot(dz) + 0.5 * L * dz.squaredNorm() + 1e-12 * (1.0 + fy))
        break;
      L *= 2.0;
    }
    const double Fz = F(z);
    const Eigen::VectorXd x_prev = x;
    const double F_prev = Fx;
    if (Fz <= Fx) {
      x = z;
      Fx = Fz;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    yv = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev);
    t = t_next;
    if (opt.record_objective) sol.objective_trace.push_back(Fx);

    const Eigen::VectorXd gm = L * (x - prox(Eigen::VectorXd(x - grad(x) / L), 1.0 / L));
    const double kkt = gm.lpNorm<Eigen::Infinity>();
    const double rel = std::abs(F_prev - Fx) / std::max(1.0, std::abs(Fx));
    sol.iterations = it;
    sol.kkt_residual = kkt;
    if (rel < opt.tol_objective && kkt <= opt.tol_kkt) {
      sol.converged = true;
      break;
    }
  }
  sol.beta_hat = x;
  sol.objective = Fx;
  return sol;
}

void check_lambda(double v, const char* name, bool allow_zero) {
  require(std::isfinite(v) && (allow_zero ? v >= 0.0 : v > 0.0), ErrorCode::invalid_parameter,
          std::string(name) + (allow_zero ? " must be >= 0" : " must be > 0"));
}

}  // namespace

double fused_lasso_objective(const Dataset& data, const Eigen::VectorXd& beta, double lambda1,
                             double lambda2) {
  return data.residual_sum_of_squares(beta) + lambda1 * beta.lpNorm<1>() +
         lambda2 * total_variation(beta);
}

double group_lasso_objective(const Dataset& data, const GroupStructure& groups,
                             const Eigen::VectorXd& beta, double lambda) {
  return data.residual_sum_of_squares(beta) + lambda * group_norm_sum(beta, groups);
}

double sparse_group_lasso_objective(const Dataset& data, const GroupStructure& groups,
                                    const Eigen::VectorXd& beta, double lambda1, double lambda2) {
  return data.residual_sum_of_squares(beta) + lambda1 * beta.lpNorm<1>() +
         lambda2 * group_norm_sum(beta, groups);
}

PenalizedSolution fused_lasso_solve(const Dataset& data, double lambda1, double lambda2,
                                    const SolverOptions& opt) {
  check_lambda(lambda1, "lambda1", true);
  check_lambda(lambda2, "lambda2", true);
  auto prox = [&](const Eigen::VectorXd& v, double s) {
    return fused_prox(v, s * lambda1, s * lambda2);
  };
  auto pen = [&](const Eigen::VectorXd& b) {
    return lambda1 * b.lpNorm<1>() + lambda2 * total_variation(b);
  };
  PenalizedSolution sol = mfista(data, prox, pen, opt);
  sol.objective = fused_lasso_objective(data, sol.beta_hat, lambda1, lambda2);
  return sol;
}

PenalizedSolution group_lasso_solve(const Dataset& data, const GroupStructure& groups,
                                    double lambda, const SolverOptions& opt) {
  groups.validate_against(data.p());
  check_lambda(lambda, "lambda", true);
  auto prox = [&](const Eigen::VectorXd& v, double s) { return group_prox(v, groups, s * lambda); };
  auto pen = [&](const Eigen::VectorXd& b) { return lambda * group_norm_sum(b, groups); };
  PenalizedSolution sol = mfista(data, prox, pen, opt);
  sol.objective = group_lasso_objective(data, groups, sol.beta_hat, lambda);
  return sol;
}

PenalizedSolution sparse_group_lasso_solve(const Dataset& data, const GroupStructure& groups,
                                           double lambda1, double lambda2,
                                           const SolverOptions& opt) {
  groups.validate_against(data.p());
  check_lambda(lambda1, "lambda1", true);
  check_lambda(lambda2, "lambda2", true);
  auto prox = [&](const Eigen::VectorXd& v, double s) {
    return sparse_group_prox(v, groups, s * lambda1, s * lambda2);
  };
  auto pen = [&](const Eigen::VectorXd& b) {
    return lambda1 * b.lpNorm<1>() + lambda2 * group_norm_sum(b, groups);
  };
  PenalizedSolution sol = mfista(data, prox, pen, opt);
  sol.objective = sparse_group_lasso_objective(data, groups, sol.beta_hat, lambda1, lambda2);
  return sol;
}

namespace {

double floored(double v) { return std::max(v, kScaleFloor); }

}  // namespace

FusedState fused_start_from_beta(const Eigen::VectorXd& beta, const Hyperparameters& h) {
  const Eigen::Index p = beta.size();
  FusedState s;
  s.beta = beta;
  s.tau2.resize(p);
  s.w2.resize(p > 0 ? p - 1 : 0);
  for (Eigen::Index i = 0; i < p; ++i) s.tau2(i) = floored(2.0 * std::abs(beta(i)) / h.lambda1);
  for (Eigen::Index i = 0; i + 1 < p; ++i)
    s.w2(i) = floored(2.0 * std::abs(beta(i + 1) - beta(i)) / h.lambda2);
  return s;
}

GroupState group_start_from_beta(const Eigen::VectorXd& beta, const GroupStructure& groups,
                                 const Hyperparameters& h) {
  GroupState s;
  s.beta = beta;
  s.tau2.resize(groups.num_groups());
  for (int k = 0; k < groups.num_groups(); ++k)
    s.tau2(k) = floored(2.0 * beta.segment(groups.start(k), groups.size(k)).norm() / h.lambda1);
  return s;
}

SparseGroupState sparse_group_start_from_beta(const Eigen::VectorXd& beta,
                                              const GroupStructure& groups,
                                              const Hyperparameters& h) {
  SparseGroupState s;
  s.beta = beta;
  s.tau2.resize(groups.num_groups());
  s.gamma2.resize(beta.size());
  for (int k = 0; k < groups.num_groups(); ++k)
    s.tau2(k) = floored(2.0 * beta.segment(groups.start(k), groups.size(k)).norm() / h.lambda1);
  for (Eigen::Index i = 0; i < beta.size(); ++i)
    s.gamma2(i) = floored(2.0 * std::abs(beta(i)) / h.lambda2);
  return s;
}

FusedState default_start_bfl(const Dataset& data, const Hyperparameters& h,
                             const SolverOptions& opt) {
  h.validate(ModelId::bfl);
  return fused_start_from_beta(fused_lasso_solve(data, h.lambda1, h.lambda2, opt).beta_hat, h);
}

GroupState default_start_bgl(const Dataset& data, const GroupStructure& groups,
                             const Hyperparameters& h, const SolverOptions& opt) {
  h.validate(ModelId::bgl);
  return group_start_from_beta(group_lasso_solve(data, groups, h.lambda1, opt).beta_hat, groups,
                               h);
}

SparseGroupState default_start_bsgl(const Dataset& data, const GroupStructure& groups,
                                    const Hyperparameters& h, const SolverOptions& opt) {
  h.validate(ModelId::bsgl);
  const auto sol = sparse_group_lasso_solve(data, groups, h.lambda2, h.lambda1, opt);
  return sparse_group_start_from_beta(sol.beta_hat, groups, h);
}

ChainState default_start(const ModelSpec& spec, const Dataset& data, const SolverOptions& opt) {
  spec.validate(data);
  switch (spec.id) {
    case ModelId::bfl: return default_start_bfl(data, spec.hyper, opt);
    case ModelId::bgl: return default_start_bgl(data, spec.groups, spec.hyper, opt);
    case ModelId::bsgl: return default_start_bsgl(data, spec.groups, spec.hyper, opt);
  }
  fail(ErrorCode::config_error, "unknown model");
}

}  // namespace plg
