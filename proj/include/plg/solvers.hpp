#pragma once

#include <vector>

#include <Eigen/Dense>

#include "plg/model.hpp"

namespace plg {

struct SolverOptions {
  double tol_objective = 1e-8;  // relative change between iterates
  double tol_kkt = 1e-6;        // sup-norm of the gradient mapping
  long max_iter = 50000;
  bool record_objective = false;
};

struct PenalizedSolution {
  Eigen::VectorXd beta_hat;
  double objective = 0.0;
  long iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
  std::vector<double> objective_trace;  // filled when record_objective is set
};

/// Floor applied to zero starting scales so the start lies in the state space.
inline constexpr double kScaleFloor = 1e-8;

double soft_threshold(double v, double t);
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t);
/// v * max(0, 1 - t/||v||).
Eigen::VectorXd block_soft_threshold(const Eigen::VectorXd& v, double t);
/// argmin_x 0.5||x - v||^2 + t sum |x_{i+1} - x_i| (Condat's direct algorithm).
Eigen::VectorXd tv_prox(const Eigen::VectorXd& v, double t);

Eigen::VectorXd fused_prox(const Eigen::VectorXd& v, double t1, double t2);
Eigen::VectorXd group_prox(const Eigen::VectorXd& v, const GroupStructure& groups, double t);
Eigen::VectorXd sparse_group_prox(const Eigen::VectorXd& v, const GroupStructure& groups,
                                  double t1, double t2);

double fused_lasso_objective(const Dataset& data, const Eigen::VectorXd& beta, double lambda1,
                             double lambda2);
double group_lasso_objective(const Dataset& data, const GroupStructure& groups,
                             const Eigen::VectorXd& beta, double lambda);
/// ||y - X b||^2 + lambda1 ||b||_1 + lambda2 sum_k ||b_{G_k}||.
double sparse_group_lasso_objective(const Dataset& data, const GroupStructure& groups,
                                    const Eigen::VectorXd& beta, double lambda1, double lambda2);

PenalizedSolution fused_lasso_solve(const Dataset& data, double lambda1, double lambda2,
                                    const SolverOptions& opt = {});
PenalizedSolution group_lasso_solve(const Dataset& data, const GroupStructure& groups,
                                    double lambda, const SolverOptions& opt = {});
PenalizedSolution sparse_group_lasso_solve(const Dataset& data, const GroupStructure& groups,
                                           double lambda1, double lambda2,
                                           const SolverOptions& opt = {});

/// Scale components minimizing the drift function for a fixed beta.
FusedState fused_start_from_beta(const Eigen::VectorXd& beta, const Hyperparameters& hyper);
GroupState group_start_from_beta(const Eigen::VectorXd& beta, const GroupStructure& groups,
                                 const Hyperparameters& hyper);
SparseGroupState sparse_group_start_from_beta(const Eigen::VectorXd& beta,
                                              const GroupStructure& groups,
                                              const Hyperparameters& hyper);

FusedState default_start_bfl(const Dataset& data, const Hyperparameters& hyper,
                             const SolverOptions& opt = {});
GroupState default_start_bgl(const Dataset& data, const GroupStructure& groups,
                             const Hyperparameters& hyper, const SolverOptions& opt = {});
SparseGroupState default_start_bsgl(const Dataset& data, const GroupStructure& groups,
                                    const Hyperparameters& hyper, const SolverOptions& opt = {});

ChainState default_start(const ModelSpec& spec, const Dataset& data, const SolverOptions& opt = {});

}  // namespace plg
