#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "plg/tridiagonal.hpp"

namespace plg {

enum class ModelId { bfl, bgl, bsgl };

std::string to_string(ModelId m);
ModelId parse_model_id(const std::string& s);

/// Observed response and model matrix, with the Gram quantities every
/// sampler and solver needs precomputed once.
class Dataset {
 public:
  Dataset(Eigen::VectorXd y, Eigen::MatrixXd X);

  /// Same design, different response. Reuses X'X.
  Dataset with_response(Eigen::VectorXd y) const;

  Eigen::Index n() const { return X_.rows(); }
  Eigen::Index p() const { return X_.cols(); }
  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::MatrixXd& X() const { return X_; }
  const Eigen::MatrixXd& xtx() const { return xtx_; }
  const Eigen::VectorXd& xty() const { return xty_; }
  double yty() const { return yty_; }

  double residual_sum_of_squares(const Eigen::VectorXd& beta) const;

 private:
  Dataset() = default;

  Eigen::VectorXd y_;
  Eigen::MatrixXd X_;
  Eigen::MatrixXd xtx_;
  Eigen::VectorXd xty_;
  double yty_ = 0.0;
};

/// Contiguous partition of the coefficients into K groups.
class GroupStructure {
 public:
  GroupStructure() = default;
  explicit GroupStructure(std::vector<int> sizes);

  /// K = p groups of size one.
  static GroupStructure singletons(int p);

  int num_groups() const { return static_cast<int>(sizes_.size()); }
  int total_size() const { return total_; }
  int max_size() const { return max_; }
  int size(int k) const { return sizes_[k]; }
  int start(int k) const { return starts_[k]; }
  const std::vector<int>& sizes() const { return sizes_; }
  bool empty() const { return sizes_.empty(); }

  /// Throws structure-error unless the sizes sum to p.
  void validate_against(Eigen::Index p) const;

 private:
  std::vector<int> sizes_;
  std::vector<int> starts_;
  int total_ = 0;
  int max_ = 0;
};

struct Hyperparameters {
  double lambda1 = 1.0;
  double lambda2 = 1.0;  // unused by the group lasso, which reads lambda1
  double alpha = 0.0;
  double xi = 0.0;

  void validate(ModelId model) const;
};

struct FusedState {
  Eigen::VectorXd beta;
  Eigen::VectorXd tau2;
  Eigen::VectorXd w2;
  std::optional<double> sigma2;  // absent in initial states; never read by the kernel
};

struct GroupState {
  Eigen::VectorXd beta;
  Eigen::VectorXd tau2;
  std::optional<double> sigma2;
};

struct SparseGroupState {
  Eigen::VectorXd beta;
  Eigen::VectorXd tau2;
  Eigen::VectorXd gamma2;  // one per coefficient, group-major order
  std::optional<double> sigma2;
};

using ChainState = std::variant<FusedState, GroupState, SparseGroupState>;

ModelId model_of(const ChainState& s);

/// Everything that fixes a posterior besides the data.
struct ModelSpec {
  ModelId id = ModelId::bfl;
  Hyperparameters hyper;
  GroupStructure groups;  // ignored by the fused lasso

  void validate(const Dataset& data) const;
};

void validate_state(const ModelSpec& spec, Eigen::Index p, const ChainState& s);

std::vector<std::string> state_labels(const ModelSpec& spec, Eigen::Index p);
Eigen::VectorXd flatten(const ChainState& s);
ChainState unflatten(const ModelSpec& spec, Eigen::Index p, const Eigen::VectorXd& row,
                     bool has_sigma2);

SymTridiagonal build_fused_precision(const Eigen::VectorXd& tau2, const Eigen::VectorXd& w2);
double fused_quadratic_form(const Eigen::VectorXd& beta, const Eigen::VectorXd& tau2,
                            const Eigen::VectorXd& w2);
SymTridiagonal build_group_precision(const Eigen::VectorXd& tau2, const GroupStructure& groups);
SymTridiagonal build_sparse_precision(const Eigen::VectorXd& tau2, const Eigen::VectorXd& gamma2,
                                      const GroupStructure& groups);

/// Prior precision of beta / sigma^2 for whichever model the state belongs to.
SymTridiagonal prior_precision(const ModelSpec& spec, const ChainState& s);

double group_norm_squared(const Eigen::VectorXd& beta, const GroupStructure& groups, int k);

}  // namespace plg
