#include "plg/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "plg/error.hpp"

namespace plg {

std::string to_string(ModelId m) {
  switch (m) {
    case ModelId::bfl: return "bfl";
    case ModelId::bgl: return "bgl";
    case ModelId::bsgl: return "bsgl";
  }
  return "?";
}

ModelId parse_model_id(const std::string& s) {
  if (s == "bfl") return ModelId::bfl;
  if (s == "bgl") return ModelId::bgl;
  if (s == "bsgl") return ModelId::bsgl;
  fail(ErrorCode::config_error, "unknown model '" + s + "' (expected bfl, bgl or bsgl)");
}

Dataset::Dataset(Eigen::VectorXd y, Eigen::MatrixXd X) : y_(std::move(y)), X_(std::move(X)) {
  require(X_.rows() >= 1 && X_.cols() >= 1, ErrorCode::invalid_parameter,
          "dataset needs n >= 1 and p >= 1");
  require(X_.rows() == y_.size(), ErrorCode::invalid_parameter,
          "row count of X must equal the length of y");
  require(y_.allFinite() && X_.allFinite(), ErrorCode::invalid_parameter,
          "dataset entries must be finite");
  xtx_ = X_.transpose() * X_;
  xty_ = X_.transpose() * y_;
  yty_ = y_.squaredNorm();
}

Dataset Dataset::with_response(Eigen::VectorXd y) const {
  require(y.size() == n(), ErrorCode::invalid_parameter, "response length mismatch");
  require(y.allFinite(), ErrorCode::invalid_parameter, "response must be finite");
  Dataset d;
  d.X_ = X_;
  d.xtx_ = xtx_;
  d.y_ = std::move(y);
  d.xty_ = X_.transpose() * d.y_;
  d.yty_ = d.y_.squaredNorm();
  return d;
}

double Dataset::residual_sum_of_squares(const Eigen::VectorXd& beta) const {
  return (y_ - X_ * beta).squaredNorm();
}

GroupStructure::GroupStructure(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  require(!sizes_.empty(), ErrorCode::structure_error, "group structure needs K >= 1");
  starts_.reserve(sizes_.size());
  for (int m : sizes_) {
    require(m >= 1, ErrorCode::structure_error, "group sizes must be positive");
    starts_.push_back(total_);
    total_ += m;
    max_ = std::max(max_, m);
  }
}

GroupStructure GroupStructure::singletons(int p) { return GroupStructure(std::vector<int>(p, 1)); }

void GroupStructure::validate_against(Eigen::Index p) const {
  require(!sizes_.empty(), ErrorCode::structure_error, "group structure is empty");
  require(total_ == p, ErrorCode::structure_error,
          "group sizes sum to " + std::to_string(total_) + " but p = " + std::to_string(p));
}

void Hyperparameters::validate(ModelId model) const {
  auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
  require(pos(lambda1), ErrorCode::invalid_parameter, "lambda1 must be positive and finite");
  if (model != ModelId::bgl)
    require(pos(lambda2), ErrorCode::invalid_parameter, "lambda2 must be positive and finite");
  require(std::isfinite(alpha) && alpha >= 0.0, ErrorCode::invalid_parameter, "alpha must be >= 0");
  require(std::isfinite(xi) && xi >= 0.0, ErrorCode::invalid_parameter, "xi must be >= 0");
}

ModelId model_of(const ChainState& s) {
  switch (s.index()) {
    case 0: return ModelId::bfl;
    case 1: return ModelId::bgl;
    default: return ModelId::bsgl;
  }
}

void ModelSpec::validate(const Dataset& data) const {
  hyper.validate(id);
  if (id != ModelId::bfl) groups.validate_against(data.p());
}

namespace {

void check_positive(const Eigen::VectorXd& v, const char* name) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    require(std::isfinite(v(i)) && v(i) > 0.0, ErrorCode::invalid_parameter,
            std::string(name) + " entries must be positive and finite");
}

}  // namespace

void validate_state(const ModelSpec& spec, Eigen::Index p, const ChainState& s) {
  require(model_of(s) == spec.id, ErrorCode::state_mismatch,
          "state belongs to model " + to_string(model_of(s)) + ", expected " + to_string(spec.id));
  auto check_sigma = [](const std::optional<double>& s2) {
    if (s2) require(std::isfinite(*s2) && *s2 > 0.0, ErrorCode::invalid_parameter, "sigma2 must be positive");
  };
  std::visit(
      [&](const auto& st) {
        using T = std::decay_t<decltype(st)>;
        require(st.beta.size() == p && st.beta.allFinite(), ErrorCode::state_mismatch,
                "beta must be a finite vector of length p");
        check_positive(st.tau2, "tau2");
        check_sigma(st.sigma2);
        if constexpr (std::is_same_v<T, FusedState>) {
          require(st.tau2.size() == p, ErrorCode::state_mismatch, "tau2 must have length p");
          require(st.w2.size() == p - 1, ErrorCode::state_mismatch, "w2 must have length p - 1");
          check_positive(st.w2, "w2");
        } else {
          require(st.tau2.size() == spec.groups.num_groups(), ErrorCode::state_mismatch,
                  "tau2 must have length K");
          if constexpr (std::is_same_v<T, SparseGroupState>) {
            require(st.gamma2.size() == p, ErrorCode::state_mismatch, "gamma2 must have length p");
            check_positive(st.gamma2, "gamma2");
          }
        }
      },
      s);
}

std::vector<std::string> state_labels(const ModelSpec& spec, Eigen::Index p) {
  std::vector<std::string> labels;
  auto add = [&](const std::string& stem, Eigen::Index count) {
    for (Eigen::Index i = 1; i <= count; ++i) labels.push_back(stem + "." + std::to_string(i));
  };
  add("beta", p);
  switch (spec.id) {
    case ModelId::bfl:
      add("tau2", p);
      add("w2", p - 1);
      break;
    case ModelId::bgl:
      add("tau2", spec.groups.num_groups());
      break;
    case ModelId::bsgl:
      add("tau2", spec.groups.num_groups());
      add("gamma2", p);
      break;
  }
  labels.push_back("sigma2");
  return labels;
}

Eigen::VectorXd flatten(const ChainState& s) {
  return std::visit(
      [](const auto& st) {
        using T = std::decay_t<decltype(st)>;
        Eigen::Index len = st.beta.size() + st.tau2.size() + 1;
        if constexpr (std::is_same_v<T, FusedState>) len += st.w2.size();
        if constexpr (std::is_same_v<T, SparseGroupState>) len += st.gamma2.size();
        Eigen::VectorXd row(len);
        Eigen::Index at = 0;
        auto put = [&](const Eigen::VectorXd& v) {
          row.segment(at, v.size()) = v;
          at += v.size();
        };
        put(st.beta);
        put(st.tau2);
        if constexpr (std::is_same_v<T, FusedState>) put(st.w2);
        if constexpr (std::is_same_v<T, SparseGroupState>) put(st.gamma2);
        row(at) = st.sigma2.value_or(std::numeric_limits<double>::quiet_NaN());
        return row;
      },
      s);
}

ChainState unflatten(const ModelSpec& spec, Eigen::Index p, const Eigen::VectorXd& row,
                     bool has_sigma2) {
  const auto labels = state_labels(spec, p);
  const Eigen::Index expect = static_cast<Eigen::Index>(labels.size()) - (has_sigma2 ? 0 : 1);
  require(row.size() == expect, ErrorCode::state_mismatch,
          "state row has " + std::to_string(row.size()) + " values, expected " + std::to_string(expect));
  Eigen::Index at = 0;
  auto take = [&](Eigen::Index len) {
    Eigen::VectorXd v = row.segment(at, len);
    at += len;
    return v;
  };
  std::optional<double> sigma2;
  ChainState out;
  const int K = spec.groups.num_groups();
  switch (spec.id) {
    case ModelId::bfl: {
      FusedState s;
      s.beta = take(p);
      s.tau2 = take(p);
      s.w2 = take(p - 1);
      out = s;
      break;
    }
    case ModelId::bgl: {
      GroupState s;
      s.beta = take(p);
      s.tau2 = take(K);
      out = s;
      break;
    }
    case ModelId::bsgl: {
      SparseGroupState s;
      s.beta = take(p);
      s.tau2 = take(K);
      s.gamma2 = take(p);
      out = s;
      break;
    }
  }
  if (has_sigma2) std::visit([&](auto& st) { st.sigma2 = row(at); }, out);
  validate_state(spec, p, out);
  return out;
}

SymTridiagonal build_fused_precision(const Eigen::VectorXd& tau2, const Eigen::VectorXd& w2) {
  const Eigen::Index p = tau2.size();
  require(p >= 1, ErrorCode::invalid_parameter, "tau2 must be non-empty");
  require(w2.size() == p - 1, ErrorCode::invalid_parameter, "w2 must have length p - 1");
  check_positive(tau2, "tau2");
  check_positive(w2, "w2");
  Eigen::VectorXd diag = tau2.cwiseInverse();
  Eigen::VectorXd off(p - 1);
  for (Eigen::Index i = 0; i + 1 < p; ++i) {
    const double inv = 1.0 / w2(i);
    diag(i) += inv;
    diag(i + 1) += inv;
    off(i) = -inv;
  }
  return SymTridiagonal(std::move(diag), std::move(off));
}

double fused_quadratic_form(const Eigen::VectorXd& beta, const Eigen::VectorXd& tau2,
                            const Eigen::VectorXd& w2) {
  const Eigen::Index p = tau2.size();
  require(beta.size() == p && w2.size() == p - 1, ErrorCode::invalid_parameter,
          "fused_quadratic_form: dimension mismatch");
  check_positive(tau2, "tau2");
  check_positive(w2, "w2");
  double q = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) q += beta(i) * beta(i) / tau2(i);
  for (Eigen::Index i = 0; i + 1 < p; ++i) {
    const double d = beta(i + 1) - beta(i);
    q += d * d / w2(i);
  }
  return q;
}

SymTridiagonal build_group_precision(const Eigen::VectorXd& tau2, const GroupStructure& groups) {
  require(!groups.empty(), ErrorCode::structure_error, "group structure is empty");
  require(tau2.size() == groups.num_groups(), ErrorCode::structure_error,
          "tau2 length must equal the number of groups");
  check_positive(tau2, "tau2");
  Eigen::VectorXd diag(groups.total_size());
  for (int k = 0; k < groups.num_groups(); ++k)
    diag.segment(groups.start(k), groups.size(k)).setConstant(1.0 / tau2(k));
  return SymTridiagonal::diagonal(std::move(diag));
}

SymTridiagonal build_sparse_precision(const Eigen::VectorXd& tau2, const Eigen::VectorXd& gamma2,
                                      const GroupStructure& groups) {
  require(!groups.empty(), ErrorCode::structure_error, "group structure is empty");
  require(tau2.size() == groups.num_groups(), ErrorCode::structure_error,
          "tau2 length must equal the number of groups");
  require(gamma2.size() == groups.total_size(), ErrorCode::structure_error,
          "gamma2 length must equal p");
  check_positive(tau2, "tau2");
  check_positive(gamma2, "gamma2");
  Eigen::VectorXd diag = gamma2.cwiseInverse();
  for (int k = 0; k < groups.num_groups(); ++k)
    diag.segment(groups.start(k), groups.size(k)).array() += 1.0 / tau2(k);
  return SymTridiagonal::diagonal(std::move(diag));
}

SymTridiagonal prior_precision(const ModelSpec& spec, const ChainState& s) {
  return std::visit(
      [&](const auto& st) -> SymTridiagonal {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, FusedState>) return build_fused_precision(st.tau2, st.w2);
        else if constexpr (std::is_same_v<T, GroupState>) return build_group_precision(st.tau2, spec.groups);
        else return build_sparse_precision(st.tau2, st.gamma2, spec.groups);
      },
      s);
}

double group_norm_squared(const Eigen::VectorXd& beta, const GroupStructure& groups, int k) {
  return beta.segment(groups.start(k), groups.size(k)).squaredNorm();
}

}  // namespace plg
