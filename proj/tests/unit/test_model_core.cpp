#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "plg/error.hpp"
#include "plg/model.hpp"

using namespace plg;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::io_error;
}

Eigen::VectorXd positive(RngStream& r, Eigen::Index k) {
  Eigen::VectorXd v(k);
  for (Eigen::Index i = 0; i < k; ++i) v(i) = std::exp(2.0 * r.normal());
  return v;
}

}  // namespace

TEST_CASE("fused precision examples") {
  const auto p1 = build_fused_precision(Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd(0));
  CHECK(p1.dense()(0, 0) == doctest::Approx(0.5));

  Eigen::MatrixXd e2(2, 2);
  e2 << 2, -1, -1, 2;
  CHECK(build_fused_precision(Eigen::Vector2d(1, 1), Eigen::VectorXd::Ones(1)).dense() == e2);

  const auto p3 = build_fused_precision(Eigen::Vector3d(1, 2, 4), Eigen::Vector2d(1, 2));
  CHECK(p3.diag()(0) == 2.0);
  CHECK(p3.diag()(1) == 2.0);
  CHECK(p3.diag()(2) == 0.75);
  CHECK(p3.off()(0) == -1.0);
  CHECK(p3.off()(1) == -0.5);
}

TEST_CASE("fused precision rejects non-positive inputs") {
  CHECK(code_of([] { build_fused_precision(Eigen::Vector2d(1, 0), Eigen::VectorXd::Ones(1)); }) ==
        ErrorCode::invalid_parameter);
  CHECK(code_of([] { build_fused_precision(Eigen::Vector2d(1, 1), -Eigen::VectorXd::Ones(1)); }) ==
        ErrorCode::invalid_parameter);
  CHECK(code_of([] { fused_quadratic_form(Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1),
                                          Eigen::VectorXd::Zero(1)); }) ==
        ErrorCode::invalid_parameter);
}

TEST_CASE("fused quadratic form examples") {
  CHECK(fused_quadratic_form(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Ones(4),
                             Eigen::VectorXd::Ones(3)) == 0.0);
  CHECK(fused_quadratic_form(Eigen::Vector2d(1, -1), Eigen::Vector2d(1, 1),
                             Eigen::VectorXd::Ones(1)) == doctest::Approx(6.0));
}

TEST_CASE("fused quadratic form equals the matrix quadratic form") {
  RngStream r(31, 0);
  for (int k = 0; k < 100; ++k) {
    const int p = 1 + static_cast<int>(r.uniform() * 20);
    const Eigen::VectorXd tau2 = positive(r, p), w2 = positive(r, p - 1);
    Eigen::VectorXd b(p);
    for (int i = 0; i < p; ++i) b(i) = 3.0 * r.normal();
    const double ref = b.dot(oracle::fused_precision_from_terms(tau2, w2) * b);
    CHECK(std::abs(fused_quadratic_form(b, tau2, w2) - ref) <= 1e-10 * std::abs(ref));
  }
}

TEST_CASE("fused precision matches its term-by-term assembly and is SPD") {
  RngStream r(32, 0);
  for (int k = 0; k < 200; ++k) {
    const int p = 1 + static_cast<int>(r.uniform() * 12);
    const Eigen::VectorXd tau2 = positive(r, p), w2 = positive(r, p - 1);
    const auto P = build_fused_precision(tau2, w2);
    const Eigen::MatrixXd ref = oracle::fused_precision_from_terms(tau2, w2);
    CHECK((P.dense() - ref).cwiseAbs().maxCoeff() <= 1e-12 * ref.cwiseAbs().maxCoeff());
    Eigen::VectorXd ld, ls;
    CHECK(P.cholesky(ld, ls));
    for (int i = 0; i < p; ++i) {
      double offsum = 0.0;
      if (i > 0) offsum += std::abs(P.off()(i - 1));
      if (i + 1 < p) offsum += std::abs(P.off()(i));
      CHECK(P.diag()(i) > offsum);
    }
  }
}

TEST_CASE("determinant recurrence and the product lower bound") {
  RngStream r(33, 0);
  for (int k = 0; k < 200; ++k) {
    const int p = 1 + static_cast<int>(r.uniform() * 12);
    const Eigen::VectorXd tau2 = positive(r, p), w2 = positive(r, p - 1);
    const auto P = build_fused_precision(tau2, w2);
    const double det = P.determinant();
    const double lu = oracle::lu_determinant(P.dense());
    CHECK(std::abs(det - lu) <= 1e-9 * std::abs(lu));
    double bound = 1.0;
    for (int i = 0; i < p; ++i) bound *= 1.0 / (2.0 * tau2(i));
    CHECK(det >= bound);
    CHECK(P.log_determinant() == doctest::Approx(std::log(lu)).epsilon(1e-9));
  }
}

TEST_CASE("tridiagonal solve and inverse-covariance draw") {
  RngStream r(34, 0);
  const int p = 7;
  const auto P = build_fused_precision(positive(r, p), positive(r, p - 1));
  Eigen::VectorXd b(p), z(p);
  for (int i = 0; i < p; ++i) {
    b(i) = r.normal();
    z(i) = r.normal();
  }
  const Eigen::MatrixXd D = P.dense();
  CHECK((D * P.solve(b) - b).norm() < 1e-10 * b.norm());
  CHECK((P.multiply(b) - D * b).norm() < 1e-12 * (D * b).norm());
  // u = L^{-T} z  <=>  L^T u = z, with D = L L^T
  const Eigen::VectorXd u = P.sample_inverse_covariance(z);
  Eigen::LLT<Eigen::MatrixXd> llt(D);
  CHECK((Eigen::MatrixXd(llt.matrixU()) * u - z).norm() < 1e-10 * z.norm());
}

TEST_CASE("group precision examples") {
  const auto g1 = build_group_precision(Eigen::VectorXd::Constant(1, 4.0), GroupStructure({2}));
  CHECK(g1.diag() == Eigen::Vector2d(0.25, 0.25));
  CHECK(g1.off().isZero());
  const auto g2 = build_group_precision(Eigen::Vector2d(1, 2), GroupStructure({1, 2}));
  CHECK(g2.diag() == Eigen::Vector3d(1, 0.5, 0.5));
  const Eigen::Vector4d tau2(1, 2, 4, 8);
  const auto g3 = build_group_precision(tau2, GroupStructure::singletons(4));
  CHECK(g3.diag() == tau2.cwiseInverse());
}

TEST_CASE("group precision rejects a mismatched structure") {
  CHECK(code_of([] { build_group_precision(Eigen::Vector3d(1, 1, 1), GroupStructure({1, 2})); }) ==
        ErrorCode::structure_error);
  CHECK(code_of([] { GroupStructure({2, 0}); }) == ErrorCode::structure_error);
  CHECK(code_of([] { GroupStructure(std::vector<int>{}); }) == ErrorCode::structure_error);
  CHECK(code_of([] { GroupStructure({2, 2}).validate_against(5); }) == ErrorCode::structure_error);
}

TEST_CASE("sparse group precision examples") {
  const GroupStructure g({2, 3});
  const auto a = build_sparse_precision(Eigen::Vector2d(2, 2), Eigen::VectorXd::Constant(5, 2.0), g);
  CHECK(a.diag() == Eigen::VectorXd::Ones(5));
  const auto b = build_sparse_precision(Eigen::VectorXd::Ones(1), Eigen::Vector2d(1, 4),
                                        GroupStructure({2}));
  CHECK(b.diag() == Eigen::Vector2d(2, 1.25));
  const auto c = build_sparse_precision(Eigen::Vector2d(0.5, 3), Eigen::VectorXd::Constant(5, 1e12), g);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(c.diag()(i) - (i < 2 ? 2.0 : 1.0 / 3.0)) < 1e-9);
}

TEST_CASE("group structure bookkeeping") {
  const GroupStructure g({2, 3, 1});
  CHECK(g.num_groups() == 3);
  CHECK(g.total_size() == 6);
  CHECK(g.max_size() == 3);
  CHECK(g.start(2) == 5);
  CHECK(group_norm_squared(Eigen::VectorXd::LinSpaced(6, 1, 6), g, 1) == 9.0 + 16.0 + 25.0);
}

TEST_CASE("dataset validation") {
  CHECK(code_of([] { Dataset(Eigen::VectorXd::Ones(3), Eigen::MatrixXd::Ones(2, 2)); }) ==
        ErrorCode::invalid_parameter);
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(2, 2);
  X(1, 1) = NAN;
  CHECK(code_of([&] { Dataset(Eigen::VectorXd::Ones(2), X); }) == ErrorCode::invalid_parameter);
  const Dataset d(Eigen::Vector2d(1, 2), Eigen::MatrixXd::Identity(2, 2));
  CHECK(d.yty() == 5.0);
  CHECK(d.with_response(Eigen::Vector2d(3, 4)).xty() == Eigen::Vector2d(3, 4));
}

TEST_CASE("hyperparameter validation") {
  CHECK(code_of([] { Hyperparameters{0.0, 1.0, 1.0, 1.0}.validate(ModelId::bfl); }) ==
        ErrorCode::invalid_parameter);
  CHECK(code_of([] { Hyperparameters{1.0, 1.0, -1.0, 1.0}.validate(ModelId::bsgl); }) ==
        ErrorCode::invalid_parameter);
  Hyperparameters{1.0, 0.0, 0.0, 0.0}.validate(ModelId::bgl);  // lambda2 unused
  CHECK(code_of([] { Hyperparameters{1.0, 0.0, 0.0, 0.0}.validate(ModelId::bfl); }) ==
        ErrorCode::invalid_parameter);
}

TEST_CASE("state labels, flatten and unflatten") {
  ModelSpec spec;
  spec.id = ModelId::bsgl;
  spec.groups = GroupStructure({1, 2});
  const auto labels = state_labels(spec, 3);
  const std::vector<std::string> expect{"beta.1", "beta.2", "beta.3", "tau2.1", "tau2.2",
                                        "gamma2.1", "gamma2.2", "gamma2.3", "sigma2"};
  CHECK(labels == expect);
  SparseGroupState s{Eigen::Vector3d(1, -2, 3), Eigen::Vector2d(0.5, 2), Eigen::Vector3d(1, 2, 3),
                     1.5};
  const Eigen::VectorXd row = flatten(s);
  const auto back = std::get<SparseGroupState>(unflatten(spec, 3, row, true));
  CHECK(back.beta == s.beta);
  CHECK(back.gamma2 == s.gamma2);
  CHECK(*back.sigma2 == 1.5);
  CHECK(code_of([&] { unflatten(spec, 3, row.head(5), true); }) == ErrorCode::state_mismatch);

  ModelSpec fused;
  CHECK(state_labels(fused, 2) ==
        std::vector<std::string>{"beta.1", "beta.2", "tau2.1", "tau2.2", "w2.1", "sigma2"});
  FusedState f{Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 1), Eigen::VectorXd::Ones(1), std::nullopt};
  CHECK(std::isnan(flatten(f)(5)));
}

TEST_CASE("validate_state catches model and shape mismatches") {
  ModelSpec spec;
  spec.id = ModelId::bgl;
  spec.groups = GroupStructure({2});
  const GroupState ok{Eigen::Vector2d(1, 1), Eigen::VectorXd::Ones(1), std::nullopt};
  validate_state(spec, 2, ok);
  CHECK(code_of([&] {
          validate_state(spec, 2, FusedState{Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1),
                                             Eigen::VectorXd::Ones(1), std::nullopt});
        }) == ErrorCode::state_mismatch);
  CHECK(code_of([&] {
          validate_state(spec, 2, GroupState{Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1), 1.0});
        }) == ErrorCode::state_mismatch);
  CHECK(code_of([&] {
          validate_state(spec, 2, GroupState{Eigen::Vector2d(1, 1), Eigen::VectorXd::Zero(1), 1.0});
        }) == ErrorCode::invalid_parameter);
}

TEST_CASE("prior precision dispatches on the model") {
  ModelSpec spec;
  spec.id = ModelId::bfl;
  const FusedState f{Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1), Eigen::VectorXd::Ones(1), 1.0};
  CHECK(prior_precision(spec, f).off()(0) == -1.0);
}
