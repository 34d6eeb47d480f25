#include "sketchy/cgal.hpp"
#include "sketchy/dense_io.hpp"
#include "sketchy/maxcut.hpp"
#include "sketchy/problem.hpp"
#include "support/instances.hpp"

#include <doctest.h>

#include <cmath>

using namespace sketchy;
using namespace testsupport;

namespace {

DenseSDP<double> identity_constraint(Index n) {
  DenseSDP<double> dense;
  dense.C = MatrixXd::Identity(n, n);
  dense.A = {MatrixXd::Identity(n, n)};
  dense.b = VectorXd::Ones(1);
  return dense;
}

}  // namespace

TEST_CASE("build_dense_problem: norm of the identity constraint") {
  auto p = build_dense_problem(identity_constraint(2));
  CHECK(p.norm_A == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("build_dense_problem: diagonal map has unit norm") {
  const Index n = 5;
  DenseSDP<double> dense;
  dense.C = MatrixXd::Identity(n, n);
  for (Index i = 0; i < n; ++i) {
    MatrixXd A = MatrixXd::Zero(n, n);
    A(i, i) = 1;
    dense.A.push_back(A);
  }
  dense.b = VectorXd::Ones(n);
  auto p = build_dense_problem(dense);
  CHECK(p.norm_A == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("build_dense_problem: rank-one map of the identity") {
  auto p = build_dense_problem(identity_constraint(2));
  VectorXd u(2);
  u << 1, 2;
  CHECK(p.apply_map_rank_one(u)(0) == 5.0);
}

TEST_CASE("build_dense_problem: callbacks agree with dense algebra") {
  auto dense = random_dense_sdp(6, 4, TraceMode::equals, 3);
  auto p = build_dense_problem(dense);
  GaussianStream rng(11);
  const VectorXd u = rng.vector<double>(6);
  const VectorXd z = rng.vector<double>(4);
  CHECK((p.apply_C(u) - dense.C * u).norm() <= 1e-12 * (dense.C * u).norm());
  CHECK((p.apply_adjoint(u, z) - dense.adjoint(z) * u).norm() <= 1e-12 * (dense.adjoint(z) * u).norm());
  const MatrixXd uu = u * u.transpose();
  CHECK((p.apply_map_rank_one(u) - dense.map(uu)).norm() <= 1e-12 * dense.map(uu).norm());
}

TEST_CASE("build_dense_problem: rejects asymmetric and mismatched data") {
  auto dense = identity_constraint(3);
  dense.C(0, 1) = 1;
  CHECK_THROWS_AS(build_dense_problem(dense), std::invalid_argument);
  dense = identity_constraint(3);
  dense.A.push_back(MatrixXd::Identity(2, 2));
  dense.b = VectorXd::Ones(2);
  CHECK_THROWS_AS(build_dense_problem(dense), std::invalid_argument);
  dense = identity_constraint(3);
  dense.b = VectorXd::Ones(2);
  CHECK_THROWS_AS(build_dense_problem(dense), std::invalid_argument);
}

TEST_CASE("property: adjoint identity holds on random dense instances") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto p = build_dense_problem(random_dense_sdp(7, 5, TraceMode::equals, seed));
    GaussianStream rng(seed + 100);
    CHECK(adjoint_consistency_error(p, rng, 10) <= 1e-10);
  }
}

TEST_CASE("property: apply_C is linear") {
  auto p = build_dense_problem(random_dense_sdp(8, 3, TraceMode::equals, 5));
  GaussianStream rng(7);
  for (int k = 0; k < 20; ++k) {
    const VectorXd u = rng.vector<double>(8);
    const VectorXd w = rng.vector<double>(8);
    const double a = rng.next();
    const double c = rng.next();
    const VectorXd lhs = p.apply_C(a * u + c * w);
    const VectorXd rhs = a * p.apply_C(u) + c * p.apply_C(w);
    CHECK((lhs - rhs).norm() <= 1e-10 * std::max(1.0, rhs.norm()));
  }
}

TEST_CASE("property: norm_A bounds the rank-one map") {
  auto dense = random_dense_sdp(6, 4, TraceMode::equals, 9);
  auto p = build_dense_problem(dense);
  GaussianStream rng(1);
  for (int k = 0; k < 1000; ++k) {
    const VectorXd u = rng.vector<double>(6);
    const double uu_fro = u.squaredNorm();
    CHECK(p.apply_map_rank_one(u).norm() <= p.norm_A * uu_fro * (1 + 1e-12));
  }
}

TEST_CASE("OperatorSDP::validate rejects bad metadata") {
  auto p = build_dense_problem(identity_constraint(2));
  auto q = p;
  q.trace_set.alpha = 0;
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
  q = p;
  q.norm_A = 0;
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
  q = p;
  q.apply_C = nullptr;
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
  q = p;
  q.cone = {ConeKind::l2_ball, -1.0};
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}

TEST_CASE("scale_problem: MaxCut single edge") {
  const Graph g = path_graph(2);
  auto p = maxcut_problem(g);
  auto scaled = scale_problem(p, p.constraint_fro_norms);
  CHECK(scaled.scaling.s_C == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(scaled.scaling.s_constraint(0) == 1.0);
  CHECK(scaled.scaling.s_constraint(1) == 1.0);
  CHECK(scaled.scaling.s_map == 1.0);
  CHECK(scaled.scaling.s_alpha == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("scale_problem: already scaled instance is left alone") {
  DenseSDP<double> dense;
  const Index n = 3;
  dense.C = MatrixXd::Identity(n, n) / std::sqrt(3.0);
  for (Index i = 0; i < n; ++i) {
    MatrixXd A = MatrixXd::Zero(n, n);
    A(i, i) = 1;
    dense.A.push_back(A);
  }
  dense.b = VectorXd::Constant(n, 1.0 / 3);
  auto p = build_dense_problem(dense);
  auto scaled = scale_problem(p, p.constraint_fro_norms);
  CHECK(scaled.scaling.s_C == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(scaled.scaling.s_map == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(scaled.scaling.s_alpha == 1.0);
  CHECK((scaled.scaling.s_constraint.array() == 1.0).all());
  CHECK((scaled.problem.b - dense.b).norm() <= 1e-15);
}

TEST_CASE("scale_problem: right-hand side follows the row scaling") {
  // Diagonal map with ||A_i||_F = 2: s_i = 1/2 and the equalized map has norm 1.
  DenseSDP<double> dense;
  const Index n = 4;
  dense.C = MatrixXd::Identity(n, n);
  for (Index i = 0; i < n; ++i) {
    MatrixXd A = MatrixXd::Zero(n, n);
    A(i, i) = 2;
    dense.A.push_back(A);
  }
  dense.b = VectorXd::Ones(n);
  auto p = build_dense_problem(dense);
  auto scaled = scale_problem(p, p.constraint_fro_norms);
  CHECK(scaled.scaling.s_map == doctest::Approx(1.0).epsilon(1e-15));
  CHECK((scaled.scaling.s_constraint.array() == 0.5).all());
  CHECK((scaled.problem.b - VectorXd::Constant(n, 0.5)).norm() <= 1e-15);
}

TEST_CASE("scale_problem: scaled callbacks match an independently scaled dense copy") {
  for (auto mode : {TraceMode::equals, TraceMode::at_most}) {
    auto dense = random_dense_sdp(6, 4, mode, 21);
    auto scaled = scale_problem(build_dense_problem(dense), dense.fro_norms());
    const auto oracle = scaled_dense(dense);
    const auto& q = scaled.problem;
    GaussianStream rng(4);
    const VectorXd u = rng.vector<double>(6);
    const VectorXd z = rng.vector<double>(4);
    CHECK((q.apply_C(u) - oracle.C * u).norm() <= 1e-12 * (oracle.C * u).norm());
    CHECK((q.apply_adjoint(u, z) - oracle.adjoint(z) * u).norm() <= 1e-12 * (oracle.adjoint(z) * u).norm());
    CHECK((q.apply_map_rank_one(u) - oracle.map(u * u.transpose())).norm() <= 1e-12 * u.squaredNorm());
    CHECK((q.b - oracle.b).norm() <= 1e-12 * oracle.b.norm());
    CHECK(q.alpha() == 1.0);
    CHECK(dense_map_norm(oracle) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(oracle.C.norm() == doctest::Approx(1.0).epsilon(1e-12));
    // Every scaled constraint has the same Frobenius norm.
    const VectorXd f = oracle.fro_norms();
    CHECK((f.array() - f(0)).abs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("scale_problem: errors") {
  auto p = build_dense_problem(identity_constraint(2));
  CHECK_THROWS_AS(scale_problem(p, VectorXd(VectorXd::Zero(1))), std::invalid_argument);
  CHECK_THROWS_AS(scale_problem(p, VectorXd(VectorXd::Ones(2))), std::invalid_argument);
  auto q = p;
  q.norm_C_frobenius = 0;
  CHECK_THROWS_AS(scale_problem(q, VectorXd(VectorXd::Ones(1))), std::invalid_argument);
  // Unequal norms without a row-scaled norm oracle cannot be normalized.
  auto dense = random_dense_sdp(4, 3, TraceMode::equals, 1);
  auto r = build_dense_problem(dense);
  r.row_scaled_norm = nullptr;
  CHECK_THROWS_AS(scale_problem(r, dense.fro_norms()), std::invalid_argument);
}

TEST_CASE("unscale_metrics: identity and arithmetic") {
  auto id = ScalingRecord<double>::identity(3);
  VectorXd v(3);
  v << 1, -2, 3;
  auto m = unscale_metrics(id, 2.5, v);
  CHECK(m.objective == 2.5);
  CHECK(m.infeasibility == v);

  ScalingRecord<double> rec = ScalingRecord<double>::identity(1);
  rec.s_C = 0.5;
  rec.s_alpha = 0.5;
  CHECK(unscale_metrics(rec, 1.0, VectorXd(VectorXd::Zero(1))).objective == 4.0);
}

TEST_CASE("property: scale then unscale reproduces objective and residual") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto dense = random_dense_sdp(5, 3, TraceMode::equals, seed);
    auto scaled = scale_problem(build_dense_problem(dense), dense.fro_norms());
    const auto oracle = scaled_dense(dense);
    GaussianStream rng(seed);
    const MatrixXd X = dense.trace_set.alpha * random_psd(5, 5, rng);
    const MatrixXd Xs = X * scaled.scaling.s_alpha;
    const double obj_scaled = oracle.C.cwiseProduct(Xs).sum();
    const VectorXd res_scaled = oracle.map(Xs) - oracle.b;
    auto m = unscale_metrics(scaled.scaling, obj_scaled, res_scaled);
    const double obj = dense.C.cwiseProduct(X).sum();
    CHECK(std::abs(m.objective - obj) <= 1e-12 * std::max(1.0, std::abs(obj)));
    const VectorXd res = dense.map(X) - dense.b;
    CHECK((m.infeasibility - res).norm() <= 1e-12 * std::max(1.0, res.norm()));
  }
}

TEST_CASE("unscale_dual: scaled dual certificate maps to the original one") {
  // If Z' = C' + A'^* y' then Z'/s_C = C + A^*(unscale_dual(y')).
  auto dense = random_dense_sdp(5, 3, TraceMode::equals, 8);
  auto scaled = scale_problem(build_dense_problem(dense), dense.fro_norms());
  const auto oracle = scaled_dense(dense);
  GaussianStream rng(2);
  const VectorXd ys = rng.vector<double>(3);
  const MatrixXd lhs = (oracle.C + oracle.adjoint(ys)) / scaled.scaling.s_C;
  const MatrixXd rhs = dense.C + dense.adjoint(unscale_dual(scaled.scaling, ys));
  CHECK((lhs - rhs).norm() <= 1e-12 * lhs.norm());
}

TEST_CASE("scale_problem: l2 ball keeps its shape") {
  auto dense = random_dense_sdp(5, 3, TraceMode::equals, 2);
  dense.cone = {ConeKind::l2_ball, 0.3};
  auto scaled = scale_problem(build_dense_problem(dense), dense.fro_norms());
  CHECK((scaled.scaling.s_constraint.array() == 1.0).all());
  const auto oracle = scaled_dense(dense);
  CHECK(scaled.problem.cone.radius == doctest::Approx(oracle.cone.radius).epsilon(1e-12));
}

TEST_CASE("property: scaling preserves the minimizer") {
  // Long dense CGAL runs on the original and on the scaled 5x5 instance reach
  // the same objective after mapping X' -> X' / s_alpha.
  auto dense = random_dense_sdp(5, 2, TraceMode::equals, 4);
  auto scaled = scale_problem(build_dense_problem(dense), dense.fro_norms());
  const auto oracle = scaled_dense(dense);
  CgalOptions<double> opts;
  opts.eig = EigenMode::exact;
  auto r1 = cgal_solve(dense, 20000, opts, {}, false);
  auto r2 = cgal_solve(oracle, 20000, opts, {}, false);
  const double obj1 = dense.C.cwiseProduct(r1.X).sum();
  const double obj2 = dense.C.cwiseProduct(r2.X / scaled.scaling.s_alpha).sum();
  CHECK(std::abs(obj1 - obj2) <= 1e-3 * (1 + std::abs(obj1)));
}

TEST_CASE("dense JSON round trip") {
  auto dense = random_dense_sdp(3, 2, TraceMode::at_most, 6);
  dense.cone = {ConeKind::l2_ball, 0.25};
  const std::string text = dense_problem_to_json(dense);
  const auto back = parse_dense_problem(text);
  CHECK(back.n() == 3);
  CHECK(back.d() == 2);
  CHECK(back.trace_set.mode == TraceMode::at_most);
  CHECK(back.trace_set.alpha == dense.trace_set.alpha);
  CHECK(back.cone.kind == ConeKind::l2_ball);
  CHECK(back.cone.radius == 0.25);
  CHECK(back.C == dense.C);
  CHECK(back.A[1] == dense.A[1]);
  CHECK(back.b == dense.b);
}

TEST_CASE("dense JSON errors") {
  CHECK_THROWS_AS(parse_dense_problem("{"), std::invalid_argument);
  CHECK_THROWS_AS(parse_dense_problem(R"({"n":2})"), std::invalid_argument);
  const std::string bad_mode =
      R"({"n":1,"d":1,"alpha":1,"trace_mode":"sometimes","C":[[1]],"A":[[[1]]],"b":[1],"cone":{"type":"singleton"}})";
  CHECK_THROWS_AS(parse_dense_problem(bad_mode), std::invalid_argument);
  const std::string bad_shape =
      R"({"n":2,"d":1,"alpha":1,"trace_mode":"equals","C":[[1]],"A":[[[1]]],"b":[1],"cone":{"type":"singleton"}})";
  CHECK_THROWS_AS(parse_dense_problem(bad_shape), std::invalid_argument);
  const std::string asym =
      R"({"n":2,"d":1,"alpha":1,"trace_mode":"equals","C":[[1,2],[0,1]],"A":[[[1,0],[0,1]]],"b":[1],"cone":{"type":"singleton"}})";
  CHECK_THROWS_AS(parse_dense_problem(asym), std::invalid_argument);
  CHECK_THROWS(load_dense_problem("/nonexistent/problem.json"));
}
