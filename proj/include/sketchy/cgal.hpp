#pragma once

// Dense-state CGAL. Stores the n x n iterate explicitly, so it is only meant
// for small instances and as the reference trajectory for SketchyCGAL.

#include "sketchy/cgal_rules.hpp"
#include "sketchy/lanczos.hpp"
#include "sketchy/problem.hpp"

#include <Eigen/Eigenvalues>

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace sketchy {

// oracle: the caller supplies (xi, v) for each dense gradient D_t, e.g. to
// replay the directions of another solver.
enum class EigenMode { exact, lanczos, oracle };

template <typename Scalar>
struct EigenPair {
  Scalar xi;
  Vector<Scalar> v;
};

template <typename Scalar>
struct CgalOptions {
  Scalar beta0 = 1;
  Scalar K = std::numeric_limits<Scalar>::infinity();
  EigenMode eig = EigenMode::lanczos;
  std::uint64_t seed = 0;  // Lanczos draws from seed + 1, matching SketchyCGAL
  Index dense_cap = 2000;
  LanczosOptions lanczos;
  std::function<EigenPair<Scalar>(const Matrix<Scalar>& D, Index t)> oracle;
};

template <typename Scalar>
struct CgalState {
  Index t = 1;
  Matrix<Scalar> X;
  Vector<Scalar> y;
  Scalar norm_A = 1;
  GaussianStream lanczos_rng;
};

// Quantities of iteration t. Objective, infeasibility and bounds refer to the
// iterate X_t before the update; gamma is the dual step taken at t.
template <typename Scalar>
struct CgalIterationRecord {
  Index t;
  Scalar objective;
  Scalar infeasibility;  // ||A X_t - b|| (distance to K for general cones)
  Scalar xi;
  Scalar surrogate_gap;
  Scalar gap_bound;
  Scalar gamma;
  Index q;
};

template <typename Scalar>
CgalState<Scalar> cgal_init(const DenseSDP<Scalar>& dense, const CgalOptions<Scalar>& opts) {
  dense.validate();
  if (dense.n() > opts.dense_cap)
    throw std::invalid_argument("cgal: n = " + std::to_string(dense.n()) + " exceeds the dense cap of " +
                                std::to_string(opts.dense_cap));
  CgalState<Scalar> state;
  state.X = Matrix<Scalar>::Zero(dense.n(), dense.n());
  state.y = Vector<Scalar>::Zero(dense.d());
  state.norm_A = dense_map_norm(dense);
  state.lanczos_rng = GaussianStream(opts.seed + 1);
  return state;
}

template <typename Scalar>
CgalIterationRecord<Scalar> cgal_step(CgalState<Scalar>& state, const DenseSDP<Scalar>& dense,
                                      const CgalOptions<Scalar>& opts) {
  using VectorType = Vector<Scalar>;
  using MatrixType = Matrix<Scalar>;
  const Index t = state.t;
  const Index n = dense.n();
  const Scalar alpha = dense.trace_set.alpha;
  const Scalar beta = smoothing_parameter(opts.beta0, t);
  const Scalar eta = primal_step_size<Scalar>(t);

  const VectorType z = dense.map(state.X);
  const VectorType w = project_cone(dense.cone, dense.b, VectorType(z + state.y / beta));
  const MatrixType D = dense.C + dense.adjoint(state.y + beta * (z - w));

  CgalIterationRecord<Scalar> rec{};
  rec.t = t;
  rec.objective = dense.C.cwiseProduct(state.X).sum();
  rec.infeasibility = cone_distance(dense.cone, dense.b, z);

  VectorType v;
  if (opts.eig == EigenMode::exact) {
    Eigen::SelfAdjointEigenSolver<MatrixType> es(D);
    rec.xi = es.eigenvalues()(0);
    v = es.eigenvectors().col(0);
    rec.q = n;
  } else if (opts.eig == EigenMode::oracle) {
    if (!opts.oracle) throw std::invalid_argument("cgal: oracle mode needs an oracle callback");
    EigenPair<Scalar> pair = opts.oracle(D, t);
    if (pair.v.size() != n) throw std::invalid_argument("cgal: oracle returned a vector of wrong length");
    rec.xi = pair.xi;
    v = std::move(pair.v);
    rec.q = 0;
  } else {
    rec.q = lanczos_schedule(t, n);
    auto matvec = [&D](const VectorType& u) -> VectorType { return D * u; };
    auto res = approx_min_evec<Scalar>(matvec, n, rec.q, state.lanczos_rng, opts.lanczos);
    rec.xi = res.xi;
    v = std::move(res.v);
  }
  const Scalar s = lin_min_scale(dense.trace_set, rec.xi);
  rec.surrogate_gap = rec.objective + (state.y + beta * (z - w)).dot(z) - s * rec.xi;
  rec.gap_bound = posterior_bound(rec.objective, state.y, z, w, beta, s * rec.xi);

  state.X = (Scalar(1) - eta) * state.X;
  if (s != 0) state.X.noalias() += (eta * s) * v * v.transpose();

  const VectorType z_next = dense.map(state.X);
  const Scalar beta_next = smoothing_parameter(opts.beta0, t + 1);
  const VectorType w_bar = project_cone(dense.cone, dense.b, VectorType(z_next + state.y / beta_next));
  rec.gamma = dual_step_size(z_next, w_bar, t, opts.beta0, alpha, state.norm_A, state.y, opts.K);
  state.y += rec.gamma * (z_next - w_bar);
  ++state.t;
  return rec;
}

template <typename Scalar>
struct CgalResult {
  Matrix<Scalar> X;
  Vector<Scalar> y;
  Index iterations;
  std::vector<CgalIterationRecord<Scalar>> history;
};

// Runs T iterations. The observer, if given, sees every iteration record;
// `history` keeps every record when keep_history is set.
template <typename Scalar>
CgalResult<Scalar> cgal_solve(const DenseSDP<Scalar>& dense, Index T, const CgalOptions<Scalar>& opts,
                              const std::function<void(const CgalIterationRecord<Scalar>&)>& observer = {},
                              bool keep_history = true) {
  if (T < 1) throw std::invalid_argument("cgal_solve: T must be >= 1");
  CgalState<Scalar> state = cgal_init(dense, opts);
  CgalResult<Scalar> result;
  for (Index k = 0; k < T; ++k) {
    auto rec = cgal_step(state, dense, opts);
    if (observer) observer(rec);
    if (keep_history) result.history.push_back(rec);
  }
  result.X = std::move(state.X);
  result.y = std::move(state.y);
  result.iterations = T;
  return result;
}

}  // namespace sketchy
