#pragma once

// SketchyCGAL: the CGAL iteration with the matrix variable replaced by its
// image z = A(X), the objective value p = <C, X>, and a Nystrom sketch of X.
// Storage is O(d + R n) on top of what the problem callbacks hold.

#include "sketchy/cgal_rules.hpp"
#include "sketchy/diagnostics.hpp"
#include "sketchy/lanczos.hpp"
#include "sketchy/nystrom.hpp"
#include "sketchy/problem.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sketchy {

template <typename Scalar>
struct SolverParams {
  Scalar beta0 = 1;
  Scalar K = std::numeric_limits<Scalar>::infinity();
  Index R = 10;
  // The sketch draws from `seed`, Lanczos from `seed + 1`, and the optional
  // high-accuracy gap solves from `seed + 2`.
  std::uint64_t seed = 0;
  Scalar tol = Scalar(0.1);
  LanczosOptions lanczos;
};

struct SolverCounters {
  std::int64_t matvecs = 0;          // gradient matvecs inside Lanczos
  std::int64_t rank_one_maps = 0;    // calls of u -> A(u u^*)
  std::int64_t objective_matvecs = 0;  // calls of u -> C u outside Lanczos
};

template <typename Scalar>
struct SolverState {
  Index t = 1;
  Vector<Scalar> z;
  Vector<Scalar> y;
  Scalar p = 0;
  NystromSketch<Scalar> sketch;
  GaussianStream lanczos_rng;
  SolverParams<Scalar> params;
  Scalar last_xi = std::numeric_limits<Scalar>::quiet_NaN();
  SolverCounters counters;
};

// Output of the eigenvector oracle at iteration t.
template <typename Scalar>
struct Direction {
  Scalar xi;
  Vector<Scalar> v;
  Scalar scale;  // H = scale * v v^*
  Index q;
  Scalar beta;
};

template <typename Scalar>
SolverState<Scalar> solver_init(const OperatorSDP<Scalar>& p, Index R, const SolverParams<Scalar>& params = {}) {
  p.validate();
  if (R < 1 || R > p.n)
    throw std::invalid_argument("solver_init: sketch size R must satisfy 1 <= R <= n (got R = " +
                                std::to_string(R) + ")");
  if (!(params.beta0 > 0)) throw std::invalid_argument("solver_init: beta0 must be > 0");
  if (!(params.K > 0)) throw std::invalid_argument("solver_init: dual bound K must be > 0");
  SolverState<Scalar> state{1,
                            Vector<Scalar>::Zero(p.d),
                            Vector<Scalar>::Zero(p.d),
                            Scalar(0),
                            NystromSketch<Scalar>(p.n, R, params.seed),
                            GaussianStream(params.seed + 1),
                            params,
                            std::numeric_limits<Scalar>::quiet_NaN(),
                            {}};
  state.params.R = R;
  return state;
}

namespace detail {

template <typename Scalar>
Vector<Scalar> slack_point(const OperatorSDP<Scalar>& p, const Vector<Scalar>& z, const Vector<Scalar>& y,
                           Scalar beta) {
  if (p.cone.kind == ConeKind::singleton) return p.b;
  return project_cone(p.cone, p.b, Vector<Scalar>(z + y / beta));
}

}  // namespace detail

// Approximate minimum eigenvector of D_t = C + A^*(y + beta (z - w)).
template <typename Scalar>
Direction<Scalar> compute_direction(SolverState<Scalar>& state, const OperatorSDP<Scalar>& p,
                                    Index q_override = 0, GaussianStream* rng = nullptr) {
  using VectorType = Vector<Scalar>;
  const Scalar beta = smoothing_parameter(state.params.beta0, state.t);
  const VectorType w = detail::slack_point(p, state.z, state.y, beta);
  const VectorType coeff = state.y + beta * (state.z - w);
  const Index q = q_override > 0 ? q_override : lanczos_schedule(state.t, p.n);

  std::int64_t calls = 0;
  auto matvec = [&](const VectorType& u) -> VectorType {
    ++calls;
    return p.apply_C(u) + p.apply_adjoint(u, coeff);
  };
  auto res = approx_min_evec<Scalar>(matvec, p.n, q, rng != nullptr ? *rng : state.lanczos_rng,
                                     state.params.lanczos);
  state.counters.matvecs += calls;

  Direction<Scalar> dir{res.xi, std::move(res.v), lin_min_scale(p.trace_set, res.xi), q, beta};
  if (rng == nullptr) state.last_xi = dir.xi;
  return dir;
}

// Primal update with the atom s v v^*, then the dual step. Returns gamma.
template <typename Scalar>
Scalar apply_update(SolverState<Scalar>& state, const OperatorSDP<Scalar>& p, const Direction<Scalar>& dir) {
  using VectorType = Vector<Scalar>;
  const Index t = state.t;
  const Scalar eta = primal_step_size<Scalar>(t);
  const Scalar s = dir.scale;

  if (s != 0) {
    const VectorType h = p.apply_map_rank_one(dir.v);
    const VectorType cv = p.apply_C(dir.v);
    ++state.counters.rank_one_maps;
    ++state.counters.objective_matvecs;
    state.z = (Scalar(1) - eta) * state.z + (eta * s) * h;
    state.p = (Scalar(1) - eta) * state.p + eta * s * dir.v.dot(cv);
    state.sketch.rank_one_update(std::sqrt(s) * dir.v, eta);
  } else {
    state.z *= (Scalar(1) - eta);
    state.p *= (Scalar(1) - eta);
    state.sketch.rank_one_update(VectorType::Zero(p.n), eta);
  }

  const Scalar beta_next = smoothing_parameter(state.params.beta0, t + 1);
  const VectorType w_bar = detail::slack_point(p, state.z, state.y, beta_next);
  const Scalar gamma =
      dual_step_size(state.z, w_bar, t, state.params.beta0, p.alpha(), p.norm_A, state.y, state.params.K);
  state.y += gamma * (state.z - w_bar);
  ++state.t;
  return gamma;
}

template <typename Scalar>
struct StepRecord {
  Scalar xi;
  Scalar scale;
  Scalar gamma;
  Index q;
};

template <typename Scalar>
StepRecord<Scalar> solver_step(SolverState<Scalar>& state, const OperatorSDP<Scalar>& p) {
  const Direction<Scalar> dir = compute_direction(state, p);
  const Scalar gamma = apply_update(state, p, dir);
  return {dir.xi, dir.scale, gamma, dir.q};
}

// Posterior bound on <C, X_t> - <C, X_*> given an estimate of lambda_min(D_t).
template <typename Scalar>
Scalar suboptimality_bound(const SolverState<Scalar>& state, const OperatorSDP<Scalar>& p, Scalar xi_accurate) {
  const Scalar beta = smoothing_parameter(state.params.beta0, state.t);
  const Vector<Scalar> w = detail::slack_point(p, state.z, state.y, beta);
  return posterior_bound(state.p, state.y, state.z, w, beta, lin_min_scale(p.trace_set, xi_accurate) * xi_accurate);
}

template <typename Scalar>
struct StoppingMetrics {
  Scalar relative_gap;
  Scalar relative_infeasibility;
};

template <typename Scalar>
StoppingMetrics<Scalar> stopping_metrics(const SolverState<Scalar>& state, const OperatorSDP<Scalar>& p,
                                         Scalar xi) {
  return {suboptimality_bound(state, p, xi) / (1 + std::abs(state.p)),
          cone_distance(p.cone, p.b, state.z) / (1 + p.b.norm())};
}

// Uses the inexact xi of the current iteration (state.last_xi), which must
// have been computed for the current t by compute_direction.
template <typename Scalar>
bool stopping_check(const SolverState<Scalar>& state, const OperatorSDP<Scalar>& p, Scalar eps) {
  if (!(eps > 0)) throw std::invalid_argument("stopping_check: eps must be > 0");
  if (std::isnan(state.last_xi)) return false;
  const auto m = stopping_metrics(state, p, state.last_xi);
  return m.relative_gap <= eps && m.relative_infeasibility <= eps;
}

enum class StopReason { tolerance, max_iters };

inline const char* to_string(StopReason r) { return r == StopReason::tolerance ? "tolerance" : "max_iters"; }

template <typename Scalar>
struct SolveOptions {
  Index max_iters = 1000;
  Scalar tol = Scalar(0.1);
  bool trace_correction = false;
  bool scale = true;
  Scalar beta0 = 1;
  Scalar K = std::numeric_limits<Scalar>::infinity();
  std::uint64_t seed = 0;
  LanczosOptions lanczos;
  // Re-solve the eigenproblem with q = 4 q_t every N iterations for the
  // logged gap (0 disables).
  Index exact_gap_every = 0;
  // Objective used for obj_residual_rel in the trace; without it the column
  // carries the relative gap bound.
  std::optional<Scalar> reference_objective;
  // Write wall_ms = 0 so traces are byte-reproducible.
  bool record_wall_clock = true;
  std::function<void(const TraceRow&)> on_iteration;
};

// Everything in original units unless noted.
template <typename Scalar>
struct SolveReport {
  Reconstruction<Scalar> reconstruction;
  Scalar objective = 0;
  Scalar infeasibility_abs = 0;
  Scalar infeasibility_rel = 0;
  Scalar gap_bound = 0;
  StoppingMetrics<Scalar> stopping{};  // scaled problem, as in the stopping test
  Vector<Scalar> constraint_value;  // A(X)
  Vector<Scalar> dual;              // y
  Index iterations = 0;             // updates applied
  StopReason stop_reason = StopReason::max_iters;
  SolverCounters counters;
  ScalingRecord<Scalar> scaling;
  double wall_ms = 0;
};

template <typename Scalar>
SolveReport<Scalar> solve(const OperatorSDP<Scalar>& original, Index R, const SolveOptions<Scalar>& opts) {
  using VectorType = Vector<Scalar>;
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  original.validate();
  if (opts.max_iters < 1) throw std::invalid_argument("solve: max_iters must be >= 1");
  if (!(opts.tol > 0)) throw std::invalid_argument("solve: tol must be > 0");

  ScaledProblem<Scalar> scaled;
  if (opts.scale) {
    if (original.constraint_fro_norms.size() != original.d)
      throw std::invalid_argument("solve: scaling needs per-constraint Frobenius norms");
    scaled = scale_problem(original, original.constraint_fro_norms);
  } else {
    scaled = {original, ScalingRecord<Scalar>::identity(original.d)};
  }
  const OperatorSDP<Scalar>& p = scaled.problem;
  const ScalingRecord<Scalar>& rec = scaled.scaling;

  SolverParams<Scalar> params;
  params.beta0 = opts.beta0;
  params.K = opts.K;
  params.seed = opts.seed;
  params.tol = opts.tol;
  params.lanczos = opts.lanczos;
  SolverState<Scalar> state = solver_init(p, R, params);
  GaussianStream accurate_rng(opts.seed + 2);

  const Scalar b_norm_original = original.b.norm();
  auto elapsed_ms = [&]() {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  };

  SolveReport<Scalar> report;
  report.stop_reason = StopReason::max_iters;
  for (Index k = 0; k < opts.max_iters; ++k) {
    const Direction<Scalar> dir = compute_direction(state, p);
    Scalar xi_logged = dir.xi;
    if (opts.exact_gap_every > 0 && state.t % opts.exact_gap_every == 0) {
      const Index q_acc = std::min<Index>(4 * dir.q, p.n);
      const SolverCounters before = state.counters;
      xi_logged = compute_direction(state, p, q_acc, &accurate_rng).xi;
      state.counters = before;
    }
    const bool stop = stopping_check(state, p, opts.tol);

    if (opts.on_iteration) {
      const VectorType resid = state.z - project_cone(p.cone, p.b, state.z);
      const auto um = unscale_metrics(rec, state.p, resid);
      const Scalar bound = suboptimality_bound(state, p, xi_logged);
      TraceRow row;
      row.t = state.t;
      row.obj_p = static_cast<double>(um.objective);
      row.infeas_abs = static_cast<double>(um.infeasibility.norm());
      row.infeas_rel = row.infeas_abs / (1 + static_cast<double>(b_norm_original));
      row.gap_bound = static_cast<double>(bound / rec.objective_scale());
      if (opts.reference_objective)
        row.obj_residual_rel = std::abs(row.obj_p - static_cast<double>(*opts.reference_objective)) /
                               (1 + std::abs(static_cast<double>(*opts.reference_objective)));
      else
        row.obj_residual_rel = static_cast<double>(bound / (1 + std::abs(state.p)));
      row.q_t = dir.q;
      row.xi = static_cast<double>(xi_logged);
      row.gamma = 0;
      if (!stop) row.gamma = static_cast<double>(apply_update(state, p, dir));
      row.wall_ms = opts.record_wall_clock ? elapsed_ms() : 0.0;
      opts.on_iteration(row);
    } else if (!stop) {
      apply_update(state, p, dir);
    }
    if (stop) {
      report.stop_reason = StopReason::tolerance;
      break;
    }
  }

  // Metrics of the returned iterate. On a tolerance stop last_xi belongs to
  // it; after max_iters it is one iteration stale and only feeds the bound.
  const Scalar xi_final = state.last_xi;
  const VectorType resid = state.z - project_cone(p.cone, p.b, state.z);
  const auto um = unscale_metrics(rec, state.p, resid);
  report.objective = um.objective;
  report.infeasibility_abs = um.infeasibility.norm();
  report.infeasibility_rel = report.infeasibility_abs / (1 + b_norm_original);
  report.gap_bound = suboptimality_bound(state, p, xi_final) / rec.objective_scale();
  report.stopping = stopping_metrics(state, p, xi_final);
  report.constraint_value = state.z.cwiseQuotient(rec.residual_scale());
  report.dual = unscale_dual(rec, state.y);
  report.iterations = state.t - 1;
  report.counters = state.counters;
  report.scaling = rec;

  Reconstruction<Scalar> recon = state.sketch.reconstruct();
  if (opts.trace_correction && p.trace_set.mode == TraceMode::equals)
    recon = trace_correct(std::move(recon), p.alpha());
  recon.lambda /= rec.s_alpha;
  recon.err /= rec.s_alpha;
  report.reconstruction = std::move(recon);
  report.wall_ms = elapsed_ms();
  return report;
}

template <typename Scalar>
struct StandardFormReport {
  SolveReport<Scalar> result;
  std::vector<Scalar> alphas;
  std::vector<Scalar> objectives;
  Index solves = 0;
};

// Solve a standard-form SDP (no a priori trace bound) through a sequence of
// trace-bounded problems with doubling bounds, stopping when two consecutive
// objectives agree to relative 10 * tol.
template <typename Scalar>
StandardFormReport<Scalar> solve_standard_form(const OperatorSDP<Scalar>& p, Scalar alpha0, Index R,
                                               const SolveOptions<Scalar>& opts, int max_doublings = 30) {
  if (!(alpha0 > 0)) throw std::invalid_argument("solve_standard_form: alpha0 must be > 0");
  StandardFormReport<Scalar> out;
  Scalar alpha = alpha0;
  for (int i = 0; i <= max_doublings; ++i) {
    OperatorSDP<Scalar> bounded = p;
    bounded.trace_set = {TraceMode::at_most, alpha};
    SolveReport<Scalar> rep = solve(bounded, R, opts);
    ++out.solves;
    out.alphas.push_back(alpha);
    out.objectives.push_back(rep.objective);
    const bool settled = out.objectives.size() >= 2 && [&] {
      const Scalar prev = out.objectives[out.objectives.size() - 2];
      return std::abs(rep.objective - prev) <= Scalar(10) * opts.tol * (1 + std::abs(prev));
    }();
    out.result = std::move(rep);
    if (settled) return out;
    alpha *= 2;
  }
  throw std::runtime_error("solve_standard_form: objective did not settle after " +
                           std::to_string(max_doublings) + " doublings of the trace bound");
}

}  // namespace sketchy
