#pragma once

// Problem instances for trace-constrained SDPs
//
//   minimize <C, X>  subject to  A(X) in K,  X psd,  tr X = alpha (or <= alpha)
//
// An instance is presented only through three callbacks:
//   u      -> C u
//   (u, z) -> (A^* z) u
//   u      -> A(u u^*)
// which is all the solvers ever need.

#include "sketchy/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sketchy {

enum class TraceMode { equals, at_most };

template <typename Scalar>
struct TraceSet {
  TraceMode mode = TraceMode::equals;
  Scalar alpha = 1;
};

enum class ConeKind { singleton, upper_bound, l2_ball };

// The constraint set K. Its center/bound is the problem's right-hand side b.
template <typename Scalar>
struct ConeSet {
  ConeKind kind = ConeKind::singleton;
  Scalar radius = 0;  // l2_ball only
};

template <typename Scalar>
struct OperatorSDP {
  using VectorType = Vector<Scalar>;
  using ApplyC = std::function<VectorType(const VectorType&)>;
  using ApplyAdjoint = std::function<VectorType(const VectorType&, const VectorType&)>;
  using ApplyMapRankOne = std::function<VectorType(const VectorType&)>;
  // Operator norm of diag(r) A for a positive row scaling r; used by scale_problem.
  using RowScaledNorm = std::function<Scalar(const VectorType&)>;

  Index n = 0;
  Index d = 0;
  TraceSet<Scalar> trace_set;
  ConeSet<Scalar> cone;
  VectorType b;

  ApplyC apply_C;
  ApplyAdjoint apply_adjoint;
  ApplyMapRankOne apply_map_rank_one;

  Scalar norm_A = 1;            // ||A|| (F -> l2), or a lower bound for it
  Scalar norm_C_frobenius = 1;  // ||C||_F
  VectorType constraint_fro_norms;  // ||A_i||_F, adapter supplied
  RowScaledNorm row_scaled_norm;    // optional

  Scalar alpha() const { return trace_set.alpha; }

  void validate() const {
    if (n < 1) throw std::invalid_argument("problem dimension n must be >= 1");
    if (d < 1) throw std::invalid_argument("number of constraints d must be >= 1");
    if (!(trace_set.alpha > 0)) throw std::invalid_argument("trace parameter alpha must be > 0");
    if (!(norm_A > 0)) throw std::invalid_argument("norm_A must be > 0");
    if (b.size() != d) throw std::invalid_argument("right-hand side b must have length d");
    if (cone.kind == ConeKind::l2_ball && cone.radius < 0)
      throw std::invalid_argument("l2-ball radius must be >= 0");
    if (!apply_C || !apply_adjoint || !apply_map_rank_one)
      throw std::invalid_argument("problem callbacks must all be set");
  }
};

// Explicit dense instance. Used as the oracle backend in tests and for small
// generic problems read from JSON.
template <typename Scalar>
struct DenseSDP {
  using MatrixType = Matrix<Scalar>;
  using VectorType = Vector<Scalar>;

  MatrixType C;
  std::vector<MatrixType> A;
  VectorType b;
  TraceSet<Scalar> trace_set;
  ConeSet<Scalar> cone;

  Index n() const { return C.rows(); }
  Index d() const { return static_cast<Index>(A.size()); }

  void validate(Scalar symmetry_tol = Scalar(1e-12)) const {
    if (C.rows() < 1 || C.rows() != C.cols())
      throw std::invalid_argument("C must be a nonempty square matrix");
    if (A.empty()) throw std::invalid_argument("at least one constraint matrix is required");
    if (b.size() != d())
      throw std::invalid_argument("b has length " + std::to_string(b.size()) + ", expected " +
                                  std::to_string(d()));
    if (!(trace_set.alpha > 0)) throw std::invalid_argument("alpha must be > 0");
    if (cone.kind == ConeKind::l2_ball && cone.radius < 0)
      throw std::invalid_argument("l2-ball radius must be >= 0");
    auto check_symmetric = [&](const MatrixType& M, const std::string& what) {
      const Scalar scale = std::max(Scalar(1), M.cwiseAbs().maxCoeff());
      if ((M - M.transpose()).cwiseAbs().maxCoeff() > symmetry_tol * scale)
        throw std::invalid_argument(what + " is not symmetric");
    };
    check_symmetric(C, "C");
    for (Index i = 0; i < d(); ++i) {
      if (A[i].rows() != n() || A[i].cols() != n())
        throw std::invalid_argument("A[" + std::to_string(i) + "] has wrong dimensions");
      check_symmetric(A[i], "A[" + std::to_string(i) + "]");
    }
  }

  // A(X) = (<A_i, X>)_i
  VectorType map(const MatrixType& X) const {
    VectorType z(d());
    for (Index i = 0; i < d(); ++i) z(i) = A[i].cwiseProduct(X).sum();
    return z;
  }

  // A^* z = sum_i z_i A_i
  MatrixType adjoint(const VectorType& z) const {
    MatrixType M = MatrixType::Zero(n(), n());
    for (Index i = 0; i < d(); ++i) M += z(i) * A[i];
    return M;
  }

  // G_ij = <A_i, A_j>
  MatrixType gram() const {
    MatrixType G(d(), d());
    for (Index i = 0; i < d(); ++i)
      for (Index j = i; j < d(); ++j) G(i, j) = G(j, i) = A[i].cwiseProduct(A[j]).sum();
    return G;
  }

  VectorType fro_norms() const {
    VectorType f(d());
    for (Index i = 0; i < d(); ++i) f(i) = A[i].norm();
    return f;
  }
};

namespace detail {

template <typename Scalar>
Scalar sqrt_max_eigenvalue(const Matrix<Scalar>& G) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(G, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(Scalar(0), es.eigenvalues().maxCoeff()));
}

}  // namespace detail

// ||A|| = lambda_max(G)^{1/2} with G the Gram matrix of the vectorized A_i.
template <typename Scalar>
Scalar dense_map_norm(const DenseSDP<Scalar>& dense) {
  return detail::sqrt_max_eigenvalue<Scalar>(dense.gram());
}

template <typename Scalar>
OperatorSDP<Scalar> build_dense_problem(const DenseSDP<Scalar>& dense) {
  dense.validate();
  auto data = std::make_shared<const DenseSDP<Scalar>>(dense);
  using VectorType = Vector<Scalar>;

  OperatorSDP<Scalar> p;
  p.n = dense.n();
  p.d = dense.d();
  p.trace_set = dense.trace_set;
  p.cone = dense.cone;
  p.b = dense.b;
  p.apply_C = [data](const VectorType& u) -> VectorType {
    if (u.size() != data->n()) throw std::invalid_argument("apply_C: dimension mismatch");
    return data->C * u;
  };
  p.apply_adjoint = [data](const VectorType& u, const VectorType& z) -> VectorType {
    if (u.size() != data->n() || z.size() != data->d())
      throw std::invalid_argument("apply_adjoint: dimension mismatch");
    VectorType out = VectorType::Zero(data->n());
    for (Index i = 0; i < data->d(); ++i)
      if (z(i) != Scalar(0)) out.noalias() += z(i) * (data->A[i] * u);
    return out;
  };
  p.apply_map_rank_one = [data](const VectorType& u) -> VectorType {
    if (u.size() != data->n()) throw std::invalid_argument("apply_map_rank_one: dimension mismatch");
    VectorType z(data->d());
    for (Index i = 0; i < data->d(); ++i) z(i) = u.dot(data->A[i] * u);
    return z;
  };
  const Matrix<Scalar> G = dense.gram();
  p.norm_A = detail::sqrt_max_eigenvalue<Scalar>(G);
  p.norm_C_frobenius = dense.C.norm();
  p.constraint_fro_norms = dense.fro_norms();
  p.row_scaled_norm = [G](const VectorType& r) -> Scalar {
    const Matrix<Scalar> scaled = r.asDiagonal() * G * r.asDiagonal();
    return detail::sqrt_max_eigenvalue<Scalar>(scaled);
  };
  return p;
}

// Scale factors relating a scaled instance (C', A', b', alpha') to the
// original one:
//   C'   = s_C C
//   A'_i = s_map s_i A_i
//   alpha' = s_alpha alpha, so X' = s_alpha X
//   b'_i = s_map s_i s_alpha b_i
template <typename Scalar>
struct ScalingRecord {
  Scalar s_C = 1;
  Vector<Scalar> s_constraint;  // s_i
  Scalar s_map = 1;
  Scalar s_alpha = 1;

  // Total factor applied to component i of A(X) - b.
  Vector<Scalar> residual_scale() const { return (s_map * s_alpha) * s_constraint; }
  Scalar objective_scale() const { return s_C * s_alpha; }

  static ScalingRecord identity(Index d) {
    ScalingRecord rec;
    rec.s_constraint = Vector<Scalar>::Ones(d);
    return rec;
  }
};

template <typename Scalar>
struct ScaledProblem {
  OperatorSDP<Scalar> problem;
  ScalingRecord<Scalar> scaling;
};

// Rescale so that ||C||_F = ||A|| = alpha = 1 and all ||A_i||_F are equal.
// Per-constraint equalization happens first, then the global map scale.
// For l2-ball cones the per-constraint step is skipped: a nonuniform row
// scaling would turn the ball into an ellipsoid.
template <typename Scalar>
ScaledProblem<Scalar> scale_problem(const OperatorSDP<Scalar>& p, const Vector<Scalar>& fro_norms) {
  using VectorType = Vector<Scalar>;
  p.validate();
  if (fro_norms.size() != p.d)
    throw std::invalid_argument("scale_problem: need one Frobenius norm per constraint");
  if (!(fro_norms.array() > 0).all())
    throw std::invalid_argument("scale_problem: constraint Frobenius norms must be > 0");
  if (!(p.norm_C_frobenius > 0)) throw std::invalid_argument("scale_problem: ||C||_F must be > 0");

  ScalingRecord<Scalar> rec;
  rec.s_C = Scalar(1) / p.norm_C_frobenius;
  rec.s_alpha = Scalar(1) / p.alpha();
  if (p.cone.kind == ConeKind::l2_ball)
    rec.s_constraint = VectorType::Ones(p.d);
  else
    rec.s_constraint = fro_norms.cwiseInverse();

  const bool uniform = (rec.s_constraint.array() == rec.s_constraint(0)).all();
  Scalar row_norm;
  if (uniform)
    row_norm = rec.s_constraint(0) * p.norm_A;
  else if (p.row_scaled_norm)
    row_norm = p.row_scaled_norm(rec.s_constraint);
  else
    throw std::invalid_argument(
        "scale_problem: unequal constraint norms need a row_scaled_norm callback");
  if (!(row_norm > 0)) throw std::invalid_argument("scale_problem: zero map norm");
  rec.s_map = Scalar(1) / row_norm;

  const VectorType row = rec.s_map * rec.s_constraint;
  const Scalar s_C = rec.s_C;

  OperatorSDP<Scalar> q;
  q.n = p.n;
  q.d = p.d;
  q.trace_set = {p.trace_set.mode, Scalar(1)};
  q.cone = p.cone;
  if (q.cone.kind == ConeKind::l2_ball) q.cone.radius = p.cone.radius * rec.s_map * rec.s_alpha;
  q.b = rec.s_alpha * row.cwiseProduct(p.b);
  q.apply_C = [f = p.apply_C, s_C](const VectorType& u) -> VectorType { return s_C * f(u); };
  q.apply_adjoint = [f = p.apply_adjoint, row](const VectorType& u, const VectorType& z) -> VectorType {
    return f(u, row.cwiseProduct(z));
  };
  q.apply_map_rank_one = [f = p.apply_map_rank_one, row](const VectorType& u) -> VectorType {
    return row.cwiseProduct(f(u));
  };
  q.norm_A = Scalar(1);
  q.norm_C_frobenius = Scalar(1);
  q.constraint_fro_norms = row.cwiseProduct(fro_norms);
  if (p.row_scaled_norm)
    q.row_scaled_norm = [f = p.row_scaled_norm, row](const VectorType& r) -> Scalar {
      return f(row.cwiseProduct(r));
    };
  return {std::move(q), std::move(rec)};
}

template <typename Scalar>
struct UnscaledMetrics {
  Scalar objective;
  Vector<Scalar> infeasibility;  // A(X) - b in original units
};

template <typename Scalar>
UnscaledMetrics<Scalar> unscale_metrics(const ScalingRecord<Scalar>& rec, Scalar scaled_objective,
                                        const Vector<Scalar>& scaled_infeasibility) {
  return {scaled_objective / rec.objective_scale(),
          scaled_infeasibility.cwiseQuotient(rec.residual_scale())};
}

// Dual variable of the original problem from that of the scaled one.
template <typename Scalar>
Vector<Scalar> unscale_dual(const ScalingRecord<Scalar>& rec, const Vector<Scalar>& scaled_y) {
  return (rec.s_map / rec.s_C) * rec.s_constraint.cwiseProduct(scaled_y);
}

// Largest relative violation of <(A^* z)u, u> = <z, A(uu^*)> over random draws.
template <typename Scalar>
Scalar adjoint_consistency_error(const OperatorSDP<Scalar>& p, GaussianStream& rng, int trials = 10) {
  Scalar worst = 0;
  for (int k = 0; k < trials; ++k) {
    const Vector<Scalar> u = rng.vector<Scalar>(p.n);
    const Vector<Scalar> z = rng.vector<Scalar>(p.d);
    const Vector<Scalar> au = p.apply_map_rank_one(u);
    const Scalar lhs = p.apply_adjoint(u, z).dot(u);
    const Scalar rhs = z.dot(au);
    const Scalar scale = std::max(Scalar(1e-300), z.cwiseAbs().dot(au.cwiseAbs()));
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

}  // namespace sketchy
