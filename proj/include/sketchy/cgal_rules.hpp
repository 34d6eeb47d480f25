#pragma once

// Update rules shared by the dense CGAL reference and SketchyCGAL, so both
// produce the same trajectory when driven by the same eigenvector oracle.

#include "sketchy/problem.hpp"

#include <cmath>
#include <limits>

namespace sketchy {

template <typename Scalar>
Scalar smoothing_parameter(Scalar beta0, Index t) {
  return beta0 * std::sqrt(static_cast<Scalar>(t + 1));
}

template <typename Scalar>
Scalar primal_step_size(Index t) {
  return Scalar(2) / static_cast<Scalar>(t + 1);
}

// Euclidean projection onto K.
template <typename Scalar>
Vector<Scalar> project_cone(const ConeSet<Scalar>& cone, const Vector<Scalar>& b, const Vector<Scalar>& w) {
  switch (cone.kind) {
    case ConeKind::singleton:
      return b;
    case ConeKind::upper_bound:
      return w.cwiseMin(b);
    case ConeKind::l2_ball: {
      const Vector<Scalar> diff = w - b;
      const Scalar nrm = diff.norm();
      if (nrm <= cone.radius) return w;
      return b + (cone.radius / nrm) * diff;
    }
  }
  return b;
}

// Weight s of the linear-minimization atom H = s v v^*.
template <typename Scalar>
Scalar lin_min_scale(const TraceSet<Scalar>& trace_set, Scalar xi) {
  if (trace_set.mode == TraceMode::equals) return trace_set.alpha;
  return xi < 0 ? trace_set.alpha : Scalar(0);
}

// Largest gamma in [0, beta0] with gamma ||z - target||^2 <= 4 alpha^2 beta0 ||A||^2 / (t+1)^{3/2};
// zero if the step would push ||y|| above K.
template <typename Scalar>
Scalar dual_step_size(const Vector<Scalar>& z_next, const Vector<Scalar>& target, Index t, Scalar beta0,
                      Scalar alpha, Scalar norm_A, const Vector<Scalar>& y, Scalar K) {
  const Vector<Scalar> residual = z_next - target;
  const Scalar sq = residual.squaredNorm();
  const Scalar bound =
      Scalar(4) * alpha * alpha * beta0 * norm_A * norm_A / std::pow(static_cast<Scalar>(t + 1), Scalar(1.5));
  Scalar gamma = sq == 0 ? beta0 : std::min(beta0, bound / sq);
  if (std::isfinite(K) && (y + gamma * residual).norm() > K) gamma = 0;
  return gamma;
}

// Upper bound on <C, X> - <C, X_*> from the augmented Lagrangian with slack w:
//   g - <y, z - w> - (beta/2) ||z - w||^2,   g = p + <y + beta (z - w), z> - <D, H>
// where atom_value = <D, H> = s * xi is the linear-minimization value.
template <typename Scalar>
Scalar posterior_bound(Scalar p, const Vector<Scalar>& y, const Vector<Scalar>& z, const Vector<Scalar>& w,
                       Scalar beta, Scalar atom_value) {
  const Vector<Scalar> r = z - w;
  const Scalar gap = p + (y + beta * r).dot(z) - atom_value;
  return gap - y.dot(r) - Scalar(0.5) * beta * r.squaredNorm();
}

// Distance from z to K.
template <typename Scalar>
Scalar cone_distance(const ConeSet<Scalar>& cone, const Vector<Scalar>& b, const Vector<Scalar>& z) {
  return (z - project_cone(cone, b, z)).norm();
}

}  // namespace sketchy
