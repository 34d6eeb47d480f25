#pragma once

// Storage-optimal randomized Lanczos for an approximate minimum eigenpair of a
// symmetric matrix available only through matrix-vector products.
//
// Pass 1 runs the three-term recurrence from a Gaussian start vector and keeps
// only the tridiagonal coefficients and v_1. Pass 2 replays the recurrence
// from v_1 to accumulate the Ritz vector, so at most three Lanczos vectors are
// alive at any time.

#include "sketchy/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace sketchy {

template <typename Scalar>
struct TridiagonalSpectrum {
  Vector<Scalar> omega;  // diagonal
  Vector<Scalar> rho;    // off-diagonal, one shorter than omega
};

template <typename Scalar>
struct TridiagonalEigenpair {
  Scalar lambda;
  Vector<Scalar> u;
};

template <typename Scalar>
struct LanczosResult {
  Scalar xi;  // Rayleigh quotient v^* M v
  Vector<Scalar> v;
  Index iterations;
  Index matvecs;
};

struct LanczosOptions {
  // Keep all Lanczos vectors and skip the regeneration pass: half the matvecs,
  // O(qn) storage.
  bool store_vectors = false;
};

template <typename Scalar>
TridiagonalEigenpair<Scalar> min_eig_tridiagonal(const TridiagonalSpectrum<Scalar>& t) {
  const Index q = t.omega.size();
  if (q == 0) throw std::invalid_argument("min_eig_tridiagonal: empty tridiagonal matrix");
  if (t.rho.size() != q - 1)
    throw std::invalid_argument("min_eig_tridiagonal: off-diagonal must have length q - 1");
  if (q == 1) return {t.omega(0), Vector<Scalar>::Ones(1)};

  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es;
  es.computeFromTridiagonal(t.omega, t.rho, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("min_eig_tridiagonal: eigensolver did not converge");
  Vector<Scalar> u = es.eigenvectors().col(0);
  u /= u.norm();
  return {es.eigenvalues()(0), std::move(u)};
}

// q_t = min(n - 1, max(2, ceil(t^{1/4} ln n)))
inline Index lanczos_schedule(Index t, Index n) {
  if (t < 1) t = 1;
  if (n < 2) return 1;
  const double raw = std::ceil(std::pow(static_cast<double>(t), 0.25) * std::log(static_cast<double>(n)));
  const Index q = std::max<Index>(2, static_cast<Index>(raw));
  return std::max<Index>(1, std::min<Index>(n - 1, q));
}

namespace detail {

// Relative residual below which the Krylov space is treated as invariant.
template <typename Scalar>
Scalar lanczos_breakdown_tol(Index n) {
  return Scalar(8) * std::sqrt(static_cast<Scalar>(n)) * std::numeric_limits<Scalar>::epsilon();
}

}  // namespace detail

// matvec: callable Vector<Scalar>(const Vector<Scalar>&), assumed symmetric.
template <typename Scalar, typename MatVec>
LanczosResult<Scalar> approx_min_evec(MatVec&& matvec, Index n, Index q, GaussianStream& rng,
                                      const LanczosOptions& opts = {}) {
  using VectorType = Vector<Scalar>;
  if (n < 1) throw std::invalid_argument("approx_min_evec: dimension must be >= 1");
  if (q < 1) throw std::invalid_argument("approx_min_evec: q must be >= 1");

  auto apply = [&](const VectorType& x) -> VectorType {
    VectorType y = matvec(x);
    if (y.size() != n) throw std::invalid_argument("approx_min_evec: matvec returned wrong length");
    return y;
  };

  const Index max_iter = std::min(q, n);
  const Scalar tol = detail::lanczos_breakdown_tol<Scalar>(n);

  VectorType v1 = rng.vector<Scalar>(n);
  v1 /= v1.norm();

  std::vector<Scalar> omega;
  std::vector<Scalar> rho;
  omega.reserve(static_cast<std::size_t>(max_iter));
  rho.reserve(static_cast<std::size_t>(max_iter));
  std::vector<VectorType> basis;
  if (opts.store_vectors) basis.push_back(v1);

  Index matvecs = 0;
  {
    VectorType v_prev = VectorType::Zero(n);
    VectorType v = v1;
    for (Index i = 0; i < max_iter; ++i) {
      VectorType w = apply(v);
      ++matvecs;
      const Scalar scale = w.norm();
      const Scalar om = v.dot(w);
      omega.push_back(om);
      w -= om * v;
      if (i > 0) w -= rho.back() * v_prev;
      const Scalar r = w.norm();
      if (i + 1 == max_iter || r <= tol * scale) break;
      rho.push_back(r);
      w /= r;
      v_prev.swap(v);
      v.swap(w);
      if (opts.store_vectors) basis.push_back(v);
    }
  }

  const Index k = static_cast<Index>(omega.size());
  TridiagonalSpectrum<Scalar> tri{Eigen::Map<const VectorType>(omega.data(), k),
                                  Eigen::Map<const VectorType>(rho.data(), k - 1)};
  const TridiagonalEigenpair<Scalar> ritz = min_eig_tridiagonal(tri);

  VectorType v;
  if (opts.store_vectors) {
    v = ritz.u(0) * basis[0];
    for (Index j = 1; j < k; ++j) v += ritz.u(j) * basis[static_cast<std::size_t>(j)];
  } else {
    // Replay the recurrence with the stored coefficients; same arithmetic as pass 1.
    v = ritz.u(0) * v1;
    VectorType v_prev = VectorType::Zero(n);
    VectorType vj = v1;
    for (Index j = 1; j < k; ++j) {
      VectorType w = apply(vj);
      ++matvecs;
      w -= tri.omega(j - 1) * vj;
      if (j > 1) w -= tri.rho(j - 2) * v_prev;
      w /= tri.rho(j - 1);
      v_prev.swap(vj);
      vj.swap(w);
      v += ritz.u(j) * vj;
    }
  }
  v /= v.norm();
  const VectorType mv = apply(v);
  ++matvecs;
  return {v.dot(mv), std::move(v), k, matvecs};
}

}  // namespace sketchy
