#pragma once

// Streaming Nystrom sketch of a psd matrix X that evolves by convex rank-one
// updates X <- (1 - eta) X + eta v v^*. Only the test matrix Omega, the
// sketch S = X Omega and the trace tau = tr X are stored.

#include "sketchy/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace sketchy {

// X_hat = U diag(lambda) U^*, with err(r) = tau - sum_{j<=r} lambda_j the
// exact Schatten-1 error of the rank-r truncation.
template <typename Scalar>
struct Reconstruction {
  Matrix<Scalar> U;
  Vector<Scalar> lambda;
  Vector<Scalar> err;

  Index rank() const { return lambda.size(); }
  Scalar trace() const { return lambda.sum(); }

  Matrix<Scalar> dense(Index r = -1) const {
    if (r < 0 || r > rank()) r = rank();
    return U.leftCols(r) * lambda.head(r).asDiagonal() * U.leftCols(r).transpose();
  }
};

template <typename Scalar>
class NystromSketch {
 public:
  using VectorType = Vector<Scalar>;
  using MatrixType = Matrix<Scalar>;

  static constexpr int kMaxShiftRetries = 40;
  static constexpr int kPowerIterations = 10;

  NystromSketch(Index n, Index R, std::uint64_t seed) : n_(n), R_(R), seed_(seed) {
    if (n < 1) throw std::invalid_argument("NystromSketch: n must be >= 1");
    if (R < 1 || R > n)
      throw std::invalid_argument("NystromSketch: sketch size R must satisfy 1 <= R <= n (got R = " +
                                  std::to_string(R) + ", n = " + std::to_string(n) + ")");
    GaussianStream rng(seed);
    omega_.resize(n, R);
    rng.fill(omega_);
    S_ = MatrixType::Zero(n, R);
  }

  Index dimension() const { return n_; }
  Index size() const { return R_; }
  std::uint64_t seed() const { return seed_; }
  Scalar trace() const { return tau_; }
  const MatrixType& test_matrix() const { return omega_; }
  const MatrixType& sketch() const { return S_; }

  // S <- (1 - eta) S + eta v (v^* Omega),  tau <- (1 - eta) tau + eta ||v||^2
  void rank_one_update(const VectorType& v, Scalar eta) {
    if (v.size() != n_) throw std::invalid_argument("NystromSketch::rank_one_update: dimension mismatch");
    if (!(eta >= 0 && eta <= 1))
      throw std::invalid_argument("NystromSketch::rank_one_update: eta must lie in [0, 1]");
    if (eta == 0) return;
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> vt_omega = v.transpose() * omega_;
    S_ *= (Scalar(1) - eta);
    S_.noalias() += eta * v * vt_omega;
    tau_ = (Scalar(1) - eta) * tau_ + eta * v.squaredNorm();
  }

  Reconstruction<Scalar> reconstruct() const {
    Reconstruction<Scalar> rec;
    if (S_.isZero(0)) {
      HouseholderQRType qr(omega_);
      rec.U = qr.householderQ() * MatrixType::Identity(n_, R_);
      rec.lambda = VectorType::Zero(R_);
      rec.err = VectorType::Constant(R_, tau_);
      return rec;
    }

    const Scalar unit_roundoff = std::numeric_limits<Scalar>::epsilon() / 2;
    Scalar sigma = std::sqrt(static_cast<Scalar>(n_)) * unit_roundoff * spectral_norm_estimate();

    // Y = S_sigma L^{-*}, computed in place in the shifted sketch.
    MatrixType Y;
    Eigen::LLT<MatrixType> llt;
    bool factored = false;
    for (int attempt = 0; attempt <= kMaxShiftRetries; ++attempt) {
      Y = S_ + sigma * omega_;
      MatrixType B = omega_.transpose() * Y;
      B = Scalar(0.5) * (B + B.transpose()).eval();
      llt.compute(B);
      if (llt.info() == Eigen::Success) {
        factored = true;
        break;
      }
      sigma *= 2;
    }
    if (!factored)
      throw std::runtime_error("NystromSketch::reconstruct: Cholesky failed after repeated shifts");
    llt.matrixU().template solveInPlace<Eigen::OnTheRight>(Y);

    // Thin SVD via QR of the tall factor followed by a small R x R SVD.
    Eigen::HouseholderQR<Eigen::Ref<MatrixType>> qr(Y);
    const MatrixType Rfac = qr.matrixQR().topRows(R_).template triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<MatrixType> svd(Rfac, Eigen::ComputeFullU);
    rec.U = MatrixType::Zero(n_, R_);
    rec.U.topRows(R_) = svd.matrixU();
    rec.U.applyOnTheLeft(qr.householderQ());

    rec.lambda = (svd.singularValues().array().square() - sigma).cwiseMax(Scalar(0)).matrix();
    rec.err.resize(R_);
    Scalar cumulative = 0;
    for (Index r = 0; r < R_; ++r) {
      cumulative += rec.lambda(r);
      rec.err(r) = tau_ - cumulative;
    }
    return rec;
  }

 private:
  using HouseholderQRType = Eigen::HouseholderQR<MatrixType>;

  // ||S||_2 from power iteration on the R x R Gram matrix S^* S.
  Scalar spectral_norm_estimate() const {
    const MatrixType G = S_.transpose() * S_;
    VectorType x = VectorType::Ones(R_) / std::sqrt(static_cast<Scalar>(R_));
    Scalar lambda = 0;
    for (int k = 0; k < kPowerIterations; ++k) {
      VectorType gx = G * x;
      const Scalar nrm = gx.norm();
      if (nrm == 0) break;
      lambda = x.dot(gx);
      x = gx / nrm;
    }
    if (!(lambda > 0)) return S_.norm();
    return std::sqrt(lambda);
  }

  Index n_;
  Index R_;
  std::uint64_t seed_;
  MatrixType omega_;
  MatrixType S_;
  Scalar tau_ = 0;
};

template <typename Scalar>
NystromSketch<Scalar> sketch_init(Index n, Index R, std::uint64_t seed) {
  return NystromSketch<Scalar>(n, R, seed);
}

// Spread the missing trace evenly over the R eigenvalues so tr = alpha. The
// error estimates are left as they were: they describe the uncorrected
// Nystrom approximation.
template <typename Scalar>
Reconstruction<Scalar> trace_correct(Reconstruction<Scalar> rec, Scalar alpha) {
  const Scalar current = rec.lambda.sum();
  const Index R = rec.lambda.size();
  if (R == 0) throw std::invalid_argument("trace_correct: empty reconstruction");
  if (alpha < current - Scalar(1e-8) * std::abs(alpha))
    throw std::invalid_argument("trace_correct: target trace is below the reconstructed trace");
  rec.lambda.array() += (alpha - current) / static_cast<Scalar>(R);
  return rec;
}

}  // namespace sketchy
