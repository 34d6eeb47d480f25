#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace sketchy {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Deterministic stream of standard normal variates. Every random quantity in
// the library (test matrices, Lanczos start vectors) is drawn from one of
// these, so a seed fully determines a run.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

  double next() { return normal_(engine_); }

  // Column-major fill.
  template <typename Derived>
  void fill(Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<Scalar>(next());
  }

  template <typename Scalar>
  Vector<Scalar> vector(Index n) {
    Vector<Scalar> v(n);
    fill(v);
    return v;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uint64_t seed_;
};

}  // namespace sketchy
