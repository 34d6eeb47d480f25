#pragma once

#include "sketchy/lanczos.hpp"
#include "sketchy/nystrom.hpp"
#include "sketchy/problem.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace sketchy {

template <typename Scalar>
struct ResidualMetrics {
  Scalar objective_residual;  // |obj - ref| / (1 + |ref|)
  Scalar infeasibility;       // ||A X - b|| / (1 + ||b||)
};

template <typename Scalar>
ResidualMetrics<Scalar> residual_metrics(Scalar objective, Scalar reference_objective,
                                         const Vector<Scalar>& constraint_value, const Vector<Scalar>& b) {
  return {std::abs(objective - reference_objective) / (1 + std::abs(reference_objective)),
          (constraint_value - b).norm() / (1 + b.norm())};
}

// DIMACS errors with Euclidean scaling and Z := C + A^* y.
template <typename Scalar>
struct DimacsErrors {
  Scalar err1 = 0;
  Scalar err2 = 0;
  Scalar err3 = 0;
  Scalar err4 = 0;
  Scalar err5 = 0;
  std::optional<Scalar> err6;
  bool exact_eigenvalues = true;  // false when lambda_min(Z) came from Lanczos
};

namespace detail {

// Negative part of lambda_min, snapped to 0 inside +-1e-8 * scale.
template <typename Scalar>
Scalar negative_part(Scalar lambda_min, Scalar scale) {
  if (std::abs(lambda_min) <= Scalar(1e-8) * scale) return 0;
  return std::max(-lambda_min, Scalar(0));
}

template <typename Scalar>
Scalar min_eigenvalue(const Matrix<Scalar>& M) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace detail

template <typename Scalar>
DimacsErrors<Scalar> dimacs_errors(const DenseSDP<Scalar>& dense, const Matrix<Scalar>& X,
                                   const Vector<Scalar>& y) {
  if (X.rows() != dense.n() || X.cols() != dense.n() || y.size() != dense.d())
    throw std::invalid_argument("dimacs_errors: dimension mismatch");
  const Vector<Scalar>& b = dense.b;
  const Scalar c_fro = dense.C.norm();
  const Matrix<Scalar> aty = dense.adjoint(y);
  const Matrix<Scalar> Z = dense.C + aty;

  const Scalar cx = dense.C.cwiseProduct(X).sum();
  const Scalar by = b.dot(y);
  const Scalar denom = 1 + std::abs(cx) + std::abs(by);

  DimacsErrors<Scalar> e;
  e.err1 = (dense.map(X) - b).norm() / (1 + b.norm());
  e.err2 = detail::negative_part(detail::min_eigenvalue<Scalar>(X), std::max(Scalar(1), X.norm())) / (1 + b.norm());
  e.err3 = ((dense.C + aty) - Z).norm() / (1 + c_fro);
  e.err4 = detail::negative_part(detail::min_eigenvalue<Scalar>(Z), std::max(Scalar(1), Z.norm())) / (1 + c_fro);
  e.err5 = (cx + by) / denom;
  e.err6 = X.cwiseProduct(Z).sum() / denom;
  return e;
}

// Matrix-free variant. lambda_min(Z) comes from a Lanczos solve with q
// iterations. err6 needs the factored iterate and is left empty without one.
template <typename Scalar>
DimacsErrors<Scalar> dimacs_errors_matrix_free(const OperatorSDP<Scalar>& p, const Vector<Scalar>& z,
                                               Scalar objective, const Vector<Scalar>& y,
                                               const Reconstruction<Scalar>* factor, Index q,
                                               GaussianStream& rng) {
  using VectorType = Vector<Scalar>;
  const VectorType& b = p.b;
  const Scalar c_fro = p.norm_C_frobenius;
  const Scalar by = b.dot(y);
  const Scalar denom = 1 + std::abs(objective) + std::abs(by);

  auto z_apply = [&](const VectorType& u) -> VectorType { return p.apply_C(u) + p.apply_adjoint(u, y); };
  const auto eig = approx_min_evec<Scalar>(z_apply, p.n, q, rng);

  DimacsErrors<Scalar> e;
  e.exact_eigenvalues = false;
  e.err1 = (z - b).norm() / (1 + b.norm());
  e.err2 = 0;
  if (factor != nullptr && factor->lambda.size() > 0 && factor->lambda.minCoeff() < 0)
    e.err2 = -factor->lambda.minCoeff() / (1 + b.norm());
  e.err3 = 0;
  e.err4 = detail::negative_part(eig.xi, std::max(Scalar(1), c_fro)) / (1 + c_fro);
  e.err5 = (objective + by) / denom;
  if (factor != nullptr) {
    Scalar xz = 0;
    for (Index k = 0; k < factor->rank(); ++k) {
      const VectorType u = factor->U.col(k);
      xz += factor->lambda(k) * u.dot(z_apply(u));
    }
    e.err6 = xz / denom;
  }
  return e;
}

// One row of the per-iteration CSV trace. Metrics are in original units.
struct TraceRow {
  std::int64_t t = 0;
  double obj_p = 0;
  double infeas_abs = 0;
  double obj_residual_rel = 0;
  double infeas_rel = 0;
  double gap_bound = 0;
  double gamma = 0;
  std::int64_t q_t = 0;
  double xi = 0;
  double wall_ms = 0;
};

// CSV writer for TraceRow. The header goes out before the first row (or on
// close if no row was written); numbers use 17 significant digits.
class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& out);
  ~TraceWriter();
  TraceWriter(const TraceWriter&) = delete;
  TraceWriter& operator=(const TraceWriter&) = delete;

  void write(const TraceRow& row);
  void flush();
  std::int64_t rows_written() const { return rows_; }

  static const char* header();

 private:
  void ensure_header();

  std::ostream& out_;
  bool header_written_ = false;
  std::int64_t rows_ = 0;
};

TraceRow parse_trace_row(const std::string& line);

}  // namespace sketchy
