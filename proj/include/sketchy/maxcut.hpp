#pragma once

// MaxCut front-end: graph ingestion, the MaxCut SDP as a black-box instance,
// sign rounding of factor columns, and an exhaustive oracle for small graphs.
//
// The SDP is  minimize <-L, X>  s.t.  diag(X) = 1,  tr X = n,  X psd,
// with L the combinatorial Laplacian.

#include "sketchy/problem.hpp"

#include <cstdint>
#include <istream>
#include <memory>
#include <string>
#include <type_traits>
#include <vector>

namespace sketchy {

struct Edge {
  Index i;  // 0-based, i < j
  Index j;
  double w;
};

struct Graph {
  Index n = 0;
  std::vector<Edge> edges;

  // Sorted, merged (duplicate weights summed), validated.
  static Graph from_edges(Index n, std::vector<Edge> edges);

  double total_weight() const;
  std::vector<double> degrees() const;
  double laplacian_frobenius_norm() const;
  // out = L u
  void laplacian_apply(const double* u, double* out) const;
  bool is_bipartite() const;
};

enum class GraphFormat { gset, matrix_market };

GraphFormat parse_graph_format(const std::string& name);
Graph read_graph(std::istream& in, GraphFormat format);
Graph load_graph(const std::string& path, GraphFormat format);

struct CutResult {
  std::vector<int> chi;  // +1 / -1
  double weight = 0;     // sum of weights of cut edges
  double quad_value = 0; // chi^T L chi = 4 * weight
};

CutResult evaluate_cut(const Graph& g, std::vector<int> chi);

// Exhaustive search over 2^{n-1} sign patterns (n <= 22).
CutResult brute_force_maxcut(const Graph& g);

// Sign-round each column of U (sgn(0) = +1) and keep the heaviest cut.
template <typename Derived>
CutResult maxcut_round(const Eigen::MatrixBase<Derived>& U, const Graph& g) {
  if (U.rows() != g.n) throw std::invalid_argument("maxcut_round: factor has wrong number of rows");
  if (U.cols() < 1) throw std::invalid_argument("maxcut_round: factor has no columns");
  CutResult best;
  best.weight = -1;
  for (Index k = 0; k < U.cols(); ++k) {
    std::vector<int> chi(static_cast<std::size_t>(g.n));
    for (Index i = 0; i < g.n; ++i) chi[static_cast<std::size_t>(i)] = U(i, k) < 0 ? -1 : 1;
    CutResult c = evaluate_cut(g, std::move(chi));
    if (c.weight > best.weight) best = std::move(c);
  }
  return best;
}

template <typename Scalar = double>
OperatorSDP<Scalar> maxcut_problem(const Graph& g) {
  using VectorType = Vector<Scalar>;
  if (g.n < 1 || g.edges.empty()) throw std::invalid_argument("maxcut_problem: graph has no edges");
  auto graph = std::make_shared<const Graph>(g);
  const Index n = g.n;

  OperatorSDP<Scalar> p;
  p.n = n;
  p.d = n;
  p.trace_set = {TraceMode::equals, static_cast<Scalar>(n)};
  p.cone = {ConeKind::singleton, Scalar(0)};
  p.b = VectorType::Ones(n);
  p.apply_C = [graph](const VectorType& u) -> VectorType {
    if (u.size() != graph->n) throw std::invalid_argument("maxcut: dimension mismatch");
    if constexpr (std::is_same_v<Scalar, double>) {
      VectorType out(graph->n);
      graph->laplacian_apply(u.data(), out.data());
      out = -out;
      return out;
    } else {
      const Eigen::VectorXd ud = u.template cast<double>();
      Eigen::VectorXd out(graph->n);
      graph->laplacian_apply(ud.data(), out.data());
      return (-out).template cast<Scalar>();
    }
  };
  p.apply_adjoint = [](const VectorType& u, const VectorType& z) -> VectorType {
    if (u.size() != z.size()) throw std::invalid_argument("maxcut: dimension mismatch");
    return z.cwiseProduct(u);
  };
  p.apply_map_rank_one = [](const VectorType& u) -> VectorType { return u.cwiseAbs2(); };
  p.norm_A = 1;
  p.norm_C_frobenius = static_cast<Scalar>(g.laplacian_frobenius_norm());
  p.constraint_fro_norms = VectorType::Ones(n);
  p.row_scaled_norm = [](const VectorType& r) -> Scalar { return r.cwiseAbs().maxCoeff(); };
  return p;
}

}  // namespace sketchy
