#include "support/instances.hpp"

#include <Eigen/Eigenvalues>

#include <random>

namespace testsupport {

MatrixXd random_symmetric(Index n, GaussianStream& rng) {
  MatrixXd G(n, n);
  rng.fill(G);
  return (G + G.transpose()) / 2;
}

MatrixXd random_psd(Index n, Index rank, GaussianStream& rng) {
  MatrixXd G(n, rank);
  rng.fill(G);
  MatrixXd X = G * G.transpose();
  return X / X.trace();
}

MatrixXd psd_with_spectrum(const VectorXd& lambda, GaussianStream& rng) {
  const Index n = lambda.size();
  MatrixXd G(n, n);
  rng.fill(G);
  Eigen::HouseholderQR<MatrixXd> qr(G);
  const MatrixXd Q = qr.householderQ();
  return Q * lambda.asDiagonal() * Q.transpose();
}

DenseSDP<double> random_dense_sdp(Index n, Index d, sketchy::TraceMode mode, std::uint64_t seed) {
  GaussianStream rng(seed);
  DenseSDP<double> dense;
  dense.C = random_symmetric(n, rng);
  dense.trace_set = {mode, 1.0 + static_cast<double>(seed % 3)};
  for (Index i = 0; i < d; ++i) dense.A.push_back(random_symmetric(n, rng));
  const double tr = mode == sketchy::TraceMode::equals ? dense.trace_set.alpha : dense.trace_set.alpha / 2;
  const MatrixXd X0 = tr * random_psd(n, n, rng);
  dense.b = dense.map(X0);
  return dense;
}

MatrixXd laplacian(const Graph& g) {
  MatrixXd L = MatrixXd::Zero(g.n, g.n);
  for (const auto& e : g.edges) {
    L(e.i, e.i) += e.w;
    L(e.j, e.j) += e.w;
    L(e.i, e.j) -= e.w;
    L(e.j, e.i) -= e.w;
  }
  return L;
}

DenseSDP<double> maxcut_dense(const Graph& g) {
  DenseSDP<double> dense;
  dense.C = -laplacian(g);
  for (Index i = 0; i < g.n; ++i) {
    MatrixXd A = MatrixXd::Zero(g.n, g.n);
    A(i, i) = 1;
    dense.A.push_back(std::move(A));
  }
  dense.b = VectorXd::Ones(g.n);
  dense.trace_set = {sketchy::TraceMode::equals, static_cast<double>(g.n)};
  return dense;
}

DenseSDP<double> scaled_dense(const DenseSDP<double>& dense) {
  DenseSDP<double> out;
  const double alpha = dense.trace_set.alpha;
  out.C = dense.C / dense.C.norm();
  out.trace_set = {dense.trace_set.mode, 1.0};
  out.cone = dense.cone;
  const bool ball = dense.cone.kind == sketchy::ConeKind::l2_ball;
  VectorXd s(dense.d());
  for (Index i = 0; i < dense.d(); ++i) s(i) = ball ? 1.0 : 1.0 / dense.A[i].norm();
  for (Index i = 0; i < dense.d(); ++i) out.A.push_back(s(i) * dense.A[i]);
  out.b = s.cwiseProduct(dense.b);
  const double s_map = 1.0 / sketchy::dense_map_norm(out);
  for (auto& A : out.A) A *= s_map;
  out.b *= s_map / alpha;
  if (ball) out.cone.radius *= s_map / alpha;
  return out;
}

Graph random_graph(Index n, double edge_prob, std::uint64_t seed, bool weighted) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<sketchy::Edge> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (unif(gen) < edge_prob) edges.push_back({i, j, weighted ? 0.5 + unif(gen) : 1.0});
  if (edges.empty()) edges.push_back({0, n - 1, 1.0});
  return Graph::from_edges(n, std::move(edges));
}

Graph random_bipartite_graph(Index left, Index right, double edge_prob, std::uint64_t seed, bool weighted) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Index n = left + right;
  std::vector<sketchy::Edge> edges;
  // Spanning path across the parts keeps the graph connected.
  for (Index k = 0; k + 1 < n; ++k) {
    const Index a = k / 2;
    const Index b = left + (k + 1) / 2;
    if (a < left && b < n) edges.push_back({a, b, weighted ? 0.5 + unif(gen) : 1.0});
  }
  for (Index i = 0; i < left; ++i)
    for (Index j = left; j < n; ++j)
      if (unif(gen) < edge_prob) edges.push_back({i, j, weighted ? 0.5 + unif(gen) : 1.0});
  return Graph::from_edges(n, std::move(edges));
}

Graph path_graph(Index n) {
  std::vector<sketchy::Edge> edges;
  for (Index i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  return Graph::from_edges(n, std::move(edges));
}

Graph cycle_graph(Index n) {
  std::vector<sketchy::Edge> edges;
  for (Index i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
  return Graph::from_edges(n, std::move(edges));
}

Graph complete_graph(Index n) {
  std::vector<sketchy::Edge> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) edges.push_back({i, j, 1.0});
  return Graph::from_edges(n, std::move(edges));
}

double nuclear_norm(const MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double min_eigenvalue(const MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace testsupport
