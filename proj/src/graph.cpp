#include "sketchy/maxcut.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace sketchy {

namespace {

std::runtime_error parse_error(std::size_t line_no, const std::string& msg) {
  return std::runtime_error("line " + std::to_string(line_no) + ": " + msg);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

Edge make_edge(long long i, long long j, double w, Index n, std::size_t line_no) {
  if (i < 1 || i > n || j < 1 || j > n)
    throw parse_error(line_no, "vertex index out of range 1.." + std::to_string(n));
  if (!std::isfinite(w)) throw parse_error(line_no, "non-finite edge weight");
  if (w < 0)
    throw parse_error(line_no, "negative edge weight " + std::to_string(w) +
                                   " (graphs with negative weights are not supported)");
  Index a = static_cast<Index>(i - 1);
  Index b = static_cast<Index>(j - 1);
  if (a > b) std::swap(a, b);
  return {a, b, w};
}

Graph read_gset(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  long long n = -1;
  long long m = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    std::istringstream hs(line);
    std::string extra;
    if (!(hs >> n >> m) || (hs >> extra)) throw parse_error(line_no, "malformed header, expected 'n m'");
    break;
  }
  if (n < 0) throw std::runtime_error("empty graph file");
  if (n < 1 || m < 0) throw parse_error(line_no, "malformed header, need n >= 1 and m >= 0");

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    std::istringstream ls(line);
    long long i = 0;
    long long j = 0;
    double w = 0;
    std::string extra;
    if (!(ls >> i >> j >> w) || (ls >> extra)) throw parse_error(line_no, "malformed edge, expected 'i j w'");
    if (i == j) throw parse_error(line_no, "self-loop on vertex " + std::to_string(i));
    edges.push_back(make_edge(i, j, w, static_cast<Index>(n), line_no));
  }
  if (static_cast<long long>(edges.size()) != m)
    throw std::runtime_error("header announces " + std::to_string(m) + " edges but " +
                             std::to_string(edges.size()) + " were found");
  return Graph::from_edges(static_cast<Index>(n), std::move(edges));
}

Graph read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw std::runtime_error("empty graph file");
  ++line_no;
  std::istringstream bs(line);
  std::string banner, object, layout, field, symmetry;
  bs >> banner >> object >> layout >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw parse_error(line_no, "missing %%MatrixMarket banner");
  object = lower(object);
  layout = lower(layout);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix" || layout != "coordinate")
    throw parse_error(line_no, "only 'matrix coordinate' Matrix Market files are supported");
  if (field != "real" && field != "pattern" && field != "integer")
    throw parse_error(line_no, "unsupported field '" + field + "' (expected real, integer or pattern)");
  if (symmetry != "symmetric") throw parse_error(line_no, "adjacency matrix must be declared symmetric");
  const bool pattern = field == "pattern";

  long long rows = -1;
  long long cols = -1;
  long long nnz = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line) || line[0] == '%') continue;
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> nnz)) throw parse_error(line_no, "malformed size line, expected 'rows cols nnz'");
    break;
  }
  if (rows < 1 || cols < 1 || nnz < 0) throw parse_error(line_no, "missing or invalid size line");
  if (rows != cols) throw parse_error(line_no, "adjacency matrix must be square");

  std::vector<Edge> edges;
  long long entries = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line) || line[0] == '%') continue;
    std::istringstream ls(line);
    long long i = 0;
    long long j = 0;
    double w = 1;
    if (!(ls >> i >> j)) throw parse_error(line_no, "malformed entry");
    if (!pattern && !(ls >> w)) throw parse_error(line_no, "missing value");
    ++entries;
    if (i == j) {
      if (i < 1 || i > rows) throw parse_error(line_no, "vertex index out of range");
      continue;
    }
    edges.push_back(make_edge(i, j, w, static_cast<Index>(rows), line_no));
  }
  if (entries != nnz)
    throw std::runtime_error("size line announces " + std::to_string(nnz) + " entries but " +
                             std::to_string(entries) + " were found");
  return Graph::from_edges(static_cast<Index>(rows), std::move(edges));
}

}  // namespace

Graph Graph::from_edges(Index n, std::vector<Edge> edges) {
  if (n < 1) throw std::invalid_argument("graph must have at least one vertex");
  for (auto& e : edges) {
    if (e.i == e.j) throw std::invalid_argument("self-loops are not allowed");
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n) throw std::invalid_argument("edge endpoint out of range");
    if (e.w < 0) throw std::invalid_argument("negative edge weights are not supported");
    if (e.i > e.j) std::swap(e.i, e.j);
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  std::vector<Edge> merged;
  merged.reserve(edges.size());
  for (const auto& e : edges) {
    if (!merged.empty() && merged.back().i == e.i && merged.back().j == e.j)
      merged.back().w += e.w;
    else
      merged.push_back(e);
  }
  Graph g;
  g.n = n;
  g.edges = std::move(merged);
  return g;
}

double Graph::total_weight() const {
  double s = 0;
  for (const auto& e : edges) s += e.w;
  return s;
}

std::vector<double> Graph::degrees() const {
  std::vector<double> deg(static_cast<std::size_t>(n), 0.0);
  for (const auto& e : edges) {
    deg[static_cast<std::size_t>(e.i)] += e.w;
    deg[static_cast<std::size_t>(e.j)] += e.w;
  }
  return deg;
}

double Graph::laplacian_frobenius_norm() const {
  double s = 0;
  for (double d : degrees()) s += d * d;
  for (const auto& e : edges) s += 2 * e.w * e.w;
  return std::sqrt(s);
}

void Graph::laplacian_apply(const double* u, double* out) const {
  std::fill(out, out + n, 0.0);
  for (const auto& e : edges) {
    const double diff = e.w * (u[e.i] - u[e.j]);
    out[e.i] += diff;
    out[e.j] -= diff;
  }
}

bool Graph::is_bipartite() const {
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n));
  for (const auto& e : edges) {
    adj[static_cast<std::size_t>(e.i)].push_back(e.j);
    adj[static_cast<std::size_t>(e.j)].push_back(e.i);
  }
  std::vector<int> color(static_cast<std::size_t>(n), 0);
  for (Index s = 0; s < n; ++s) {
    if (color[static_cast<std::size_t>(s)] != 0) continue;
    color[static_cast<std::size_t>(s)] = 1;
    std::queue<Index> queue;
    queue.push(s);
    while (!queue.empty()) {
      const Index v = queue.front();
      queue.pop();
      for (Index u : adj[static_cast<std::size_t>(v)]) {
        int& cu = color[static_cast<std::size_t>(u)];
        if (cu == 0) {
          cu = -color[static_cast<std::size_t>(v)];
          queue.push(u);
        } else if (cu == color[static_cast<std::size_t>(v)]) {
          return false;
        }
      }
    }
  }
  return true;
}

GraphFormat parse_graph_format(const std::string& name) {
  const std::string s = lower(name);
  if (s == "gset") return GraphFormat::gset;
  if (s == "mm" || s == "matrix_market" || s == "matrixmarket") return GraphFormat::matrix_market;
  throw std::invalid_argument("unknown graph format '" + name + "' (expected gset or mm)");
}

Graph read_graph(std::istream& in, GraphFormat format) {
  return format == GraphFormat::gset ? read_gset(in) : read_matrix_market(in);
}

Graph load_graph(const std::string& path, GraphFormat format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file '" + path + "'");
  try {
    return read_graph(in, format);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

CutResult evaluate_cut(const Graph& g, std::vector<int> chi) {
  if (static_cast<Index>(chi.size()) != g.n) throw std::invalid_argument("evaluate_cut: sign vector has wrong length");
  CutResult r;
  for (const auto& e : g.edges) {
    const int a = chi[static_cast<std::size_t>(e.i)];
    const int b = chi[static_cast<std::size_t>(e.j)];
    if (a != b) r.weight += e.w;
    const double diff = static_cast<double>(a - b);
    r.quad_value += e.w * diff * diff;
  }
  r.chi = std::move(chi);
  return r;
}

CutResult brute_force_maxcut(const Graph& g) {
  constexpr Index kMaxVertices = 22;
  if (g.n > kMaxVertices)
    throw std::invalid_argument("brute_force_maxcut: n = " + std::to_string(g.n) + " exceeds the limit of " +
                                std::to_string(kMaxVertices));
  const auto n = static_cast<std::size_t>(g.n);
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  for (const auto& e : g.edges) {
    adj[static_cast<std::size_t>(e.i)].push_back({static_cast<std::size_t>(e.j), e.w});
    adj[static_cast<std::size_t>(e.j)].push_back({static_cast<std::size_t>(e.i), e.w});
  }

  // Gray-code walk over the first n-1 signs; the last vertex stays at +1.
  std::vector<int> chi(n, 1);
  double weight = 0;
  double best = 0;
  std::vector<int> best_chi = chi;
  const std::uint64_t patterns = n > 1 ? (std::uint64_t{1} << (n - 1)) : 1;
  for (std::uint64_t k = 1; k < patterns; ++k) {
    const auto flip = static_cast<std::size_t>(__builtin_ctzll(k));
    for (const auto& [nb, w] : adj[flip]) weight += chi[flip] == chi[nb] ? w : -w;
    chi[flip] = -chi[flip];
    if (weight > best) {
      best = weight;
      best_chi = chi;
    }
  }
  return evaluate_cut(g, std::move(best_chi));
}

}  // namespace sketchy
