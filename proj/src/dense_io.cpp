#include "sketchy/dense_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sketchy {

namespace {

using nlohmann::json;

Eigen::MatrixXd read_matrix(const json& j, Index n, const std::string& what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != n)
    throw std::invalid_argument(what + " must be an array of " + std::to_string(n) + " rows");
  Eigen::MatrixXd M(n, n);
  for (Index r = 0; r < n; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n)
      throw std::invalid_argument(what + " row " + std::to_string(r) + " must have " + std::to_string(n) +
                                  " entries");
    for (Index c = 0; c < n; ++c) M(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return M;
}

json write_matrix(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

DenseSDP<double> parse_dense_problem(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed problem JSON: ") + e.what());
  }
  try {
    DenseSDP<double> p;
    const Index n = j.at("n").get<Index>();
    const Index d = j.at("d").get<Index>();
    if (n < 1 || d < 1) throw std::invalid_argument("n and d must be >= 1");
    p.trace_set.alpha = j.at("alpha").get<double>();
    const std::string mode = j.value("trace_mode", std::string("equals"));
    if (mode == "equals")
      p.trace_set.mode = TraceMode::equals;
    else if (mode == "at_most")
      p.trace_set.mode = TraceMode::at_most;
    else
      throw std::invalid_argument("trace_mode must be 'equals' or 'at_most'");

    p.C = read_matrix(j.at("C"), n, "C");
    const json& A = j.at("A");
    if (!A.is_array() || static_cast<Index>(A.size()) != d)
      throw std::invalid_argument("A must hold d = " + std::to_string(d) + " matrices");
    for (Index i = 0; i < d; ++i)
      p.A.push_back(read_matrix(A[static_cast<std::size_t>(i)], n, "A[" + std::to_string(i) + "]"));
    const json& b = j.at("b");
    if (!b.is_array() || static_cast<Index>(b.size()) != d)
      throw std::invalid_argument("b must have d = " + std::to_string(d) + " entries");
    p.b.resize(d);
    for (Index i = 0; i < d; ++i) p.b(i) = b[static_cast<std::size_t>(i)].get<double>();

    if (j.contains("cone")) {
      const json& cone = j.at("cone");
      const std::string type = cone.at("type").get<std::string>();
      if (type == "singleton") {
        p.cone.kind = ConeKind::singleton;
      } else if (type == "upper_bound") {
        p.cone.kind = ConeKind::upper_bound;
      } else if (type == "l2ball") {
        p.cone.kind = ConeKind::l2_ball;
        p.cone.radius = cone.at("radius").get<double>();
      } else {
        throw std::invalid_argument("cone type must be singleton, upper_bound or l2ball");
      }
    }
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed problem JSON: ") + e.what());
  }
}

DenseSDP<double> load_dense_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_dense_problem(buf.str());
  } catch (const std::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

std::string dense_problem_to_json(const DenseSDP<double>& dense) {
  json j;
  j["n"] = dense.n();
  j["d"] = dense.d();
  j["alpha"] = dense.trace_set.alpha;
  j["trace_mode"] = dense.trace_set.mode == TraceMode::equals ? "equals" : "at_most";
  j["C"] = write_matrix(dense.C);
  json A = json::array();
  for (const auto& Ai : dense.A) A.push_back(write_matrix(Ai));
  j["A"] = std::move(A);
  j["b"] = std::vector<double>(dense.b.data(), dense.b.data() + dense.b.size());
  json cone;
  switch (dense.cone.kind) {
    case ConeKind::singleton: cone["type"] = "singleton"; break;
    case ConeKind::upper_bound: cone["type"] = "upper_bound"; break;
    case ConeKind::l2_ball:
      cone["type"] = "l2ball";
      cone["radius"] = dense.cone.radius;
      break;
  }
  j["cone"] = std::move(cone);
  return j.dump();
}

}  // namespace sketchy
