// sketchycgal: command-line front end.
//
//   sketchycgal solve-maxcut --graph G.txt [--format gset|mm] [solver flags]
//   sketchycgal solve-generic --problem P.json [solver flags]
//   sketchycgal bruteforce-maxcut --graph G.txt [--format gset|mm]
//   sketchycgal sketch-demo --n N --R R --seed S
//
// Exit status: 0 on a tolerance stop (or success), 2 when the iteration
// budget ran out, 1 on any error.

#include "sketchy/alloc_probe.hpp"
#include "sketchy/dense_io.hpp"
#include "sketchy/diagnostics.hpp"
#include "sketchy/maxcut.hpp"
#include "sketchy/sketchy_cgal.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>

namespace {

using sketchy::Index;
using nlohmann::json;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMaxIters = 2;

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted = true; }

struct Interrupted : std::runtime_error {
  Interrupted() : std::runtime_error("interrupted") {}
};

struct SolverFlags {
  Index R = 10;
  double tol = 0.1;
  Index max_iters = 1000;
  std::uint64_t seed = 0;
  double beta0 = 1;
  std::string dual_bound = "inf";
  std::string trace_path;
  std::string out_path;
  bool no_scale = false;
  bool trace_correct = false;
  bool no_wall_clock = false;
  Index exact_gap_every = 0;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--R", f.R, "sketch size")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--tol", f.tol, "relative stopping tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--max-iters", f.max_iters, "iteration budget")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--seed", f.seed, "random seed")->capture_default_str();
  cmd->add_option("--beta0", f.beta0, "initial smoothing parameter")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--dual-bound", f.dual_bound, "bound K on the dual norm, or 'inf'")->capture_default_str();
  cmd->add_option("--trace", f.trace_path, "per-iteration CSV trace");
  cmd->add_option("--out", f.out_path, "JSON summary and factored solution");
  cmd->add_flag("--no-scale", f.no_scale, "solve the problem as given, without rescaling");
  cmd->add_flag("--trace-correct", f.trace_correct, "restore tr X = alpha in the reconstruction");
  cmd->add_flag("--no-wall-clock", f.no_wall_clock, "write wall_ms = 0 in the trace");
  cmd->add_option("--exact-gap-every", f.exact_gap_every, "log a sharper gap every N iterations")
      ->check(CLI::NonNegativeNumber);
}

double parse_dual_bound(const std::string& s) {
  if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double k = 0;
  try {
    k = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !(k > 0)) throw std::invalid_argument("--dual-bound must be a positive number or 'inf'");
  return k;
}

sketchy::SolveOptions<double> solve_options(const SolverFlags& f) {
  sketchy::SolveOptions<double> opts;
  opts.max_iters = f.max_iters;
  opts.tol = f.tol;
  opts.seed = f.seed;
  opts.beta0 = f.beta0;
  opts.K = parse_dual_bound(f.dual_bound);
  opts.scale = !f.no_scale;
  opts.trace_correction = f.trace_correct;
  opts.record_wall_clock = !f.no_wall_clock;
  opts.exact_gap_every = f.exact_gap_every;
  return opts;
}

json vector_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json solution_json(const sketchy::Reconstruction<double>& rec) {
  json cols = json::array();
  for (Index k = 0; k < rec.U.cols(); ++k) cols.push_back(vector_json(rec.U.col(k)));
  return {{"lambda", vector_json(rec.lambda)}, {"err", vector_json(rec.err)}, {"U_columns", std::move(cols)}};
}

json dimacs_json(const sketchy::DimacsErrors<double>& e) {
  json j = {{"err1", e.err1}, {"err2", e.err2}, {"err3", e.err3},
            {"err4", e.err4}, {"err5", e.err5}, {"exact_eigenvalues", e.exact_eigenvalues}};
  j["err6"] = e.err6 ? json(*e.err6) : json(nullptr);
  return j;
}

// Runs the solver with trace output and interrupt handling. `sign` flips
// objectives for maximization problems.
sketchy::SolveReport<double> run_solver(const sketchy::OperatorSDP<double>& problem, const SolverFlags& flags,
                                        double sign, std::size_t& peak_bytes) {
  auto opts = solve_options(flags);
  std::ofstream trace_file;
  std::unique_ptr<sketchy::TraceWriter> writer;
  if (!flags.trace_path.empty()) {
    trace_file.open(flags.trace_path);
    if (!trace_file) throw std::runtime_error("cannot open trace file '" + flags.trace_path + "'");
    writer = std::make_unique<sketchy::TraceWriter>(trace_file);
  }
  opts.on_iteration = [&](const sketchy::TraceRow& row) {
    if (writer) {
      sketchy::TraceRow r = row;
      r.obj_p *= sign;
      writer->write(r);
    }
    if (g_interrupted) throw Interrupted();
  };
  sketchy::alloc_probe::reset();
  auto report = sketchy::solve(problem, flags.R, opts);
  peak_bytes = sketchy::alloc_probe::peak_above_baseline();
  if (writer) writer->flush();
  return report;
}

json summary_json(const std::string& name, const sketchy::OperatorSDP<double>& p, const SolverFlags& flags,
                  const sketchy::SolveReport<double>& rep, double sign, std::size_t peak_bytes) {
  return {{"problem", name},
          {"n", p.n},
          {"d", p.d},
          {"R", flags.R},
          {"iters", rep.iterations},
          {"stop_reason", sketchy::to_string(rep.stop_reason)},
          {"objective", sign * rep.objective},
          {"infeasibility", rep.infeasibility_rel},
          {"infeasibility_abs", rep.infeasibility_abs},
          {"gap_bound", rep.gap_bound},
          {"wall_ms", flags.no_wall_clock ? 0.0 : rep.wall_ms},
          {"peak_solver_bytes", peak_bytes}};
}

void emit(const json& summary, const json& full, const std::string& out_path) {
  std::cout << summary.dump(2) << '\n';
  if (out_path.empty()) return;
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open output file '" + out_path + "'");
  out << full.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing '" + out_path + "'");
}

int exit_code(const sketchy::SolveReport<double>& rep) {
  return rep.stop_reason == sketchy::StopReason::tolerance ? kExitOk : kExitMaxIters;
}

int cmd_solve_maxcut(const std::string& graph_path, const std::string& format, const SolverFlags& flags) {
  const sketchy::Graph g = sketchy::load_graph(graph_path, sketchy::parse_graph_format(format));
  const auto problem = sketchy::maxcut_problem(g);
  if (flags.R > g.n) throw std::invalid_argument("--R must not exceed the number of vertices");
  std::size_t peak = 0;
  const auto rep = run_solver(problem, flags, -1.0, peak);
  const auto cut = sketchy::maxcut_round(rep.reconstruction.U, g);

  json summary = summary_json("maxcut", problem, flags, rep, -1.0, peak);
  summary["cut_weight"] = cut.weight;
  json full = summary;
  sketchy::GaussianStream rng(flags.seed + 3);
  const Index q = std::min<Index>(g.n, 4 * sketchy::lanczos_schedule(std::max<Index>(rep.iterations, 1), g.n));
  full["dimacs"] = dimacs_json(sketchy::dimacs_errors_matrix_free(
      problem, rep.constraint_value, rep.objective, rep.dual, &rep.reconstruction, q, rng));
  full["solution"] = solution_json(rep.reconstruction);
  full["solution"]["cut"] = cut.chi;
  emit(summary, full, flags.out_path);
  return exit_code(rep);
}

int cmd_solve_generic(const std::string& problem_path, const SolverFlags& flags) {
  const auto dense = sketchy::load_dense_problem(problem_path);
  const auto problem = sketchy::build_dense_problem(dense);
  if (flags.R > dense.n()) throw std::invalid_argument("--R must not exceed n");
  std::size_t peak = 0;
  const auto rep = run_solver(problem, flags, 1.0, peak);
  json summary = summary_json("generic", problem, flags, rep, 1.0, peak);
  json full = summary;
  full["dimacs"] = dimacs_json(sketchy::dimacs_errors(dense, rep.reconstruction.dense(), rep.dual));
  full["solution"] = solution_json(rep.reconstruction);
  emit(summary, full, flags.out_path);
  return exit_code(rep);
}

int cmd_bruteforce(const std::string& graph_path, const std::string& format) {
  const sketchy::Graph g = sketchy::load_graph(graph_path, sketchy::parse_graph_format(format));
  const auto cut = sketchy::brute_force_maxcut(g);
  std::cout << "weight " << cut.weight << "\ncut";
  for (int c : cut.chi) std::cout << ' ' << (c > 0 ? "+1" : "-1");
  std::cout << '\n';
  return kExitOk;
}

// Monte Carlo check of the Nystrom error bound on a psd matrix with spectrum
// k^{-2}: for each rank r, the mean error of the rank-r truncation over
// `trials` sketches next to the best rank-r error and the a priori bound.
int cmd_sketch_demo(Index n, Index R, std::uint64_t seed, int trials) {
  if (R < 1 || R > n) throw std::invalid_argument("sketch-demo: need 1 <= R <= n");
  if (trials < 1) throw std::invalid_argument("sketch-demo: need at least one trial");
  VectorXd lambda(n);
  for (Index k = 0; k < n; ++k) lambda(k) = 1.0 / static_cast<double>((k + 1) * (k + 1));
  sketchy::GaussianStream basis_rng(seed);
  MatrixXd G(n, n);
  basis_rng.fill(G);
  const MatrixXd Q = Eigen::HouseholderQR<MatrixXd>(G).householderQ();
  const MatrixXd X = Q * lambda.asDiagonal() * Q.transpose();

  VectorXd mean_err = VectorXd::Zero(R);
  VectorXd mean_est = VectorXd::Zero(R);
  for (int trial = 0; trial < trials; ++trial) {
    sketchy::NystromSketch<double> sk(n, R, seed + 1 + static_cast<std::uint64_t>(trial));
    // Running average with eta = 1/(k+1) ends at X when each atom carries n * lambda_k.
    for (Index k = 0; k < n; ++k)
      sk.rank_one_update(std::sqrt(lambda(k) * static_cast<double>(n)) * Q.col(k), 1.0 / static_cast<double>(k + 1));
    const auto rec = sk.reconstruct();
    for (Index r = 0; r < R; ++r) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(X - rec.dense(r + 1), Eigen::EigenvaluesOnly);
      mean_err(r) += es.eigenvalues().cwiseAbs().sum() / trials;
      mean_est(r) += rec.err(r) / trials;
    }
  }
  std::printf("%4s %14s %14s %14s %14s\n", "r", "mean_err", "mean_estimate", "best_rank_r", "bound");
  for (Index r = 1; r <= R; ++r) {
    const double tail = lambda.tail(n - r).sum();
    std::printf("%4ld %14.6e %14.6e %14.6e ", static_cast<long>(r), mean_err(r - 1), mean_est(r - 1), tail);
    if (r < R - 1)
      std::printf("%14.6e\n", (1 + static_cast<double>(r) / static_cast<double>(R - r - 1)) * tail);
    else
      std::printf("%14s\n", "-");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SketchyCGAL solver for trace-constrained semidefinite programs"};
  app.require_subcommand(1);

  SolverFlags maxcut_flags;
  std::string graph_path;
  std::string graph_format = "gset";
  auto* maxcut = app.add_subcommand("solve-maxcut", "solve the MaxCut SDP of a graph");
  maxcut->add_option("--graph", graph_path, "graph file")->required()->check(CLI::ExistingFile);
  maxcut->add_option("--format", graph_format, "gset or mm")->check(CLI::IsMember({"gset", "mm"}))->capture_default_str();
  add_solver_flags(maxcut, maxcut_flags);

  SolverFlags generic_flags;
  std::string problem_path;
  auto* generic = app.add_subcommand("solve-generic", "solve a dense SDP given as JSON");
  generic->add_option("--problem", problem_path, "problem JSON")->required()->check(CLI::ExistingFile);
  add_solver_flags(generic, generic_flags);

  std::string bf_graph;
  std::string bf_format = "gset";
  auto* brute = app.add_subcommand("bruteforce-maxcut", "exact MaxCut by enumeration (n <= 22)");
  brute->add_option("--graph", bf_graph, "graph file")->required()->check(CLI::ExistingFile);
  brute->add_option("--format", bf_format, "gset or mm")->check(CLI::IsMember({"gset", "mm"}))->capture_default_str();

  Index demo_n = 50;
  Index demo_R = 12;
  std::uint64_t demo_seed = 0;
  int demo_trials = 20;
  auto* demo = app.add_subcommand("sketch-demo", "Nystrom sketch error table");
  demo->add_option("--n", demo_n, "dimension")->check(CLI::PositiveNumber)->capture_default_str();
  demo->add_option("--R", demo_R, "sketch size")->check(CLI::PositiveNumber)->capture_default_str();
  demo->add_option("--seed", demo_seed, "random seed")->capture_default_str();
  demo->add_option("--trials", demo_trials, "number of sketches")->check(CLI::PositiveNumber)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  std::signal(SIGINT, on_sigint);
  try {
    if (*maxcut) return cmd_solve_maxcut(graph_path, graph_format, maxcut_flags);
    if (*generic) return cmd_solve_generic(problem_path, generic_flags);
    if (*brute) return cmd_bruteforce(bf_graph, bf_format);
    if (*demo) return cmd_sketch_demo(demo_n, demo_R, demo_seed, demo_trials);
  } catch (const Interrupted&) {
    std::cerr << "error: interrupted, partial trace kept\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
