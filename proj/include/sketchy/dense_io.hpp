#pragma once

// JSON format for explicit dense instances:
//   {"n": int, "d": int, "alpha": float, "trace_mode": "equals" | "at_most",
//    "C": [[...]], "A": [[[...]], ...], "b": [...],
//    "cone": {"type": "singleton" | "upper_bound" | "l2ball", "radius": float}}
// Matrices are row-major and symmetric.

#include "sketchy/problem.hpp"

#include <string>

namespace sketchy {

DenseSDP<double> parse_dense_problem(const std::string& json_text);
DenseSDP<double> load_dense_problem(const std::string& path);
std::string dense_problem_to_json(const DenseSDP<double>& dense);

}  // namespace sketchy
