#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tdtsp/error.hpp"

namespace tdtsp::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// min c.z  s.t.  A z = b,  lower <= z <= upper  (sparse rows).
struct LinearProgram {
  struct Entry {
    std::size_t col;
    double value;
  };
  struct Row {
    std::vector<Entry> entries;
    double rhs = 0.0;
    std::string name;
  };

  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::string> col_names;
  std::vector<Row> rows;

  std::size_t cols() const { return cost.size(); }

  std::size_t add_column(double c, double lo, double hi, std::string name = {}) {
    cost.push_back(c);
    lower.push_back(lo);
    upper.push_back(hi);
    col_names.push_back(name.empty() ? "z" + std::to_string(cost.size() - 1) : std::move(name));
    return cost.size() - 1;
  }

  void add_row(std::vector<Entry> entries, double rhs, std::string name = {}) {
    if (name.empty()) name = "r" + std::to_string(rows.size());
    rows.push_back({std::move(entries), rhs, std::move(name)});
  }

  void validate() const {
    if (lower.size() != cols() || upper.size() != cols() || col_names.size() != cols())
      throw ParameterError("linear program column arrays disagree in size");
    for (std::size_t j = 0; j < cols(); ++j) {
      if (!std::isfinite(cost[j])) throw ParameterError("non-finite cost in column " + col_names[j]);
      if (lower[j] > upper[j]) throw ParameterError("lower > upper in column " + col_names[j]);
    }
    for (const auto& r : rows) {
      if (!std::isfinite(r.rhs)) throw ParameterError("non-finite rhs in row " + r.name);
      for (const auto& e : r.entries)
        if (e.col >= cols() || !std::isfinite(e.value)) throw ParameterError("bad entry in row " + r.name);
    }
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration-limit";
  }
  return "?";
}

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::size_t iterations = 0;
};

}  // namespace tdtsp::lp
