#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "tdtsp/config.hpp"
#include "tdtsp/error.hpp"
#include "tdtsp/fit/omega.hpp"
#include "tdtsp/graph.hpp"

namespace tdtsp::fit {

// One fitting row (arc, k): departure T_k, tau(T_k), and the nonzero run of
// coefficients a_{ijkh} for h = first, first+1, ...
struct CoefficientRow {
  double start = 0.0;
  double tau = 0.0;
  std::size_t first = 0;
  std::vector<double> values;

  double at(std::size_t h) const {
    return (h >= first && h - first < values.size()) ? values[h - first] : 0.0;
  }
};

struct ArcRows {
  Vertex from = 0;
  Vertex to = 0;
  std::vector<CoefficientRow> rows;
};

// Sparse a_{ijkh} over the union grid; arcs ordered (i, j) lexicographically, i != j.
struct CoefficientMatrix {
  std::size_t customers = 0;
  TimeGrid grid;
  std::vector<ArcRows> arcs;

  std::size_t arc_count() const { return arcs.size(); }
  std::size_t intervals() const { return grid.intervals(); }
  std::size_t total_rows() const {
    std::size_t r = 0;
    for (const auto& a : arcs) r += a.rows.size();
    return r;
  }
  double coefficient(std::size_t arc, std::size_t k, std::size_t h) const { return arcs[arc].rows[k].at(h); }

  std::size_t arc_index(Vertex i, Vertex j) const { return i * customers + (j < i ? j : j - 1); }
};

// a_{ijkh} = min(T_{h+1} - T_h, max(0, T_k + tau_ij(T_k) - T_h)) for T_h >= T_k,
// 0 otherwise. The last interval is open-ended so arrivals past T are charged
// at y_{H-1}; a departure at T itself is charged entirely to the last interval.
inline CoefficientRow coefficient_row(const TimeGrid& grid, double start, double tau) {
  CoefficientRow row;
  row.start = start;
  row.tau = tau;
  const std::size_t H = grid.intervals();
  const double end = start + tau;
  row.first = grid.interval_of(start);
  for (std::size_t h = row.first; h < H; ++h) {
    const double lo = std::max(grid[h], start);
    if (h > row.first && lo >= end) break;
    const double width = (h + 1 == H) ? std::numeric_limits<double>::infinity() : grid[h + 1] - lo;
    row.values.push_back(std::min(width, std::max(0.0, end - lo)));
  }
  while (row.values.size() > 1 && row.values.back() == 0.0) row.values.pop_back();
  return row;
}

inline CoefficientMatrix build_coefficients(const TimeDependentGraph& g, const OmegaSelection& sel) {
  if (sel.vertices() != g.vertices()) throw ConfigError("omega selection does not match the graph's vertex count");
  if (sel.horizon() != g.horizon()) throw ConfigError("omega selection horizon differs from the graph horizon");
  CoefficientMatrix co;
  co.customers = g.customers();
  co.grid = sel.grid();
  co.arcs.reserve(g.arc_count());
  for (Vertex i = 0; i < g.vertices(); ++i) {
    for (Vertex j = 0; j < g.vertices(); ++j) {
      if (i == j) continue;
      ArcRows arc{i, j, {}};
      const auto& f = g.arc(i, j);
      for (double t : sel.node_set(i)) arc.rows.push_back(coefficient_row(co.grid, t, f(t)));
      co.arcs.push_back(std::move(arc));
    }
  }
  return co;
}

}  // namespace tdtsp::fit
