#pragma once

#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tdtsp/error.hpp"
#include "tdtsp/time_grid.hpp"
#include "tdtsp/travel_time.hpp"

namespace tdtsp {

using Vertex = std::size_t;

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

// Visiting order of customers 1..n; the depot 0 is implicit at both ends.
struct Tour {
  std::vector<Vertex> order;

  // depot, order..., depot
  std::vector<Vertex> closed() const {
    std::vector<Vertex> p;
    p.reserve(order.size() + 2);
    p.push_back(0);
    p.insert(p.end(), order.begin(), order.end());
    p.push_back(0);
    return p;
  }

  bool is_valid(std::size_t n) const {
    if (order.size() != n) return false;
    std::vector<char> seen(n + 1, 0);
    for (Vertex v : order) {
      if (v == 0 || v > n || seen[v]) return false;
      seen[v] = 1;
    }
    return true;
  }

  bool operator==(const Tour&) const = default;
  auto operator<=>(const Tour&) const = default;
};

// Complete digraph on {0 (depot), 1..n} with FIFO travel-time functions.
class TimeDependentGraph {
 public:
  TimeDependentGraph() = default;

  // `arcs` is row-major over (i, j) in (n+1)x(n+1); diagonal entries are ignored.
  TimeDependentGraph(std::size_t customers, double horizon, std::vector<TravelTimeFunction> arcs,
                     std::vector<Point> coordinates = {})
      : n_(customers), horizon_(horizon), arcs_(std::move(arcs)), coords_(std::move(coordinates)) {
    const std::size_t V = n_ + 1;
    if (n_ < 1) throw ParameterError("graph needs at least one customer");
    if (!(horizon_ > 0)) throw ParameterError("horizon must be positive");
    if (arcs_.size() != V * V) throw ParameterError("arc table must have (n+1)^2 entries");
    if (coords_.empty()) coords_.assign(V, Point{});
    if (coords_.size() != V) throw ParameterError("coordinates must cover every vertex");
    for (Vertex i = 0; i < V; ++i) {
      for (Vertex j = 0; j < V; ++j) {
        if (i == j) continue;
        const auto& f = arcs_[i * V + j];
        const std::string tag = "arc (" + std::to_string(i) + "," + std::to_string(j) + ")";
        if (f.samples().empty()) throw ParameterError(tag + " has no samples");
        if (f.samples().size() > 1 && f.end_time() != horizon_)
          throw ParameterError(tag + " samples must end at the horizon");
        if (f.min_value() <= 0.0) throw ParameterError(tag + " has a non-positive travel time");
        if (!validate_fifo(f).empty()) throw ParameterError(tag + " violates FIFO");
      }
    }
  }

  std::size_t customers() const { return n_; }
  std::size_t vertices() const { return n_ + 1; }
  std::size_t arc_count() const { return n_ * (n_ + 1); }
  double horizon() const { return horizon_; }

  const TravelTimeFunction& arc(Vertex i, Vertex j) const { return arcs_[i * (n_ + 1) + j]; }
  double travel_time(Vertex i, Vertex j, double t) const { return arc(i, j)(t); }

  std::span<const Point> coordinates() const { return coords_; }
  std::span<const TravelTimeFunction> arc_table() const { return arcs_; }

  bool operator==(const TimeDependentGraph&) const = default;

 private:
  std::size_t n_ = 0;
  double horizon_ = 0.0;
  std::vector<TravelTimeFunction> arcs_;
  std::vector<Point> coords_;
};

namespace detail {

inline void check_path(std::span<const Vertex> path, std::size_t vertex_count, double t0) {
  if (t0 < 0.0) throw DomainError("path start time must be nonnegative");
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (path[k] >= vertex_count)
      throw InvalidPathError("vertex " + std::to_string(path[k]) + " out of range");
    if (k > 0 && path[k] == path[k - 1])
      throw InvalidPathError("repeated consecutive vertex " + std::to_string(path[k]));
  }
}

}  // namespace detail

// Duration z(p, t0) of a vertex sequence departing at t0; each arc is entered
// at the absolute time t0 + z(p_{k-1}, t0).
inline double path_duration(const TimeDependentGraph& g, std::span<const Vertex> path, double t0) {
  detail::check_path(path, g.vertices(), t0);
  double t = t0;
  for (std::size_t k = 1; k < path.size(); ++k) t += g.travel_time(path[k - 1], path[k], t);
  return t - t0;
}

// TDTSP objective: depot -> order -> depot departing at 0.
inline double tour_duration(const TimeDependentGraph& g, const Tour& tour) {
  if (!tour.is_valid(g.customers())) throw InvalidPathError("not a Hamiltonian tour");
  const auto p = tour.closed();
  return path_duration(g, p, 0.0);
}

// Arrival time at each position of the closed tour (index 0 is the depot at t = 0).
inline std::vector<double> tour_arrivals(const TimeDependentGraph& g, const Tour& tour) {
  if (!tour.is_valid(g.customers())) throw InvalidPathError("not a Hamiltonian tour");
  const auto p = tour.closed();
  std::vector<double> at(p.size(), 0.0);
  for (std::size_t k = 1; k < p.size(); ++k) at[k] = at[k - 1] + g.travel_time(p[k - 1], p[k], at[k - 1]);
  return at;
}

}  // namespace tdtsp
