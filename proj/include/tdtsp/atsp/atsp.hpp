#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "tdtsp/config.hpp"
#include "tdtsp/error.hpp"
#include "tdtsp/graph.hpp"

namespace tdtsp::atsp {

inline constexpr double kForbidden = std::numeric_limits<double>::infinity();
inline constexpr std::size_t kMaxVertices = 60;
inline constexpr std::size_t kBruteForceCustomers = 9;

// Square cost matrix over {0, 1..n}; the diagonal is forbidden.
class CostMatrix {
 public:
  CostMatrix() = default;

  explicit CostMatrix(std::size_t vertices, double fill = 0.0) : v_(vertices), c_(vertices * vertices, fill) {
    if (v_ < 2) throw ParameterError("cost matrix needs at least two vertices");
    for (std::size_t i = 0; i < v_; ++i) c_[i * v_ + i] = kForbidden;
  }

  CostMatrix(std::size_t vertices, std::vector<double> row_major) : v_(vertices), c_(std::move(row_major)) {
    if (v_ < 2) throw ParameterError("cost matrix needs at least two vertices");
    if (c_.size() != v_ * v_) throw ParameterError("cost matrix data must have V*V entries");
    for (std::size_t i = 0; i < v_; ++i)
      for (std::size_t j = 0; j < v_; ++j) {
        double& x = c_[i * v_ + j];
        if (i == j) {
          x = kForbidden;
        } else if (!std::isfinite(x) || x < 0.0) {
          throw ParameterError("off-diagonal cost (" + std::to_string(i) + "," + std::to_string(j) +
                               ") must be finite and nonnegative");
        }
      }
  }

  std::size_t vertices() const { return v_; }
  std::size_t customers() const { return v_ - 1; }
  double operator()(std::size_t i, std::size_t j) const { return c_[i * v_ + j]; }
  void set(std::size_t i, std::size_t j, double x) {
    if (i != j) c_[i * v_ + j] = x;
  }

  CostMatrix scaled(double alpha) const {
    CostMatrix m = *this;
    for (std::size_t i = 0; i < v_; ++i)
      for (std::size_t j = 0; j < v_; ++j)
        if (i != j) m.c_[i * v_ + j] *= alpha;
    return m;
  }

 private:
  std::size_t v_ = 0;
  std::vector<double> c_;
};

// Cost of depot -> order -> depot, summed in visiting order.
inline double tour_cost(const CostMatrix& c, const Tour& t) {
  double s = 0.0;
  Vertex prev = 0;
  for (Vertex v : t.order) {
    s += c(prev, v);
    prev = v;
  }
  return s + c(prev, 0);
}

struct Assignment {
  std::vector<std::size_t> succ;  // succ[i] = column assigned to row i
  double cost = 0.0;
};

// Hungarian algorithm (shortest augmenting paths with potentials), O(V^3).
// Forbidden entries are +inf; throws InfeasibleError if no finite perfect matching exists.
inline Assignment solve_assignment(const CostMatrix& c) {
  const std::size_t n = c.vertices();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cij = c(i0 - 1, j - 1);
        if (std::isfinite(cij)) {
          const double cur = cij - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (!std::isfinite(delta)) throw InfeasibleError("assignment problem has no finite perfect matching");
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment a;
  a.succ.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) a.succ[p[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) a.cost += c(i, a.succ[i]);
  return a;
}

// Cycles of a successor permutation, each starting at its smallest vertex,
// listed by that vertex.
inline std::vector<std::vector<std::size_t>> cycles_of(const std::vector<std::size_t>& succ) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<char> seen(succ.size(), 0);
  for (std::size_t s = 0; s < succ.size(); ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> cyc;
    for (std::size_t v = s; !seen[v]; v = succ[v]) {
      seen[v] = 1;
      cyc.push_back(v);
    }
    out.push_back(std::move(cyc));
  }
  return out;
}

struct AtspSolution {
  Tour tour;
  double cost = 0.0;
  std::size_t nodes_explored = 0;
  bool proof = false;
};

namespace detail {

struct Arc {
  std::size_t from, to;
};

struct Node {
  double bound;
  std::size_t depth;
  std::size_t id;
  std::vector<Arc> excluded, included;
  std::vector<std::size_t> succ;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

inline bool solve_node(const CostMatrix& base, Node& node) {
  CostMatrix c = base;
  for (const auto& e : node.excluded) c.set(e.from, e.to, kForbidden);
  for (const auto& e : node.included) {
    for (std::size_t j = 0; j < c.vertices(); ++j)
      if (j != e.to) c.set(e.from, j, kForbidden);
    for (std::size_t i = 0; i < c.vertices(); ++i)
      if (i != e.from) c.set(i, e.to, kForbidden);
  }
  try {
    auto a = solve_assignment(c);
    node.bound = a.cost;
    node.succ = std::move(a.succ);
    return true;
  } catch (const InfeasibleError&) {
    return false;
  }
}

inline Tour tour_from_succ(const std::vector<std::size_t>& succ) {
  Tour t;
  for (std::size_t v = succ[0]; v != 0; v = succ[v]) t.order.push_back(v);
  return t;
}

}  // namespace detail

// Exact ATSP by branch-and-bound on the assignment relaxation. A node whose
// assignment has subtours branches on the shortest one (ties: the one with the
// smallest vertex): with free arcs a_1..a_r of that cycle in order, child q
// excludes a_q and includes a_1..a_{q-1}. Nodes are expanded best-first by
// bound, deeper first on ties.
inline AtspSolution solve_atsp(const CostMatrix& c) {
  if (c.vertices() > kMaxVertices)
    throw CapacityError("ATSP with " + std::to_string(c.vertices()) + " vertices exceeds the limit of " +
                        std::to_string(kMaxVertices));
  const double tol = Tolerances::cost_compare;
  AtspSolution best;
  best.cost = std::numeric_limits<double>::infinity();

  std::priority_queue<detail::Node, std::vector<detail::Node>, detail::NodeOrder> open;
  std::size_t next_id = 0;
  detail::Node root{0.0, 0, next_id++, {}, {}, {}};
  if (!detail::solve_node(c, root)) throw InfeasibleError("ATSP has no feasible tour");
  open.push(std::move(root));

  while (!open.empty()) {
    detail::Node node = open.top();
    open.pop();
    if (node.bound >= best.cost - tol) break;  // best-first: nothing left can improve
    ++best.nodes_explored;
    auto cycles = cycles_of(node.succ);
    if (cycles.size() == 1) {
      Tour t = detail::tour_from_succ(node.succ);
      const double cost = tour_cost(c, t);
      if (cost < best.cost) {
        best.cost = cost;
        best.tour = std::move(t);
      }
      continue;
    }
    const auto& cyc = *std::min_element(cycles.begin(), cycles.end(),
                                        [](const auto& a, const auto& b) { return a.size() < b.size(); });
    std::vector<detail::Arc> free_arcs;
    for (std::size_t k = 0; k < cyc.size(); ++k) {
      const detail::Arc a{cyc[k], cyc[(k + 1) % cyc.size()]};
      const bool fixed = std::any_of(node.included.begin(), node.included.end(),
                                     [&](const detail::Arc& e) { return e.from == a.from && e.to == a.to; });
      if (!fixed) free_arcs.push_back(a);
    }
    for (std::size_t q = 0; q < free_arcs.size(); ++q) {
      detail::Node child{0.0, node.depth + 1, next_id++, node.excluded, node.included, {}};
      child.excluded.push_back(free_arcs[q]);
      for (std::size_t r = 0; r < q; ++r) child.included.push_back(free_arcs[r]);
      if (!detail::solve_node(c, child)) continue;
      if (child.bound >= best.cost - tol) continue;
      open.push(std::move(child));
    }
  }
  if (!std::isfinite(best.cost)) throw InfeasibleError("ATSP has no feasible tour");
  best.proof = true;
  return best;
}

// Exhaustive enumeration in lexicographic order; the first optimum found wins.
inline AtspSolution brute_force_atsp(const CostMatrix& c) {
  const std::size_t n = c.customers();
  if (n > kBruteForceCustomers)
    throw CapacityError("brute-force ATSP is limited to " + std::to_string(kBruteForceCustomers) + " customers");
  Tour t;
  for (std::size_t v = 1; v <= n; ++v) t.order.push_back(v);
  AtspSolution best;
  best.cost = std::numeric_limits<double>::infinity();
  do {
    ++best.nodes_explored;
    const double cost = tour_cost(c, t);
    if (cost < best.cost) {
      best.cost = cost;
      best.tour = t;
    }
  } while (std::next_permutation(t.order.begin(), t.order.end()));
  best.proof = true;
  return best;
}

}  // namespace tdtsp::atsp
