#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tdtsp/error.hpp"
#include "tdtsp/graph.hpp"

namespace tdtsp::oracle {

inline constexpr std::size_t kMaxDpCustomers = 16;
inline constexpr std::size_t kMaxBruteForceCustomers = 9;

struct ExactResult {
  Tour tour;
  double duration = 0.0;
};

// Earliest-arrival DP over (visited subset, last customer), departing the depot
// at 0. FIFO makes the earliest arrival at a state dominate every later one.
// Arrival times are accumulated exactly like path_duration, so the returned
// duration is bit-identical to tour_duration of the returned tour.
//
// Tie-break: among optimal tours whose every prefix reaches its state at the
// state's earliest arrival time, the lexicographically smallest one.
inline ExactResult solve_tdtsp_exact(const TimeDependentGraph& g) {
  const std::size_t n = g.customers();
  if (n > kMaxDpCustomers)
    throw CapacityError("exact DP is limited to " + std::to_string(kMaxDpCustomers) + " customers");
  for (Vertex i = 0; i <= n; ++i)
    for (Vertex j = 0; j <= n; ++j)
      if (i != j && !validate_fifo(g.arc(i, j)).empty())
        throw ParameterError("exact DP refuses non-FIFO arc (" + std::to_string(i) + "," + std::to_string(j) + ")");

  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t S = std::size_t{1} << n;
  auto idx = [n](std::size_t mask, std::size_t last) { return mask * n + last; };  // last is 0-based customer
  std::vector<double> arr(S * n, inf);
  for (std::size_t j = 0; j < n; ++j) {
    double t = 0.0;
    t += g.travel_time(0, j + 1, t);
    arr[idx(std::size_t{1} << j, j)] = t;
  }
  for (std::size_t mask = 1; mask < S; ++mask)
    for (std::size_t j = 0; j < n; ++j) {
      const double a = arr[idx(mask, j)];
      if (a == inf) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (mask >> k & 1) continue;
        double t = a;
        t += g.travel_time(j + 1, k + 1, t);
        double& dst = arr[idx(mask | std::size_t{1} << k, k)];
        if (t < dst) dst = t;
      }
    }

  const std::size_t full = S - 1;
  double best = inf;
  for (std::size_t j = 0; j < n; ++j) {
    double t = arr[idx(full, j)];
    t += g.travel_time(j + 1, 0, t);
    best = std::min(best, t);
  }

  // good[s]: state s lies on an optimal tour made of earliest-arrival prefixes
  std::vector<char> good(S * n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    double t = arr[idx(full, j)];
    t += g.travel_time(j + 1, 0, t);
    good[idx(full, j)] = t == best;
  }
  for (std::size_t mask = full; mask-- > 1;)
    for (std::size_t j = 0; j < n; ++j) {
      const double a = arr[idx(mask, j)];
      if (a == inf) continue;
      for (std::size_t k = 0; k < n && !good[idx(mask, j)]; ++k) {
        if (mask >> k & 1) continue;
        const std::size_t nxt = idx(mask | std::size_t{1} << k, k);
        double t = a;
        t += g.travel_time(j + 1, k + 1, t);
        if (good[nxt] && t == arr[nxt]) good[idx(mask, j)] = 1;
      }
    }

  ExactResult res;
  res.duration = best;
  std::size_t mask = 0, last = 0;
  double t_last = 0.0;
  for (std::size_t step = 0; step < n; ++step) {
    for (std::size_t k = 0; k < n; ++k) {
      if (mask >> k & 1) continue;
      const std::size_t nxt = idx(mask | std::size_t{1} << k, k);
      double t = t_last;
      t += g.travel_time(step == 0 ? 0 : last + 1, k + 1, t);
      if (good[nxt] && t == arr[nxt]) {
        mask |= std::size_t{1} << k;
        last = k;
        t_last = t;
        res.tour.order.push_back(k + 1);
        break;
      }
    }
  }
  if (res.tour.order.size() != n) throw InfeasibleError("exact DP failed to rebuild its tour");
  return res;
}

// Enumerates all n! tours in lexicographic order; the first optimum wins.
inline ExactResult brute_force_tdtsp(const TimeDependentGraph& g) {
  const std::size_t n = g.customers();
  if (n > kMaxBruteForceCustomers)
    throw CapacityError("brute force is limited to " + std::to_string(kMaxBruteForceCustomers) + " customers");
  Tour t;
  for (Vertex v = 1; v <= n; ++v) t.order.push_back(v);
  ExactResult best;
  best.duration = std::numeric_limits<double>::infinity();
  do {
    const double d = tour_duration(g, t);
    if (d < best.duration) {
      best.duration = d;
      best.tour = t;
    }
  } while (std::next_permutation(t.order.begin(), t.order.end()));
  return best;
}

}  // namespace tdtsp::oracle
