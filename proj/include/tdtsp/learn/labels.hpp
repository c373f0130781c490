#pragma once

#include <cstddef>
#include <vector>

#include "tdtsp/graph.hpp"
#include "tdtsp/learn/kmeans.hpp"

namespace tdtsp::learn {

// Zone occupancy and per-zone mean arrival time of one solved instance.
struct TrainingExample {
  std::vector<double> counts;   // n_k
  std::vector<double> targets;  // ZETA_k, 0 where masked
  std::vector<char> mask;       // 1 = zone visited, target defined

  std::size_t zones() const { return counts.size(); }
};

inline TrainingExample make_labels(const TimeDependentGraph& g, const Tour& tour, const Zoning& z) {
  const auto at = tour_arrivals(g, tour);
  const std::size_t K = z.zones();
  TrainingExample ex{std::vector<double>(K, 0.0), std::vector<double>(K, 0.0), std::vector<char>(K, 0)};
  auto pts = g.coordinates();
  for (std::size_t pos = 0; pos < tour.order.size(); ++pos) {
    const std::size_t k = z.zone_of(pts[tour.order[pos]]);
    ex.counts[k] += 1.0;
    ex.targets[k] += at[pos + 1];
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (ex.counts[k] > 0.0) {
      ex.targets[k] /= ex.counts[k];
      ex.mask[k] = 1;
    }
  }
  return ex;
}

}  // namespace tdtsp::learn
