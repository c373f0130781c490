#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tdtsp/error.hpp"
#include "tdtsp/graph.hpp"

namespace tdtsp::learn {

inline double squared_distance(const Point& a, const Point& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// K zones; a point belongs to its nearest centroid (lowest index on ties).
struct Zoning {
  std::vector<Point> centroids;
  std::vector<double> objective_trace;  // after each assignment step
  std::size_t iterations = 0;

  std::size_t zones() const { return centroids.size(); }

  std::size_t zone_of(const Point& p) const {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centroids.size(); ++k) {
      const double d = squared_distance(p, centroids[k]);
      if (d < bd) bd = d, best = k;
    }
    return best;
  }

  // n_k: customers of g (the depot excluded) per zone.
  std::vector<double> counts(const TimeDependentGraph& g) const {
    std::vector<double> c(zones(), 0.0);
    auto pts = g.coordinates();
    for (Vertex i = 1; i < pts.size(); ++i) c[zone_of(pts[i])] += 1.0;
    return c;
  }
};

inline double kmeans_objective(std::span<const Point> pts, const std::vector<Point>& centroids,
                               const std::vector<std::size_t>& assign) {
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) s += squared_distance(pts[i], centroids[assign[i]]);
  return s;
}

inline constexpr std::size_t kKmeansMaxIterations = 300;

// Lloyd iterations from a k-means++ start, until the assignment is a fixpoint
// or 300 iterations. An empty cluster keeps its previous centroid.
inline Zoning kmeans_fit(std::span<const Point> pts, std::size_t K, std::uint64_t seed) {
  if (K == 0) throw ParameterError("K must be at least 1");
  if (K > pts.size())
    throw ParameterError("K = " + std::to_string(K) + " exceeds the number of points (" +
                         std::to_string(pts.size()) + ")");
  std::mt19937_64 rng(seed);
  Zoning z;
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  z.centroids.push_back(pts[pick(rng)]);
  std::vector<double> d2(pts.size());
  while (z.centroids.size() < K) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : z.centroids) best = std::min(best, squared_distance(pts[i], c));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) throw ParameterError("fewer distinct points than K");
    std::uniform_real_distribution<double> U(0.0, total);
    double r = U(rng);
    std::size_t chosen = pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (d2[i] <= 0.0) continue;
      chosen = i;
      if (r < d2[i]) break;
      r -= d2[i];
    }
    z.centroids.push_back(pts[chosen]);
  }

  std::vector<std::size_t> assign(pts.size(), K);
  for (std::size_t it = 0; it < kKmeansMaxIterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::size_t k = z.zone_of(pts[i]);
      if (k != assign[i]) assign[i] = k, changed = true;
    }
    z.objective_trace.push_back(kmeans_objective(pts, z.centroids, assign));
    z.iterations = it + 1;
    if (!changed) break;
    std::vector<Point> sum(K);
    std::vector<std::size_t> cnt(K, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      sum[assign[i]].x += pts[i].x;
      sum[assign[i]].y += pts[i].y;
      ++cnt[assign[i]];
    }
    for (std::size_t k = 0; k < K; ++k)
      if (cnt[k] > 0) z.centroids[k] = {sum[k].x / static_cast<double>(cnt[k]), sum[k].y / static_cast<double>(cnt[k])};
  }
  return z;
}

}  // namespace tdtsp::learn
