#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tdtsp/error.hpp"

namespace tdtsp {

// Partition 0 = T_0 < T_1 < ... < T_H = T of the planning horizon.
class TimeGrid {
 public:
  TimeGrid() = default;

  explicit TimeGrid(std::vector<double> breakpoints) : points_(std::move(breakpoints)) {
    if (points_.size() < 2) throw ParameterError("time grid needs at least two breakpoints");
    if (points_.front() != 0.0) throw ParameterError("time grid must start at 0");
    for (std::size_t h = 0; h < points_.size(); ++h) {
      if (!std::isfinite(points_[h])) throw ParameterError("time grid breakpoint is not finite");
      if (h > 0 && !(points_[h] > points_[h - 1]))
        throw ParameterError("time grid breakpoints must be strictly increasing (index " +
                             std::to_string(h) + ")");
    }
  }

  // Evenly spaced grid with `periods` intervals on [0, horizon].
  static TimeGrid uniform(double horizon, std::size_t periods) {
    if (periods == 0 || !(horizon > 0)) throw ParameterError("uniform grid needs periods >= 1 and T > 0");
    std::vector<double> pts(periods + 1);
    for (std::size_t h = 0; h <= periods; ++h)
      pts[h] = horizon * static_cast<double>(h) / static_cast<double>(periods);
    pts.back() = horizon;
    return TimeGrid(std::move(pts));
  }

  double horizon() const { return points_.back(); }
  std::size_t intervals() const { return points_.size() - 1; }
  std::span<const double> breakpoints() const { return points_; }
  double operator[](std::size_t h) const { return points_[h]; }
  double width(std::size_t h) const { return points_[h + 1] - points_[h]; }

  // Interval containing t under half-open [T_h, T_{h+1}); t >= T maps to the last one.
  std::size_t interval_of(double t) const {
    if (t >= horizon()) return intervals() - 1;
    auto it = std::upper_bound(points_.begin(), points_.end(), t);
    if (it == points_.begin()) return 0;
    return static_cast<std::size_t>(it - points_.begin()) - 1;
  }

  double min_width() const {
    double w = width(0);
    for (std::size_t h = 1; h < intervals(); ++h) w = std::min(w, width(h));
    return w;
  }

  bool operator==(const TimeGrid&) const = default;

 private:
  std::vector<double> points_;
};

}  // namespace tdtsp
