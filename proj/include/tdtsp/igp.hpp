#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tdtsp/error.hpp"
#include "tdtsp/graph.hpp"
#include "tdtsp/time_grid.hpp"
#include "tdtsp/travel_time.hpp"

namespace tdtsp {

// Stepwise speed v(t) = v_h on [T_h, T_{h+1}), extended by v_{H-1} beyond T.
class SpeedProfile {
 public:
  SpeedProfile() = default;

  SpeedProfile(TimeGrid grid, std::vector<double> speeds) : grid_(std::move(grid)), speeds_(std::move(speeds)) {
    if (speeds_.size() != grid_.intervals())
      throw ParameterError("speed profile needs one speed per grid interval");
    for (std::size_t h = 0; h < speeds_.size(); ++h)
      if (!(speeds_[h] > 0.0) || !std::isfinite(speeds_[h]))
        throw ParameterError("speed " + std::to_string(h) + " must be positive and finite");
  }

  const TimeGrid& grid() const { return grid_; }
  std::span<const double> speeds() const { return speeds_; }
  double speed(std::size_t h) const { return speeds_[h]; }
  double final_speed() const { return speeds_.back(); }
  double speed_at(double t) const { return speeds_[grid_.interval_of(t)]; }

  // Integral of v over [a, b], a <= b.
  double integral(double a, double b) const {
    double acc = 0.0;
    const std::size_t H = grid_.intervals();
    for (std::size_t h = grid_.interval_of(a); h < H && a < b; ++h) {
      const double hi = (h + 1 == H) ? b : std::min(b, grid_[h + 1]);
      if (hi > a) acc += speeds_[h] * (hi - a);
      a = hi;
    }
    return acc;
  }

  bool operator==(const SpeedProfile&) const = default;

 private:
  TimeGrid grid_;
  std::vector<double> speeds_;
};

// IGP travel time for an arc of length `length` entered at t: consume the
// length at v_k until the period boundary, then continue in the next period.
inline double igp_travel_time(const SpeedProfile& profile, double length, double t) {
  if (t < 0.0 || std::isnan(t)) throw DomainError("IGP travel time requested at negative time");
  const TimeGrid& grid = profile.grid();
  const std::size_t H = grid.intervals();
  if (t >= grid.horizon()) return length / profile.final_speed();
  const double start = t;
  std::size_t k = grid.interval_of(t);
  double remaining = length;
  double arrival = t + remaining / profile.speed(k);
  while (k + 1 < H && arrival > grid[k + 1]) {
    remaining -= profile.speed(k) * (grid[k + 1] - t);
    t = grid[k + 1];
    arrival = t + remaining / profile.speed(k + 1);
    ++k;
  }
  return arrival - start;
}

// Latest departure time whose IGP arrival equals `arrival` (inverse of the
// arrival map t -> t + tau(t)); may be negative when the length cannot be
// covered after time 0.
inline double igp_departure_for_arrival(const SpeedProfile& profile, double length, double arrival) {
  const TimeGrid& grid = profile.grid();
  std::size_t k = grid.interval_of(arrival);
  if (arrival > 0.0 && arrival == grid[k] && k > 0) --k;  // consume in the period that ends at `arrival`
  double remaining = length;
  double t = arrival;
  while (true) {
    const double lo = grid[k];
    const double cover = profile.speed(k) * (t - lo);
    if (cover >= remaining || k == 0) return t - remaining / profile.speed(k);
    remaining -= cover;
    t = lo;
    --k;
  }
}

// Exact breakpoint tabulation of the IGP travel time of an arc on [0, horizon]:
// departures at period boundaries and departures whose arrival hits an interior
// boundary. Linear interpolation between the returned samples is exact.
inline TravelTimeFunction tabulate_igp(const SpeedProfile& profile, double length, double horizon) {
  const TimeGrid& grid = profile.grid();
  std::vector<double> times;
  for (double b : grid.breakpoints())
    if (b <= horizon) times.push_back(b);
  times.push_back(horizon);
  for (std::size_t h = 1; h < grid.intervals(); ++h) {
    const double d = igp_departure_for_arrival(profile, length, grid[h]);
    if (d > 0.0 && d < horizon) times.push_back(d);
  }
  std::sort(times.begin(), times.end());
  std::vector<TimeSample> samples;
  for (double t : times) {
    if (!samples.empty() && t - samples.back().t <= 1e-9) continue;
    samples.push_back({t, igp_travel_time(profile, length, t)});
  }
  if (samples.back().t != horizon) {
    if (samples.size() > 1) samples.pop_back();
    samples.push_back({horizon, igp_travel_time(profile, length, horizon)});
  }
  return TravelTimeFunction(std::move(samples));
}

// Shared-speed IGP graph: profile plus per-arc lengths (row-major (n+1)^2, diagonal unused).
class AuxiliaryGraph {
 public:
  AuxiliaryGraph() = default;

  AuxiliaryGraph(SpeedProfile profile, std::size_t customers, std::vector<double> lengths)
      : profile_(std::move(profile)), n_(customers), lengths_(std::move(lengths)) {
    if (lengths_.size() != (n_ + 1) * (n_ + 1)) throw ParameterError("length table must have (n+1)^2 entries");
    for (Vertex i = 0; i <= n_; ++i)
      for (Vertex j = 0; j <= n_; ++j)
        if (i != j && (!(length(i, j) >= 0.0) || !std::isfinite(length(i, j))))
          throw ParameterError("arc lengths must be finite and nonnegative");
  }

  const SpeedProfile& profile() const { return profile_; }
  std::size_t customers() const { return n_; }
  std::size_t vertices() const { return n_ + 1; }
  double length(Vertex i, Vertex j) const { return lengths_[i * (n_ + 1) + j]; }
  std::span<const double> lengths() const { return lengths_; }

  double travel_time(Vertex i, Vertex j, double t) const { return igp_travel_time(profile_, length(i, j), t); }

  // Long-run constant travel time L_ij / v_{H-1}.
  double long_run_time(Vertex i, Vertex j) const { return length(i, j) / profile_.final_speed(); }

 private:
  SpeedProfile profile_;
  std::size_t n_ = 0;
  std::vector<double> lengths_;
};

inline double igp_travel_time(const AuxiliaryGraph& a, Vertex i, Vertex j, double t) {
  return a.travel_time(i, j, t);
}

inline double auxiliary_duration(const AuxiliaryGraph& a, std::span<const Vertex> path, double t0) {
  detail::check_path(path, a.vertices(), t0);
  double t = t0;
  for (std::size_t k = 1; k < path.size(); ++k) t += a.travel_time(path[k - 1], path[k], t);
  return t - t0;
}

}  // namespace tdtsp
