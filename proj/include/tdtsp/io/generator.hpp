#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "tdtsp/config.hpp"
#include "tdtsp/error.hpp"
#include "tdtsp/graph.hpp"
#include "tdtsp/igp.hpp"
#include "tdtsp/io/instance.hpp"

namespace tdtsp::io {

// Distances in km, times in minutes, speeds in km/min.
struct GeneratorConfig {
  std::size_t customers = 10;
  std::size_t clusters = 3;       // spatial centers of the customer mixture
  std::size_t periods = 4;        // H of the shared speed profile
  double horizon = kDefaultHorizon;
  double area = 30.0;             // side of the square service region
  double spread = 3.0;            // std deviation around a center
  double speed_min = 0.3;         // deepest congestion
  double speed_max = 1.0;         // free flow
  double pi = 0.0;                // perturbation amplitude in [0, 1]
  double sample_step = 15.0;      // extra sample grid besides the IGP breakpoints
  std::uint64_t seed = 1;

  void validate() const {
    if (customers < 1) throw ConfigError("customers must be at least 1");
    if (clusters < 1) throw ConfigError("clusters must be at least 1");
    if (periods < 1) throw ConfigError("periods must be at least 1");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be positive");
    if (static_cast<double>(periods) * 5.0 > horizon) throw ConfigError("periods must be at least 5 minutes long");
    if (!(area > 0.0) || !(spread >= 0.0)) throw ConfigError("area must be positive and spread nonnegative");
    if (!(speed_min > 0.0) || !(speed_max >= speed_min)) throw ConfigError("need 0 < speed_min <= speed_max");
    if (!(pi >= 0.0 && pi <= 1.0)) throw ConfigError("pi must lie in [0, 1]");
    if (!(sample_step > 0.0)) throw ConfigError("sample_step must be positive");
  }
};

inline nlohmann::json to_json(const GeneratorConfig& c) {
  return {{"customers", c.customers}, {"clusters", c.clusters},   {"periods", c.periods},
          {"horizon", c.horizon},     {"area", c.area},           {"spread", c.spread},
          {"speed_min", c.speed_min}, {"speed_max", c.speed_max}, {"pi", c.pi},
          {"sample_step", c.sample_step}, {"seed", c.seed}};
}

inline GeneratorConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("generator config must be a JSON object");
  GeneratorConfig c;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const auto& v = it.value();
      if (k == "customers") c.customers = v.get<std::size_t>();
      else if (k == "clusters") c.clusters = v.get<std::size_t>();
      else if (k == "periods") c.periods = v.get<std::size_t>();
      else if (k == "horizon") c.horizon = v.get<double>();
      else if (k == "area") c.area = v.get<double>();
      else if (k == "spread") c.spread = v.get<double>();
      else if (k == "speed_min") c.speed_min = v.get<double>();
      else if (k == "speed_max") c.speed_max = v.get<double>();
      else if (k == "pi") c.pi = v.get<double>();
      else if (k == "sample_step") c.sample_step = v.get<double>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else throw ConfigError("unknown generator key '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("generator config: ") + e.what());
  }
  c.validate();
  return c;
}

inline GeneratorConfig load_generator_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return config_from_json(j);
}

// Shared by every instance of a seed: spatial centers and the speed profile.
struct Family {
  std::vector<Point> centers;
  SpeedProfile profile;
};

// Breakpoints at multiples of 5 minutes; speeds dip around a morning and an
// evening peak.
inline Family make_family(const GeneratorConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Family f;
  const double margin = 0.15 * cfg.area;
  for (std::size_t k = 0; k < cfg.clusters; ++k)
    f.centers.push_back({margin + (cfg.area - 2 * margin) * U(rng), margin + (cfg.area - 2 * margin) * U(rng)});

  const std::size_t H = cfg.periods;
  std::vector<double> b(H + 1, 0.0);
  for (std::size_t h = 1; h < H; ++h) {
    const double raw = cfg.horizon * static_cast<double>(h) / static_cast<double>(H);
    b[h] = std::max(b[h - 1] + 5.0, 5.0 * std::round(raw / 5.0));
  }
  b[H] = cfg.horizon;
  if (H > 1 && !(b[H] > b[H - 1])) throw ConfigError("too many periods for the horizon");

  const double am = cfg.horizon * (0.2 + 0.1 * U(rng)), pm = cfg.horizon * (0.65 + 0.1 * U(rng));
  const double width = cfg.horizon * 0.12;
  std::vector<double> v(H);
  for (std::size_t h = 0; h < H; ++h) {
    const double mid = 0.5 * (b[h] + b[h + 1]);
    const double c = std::max(std::exp(-std::pow((mid - am) / width, 2)), std::exp(-std::pow((mid - pm) / width, 2)));
    const double jitter = 0.9 + 0.1 * U(rng);
    v[h] = cfg.speed_min + (cfg.speed_max - cfg.speed_min) * (1.0 - c) * jitter;
    if (H == 1) v[h] = cfg.speed_max;
  }
  f.profile = SpeedProfile(TimeGrid(std::move(b)), std::move(v));
  return f;
}

// Raises tau where the arrival t + tau would decrease, then nudges by ulps
// until the rounded arrivals are nondecreasing.
inline void repair_fifo(std::vector<TimeSample>& s) {
  for (std::size_t k = 1; k < s.size(); ++k) {
    const double floor_tau = s[k - 1].tau - (s[k].t - s[k - 1].t);
    if (s[k].tau < floor_tau) s[k].tau = floor_tau;
    while (s[k].t + s[k].tau < s[k - 1].t + s[k - 1].tau)
      s[k].tau = std::nextafter(s[k].tau, std::numeric_limits<double>::infinity());
  }
}

inline std::string instance_name(std::uint64_t seed, std::uint64_t index) {
  return std::to_string(seed) + "_I_" + std::to_string(index);
}

inline InstanceFile generate_instance(const GeneratorConfig& cfg, std::uint64_t index) {
  const Family fam = make_family(cfg);
  std::seed_seq sq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                   static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(sq);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, cfg.clusters - 1);

  const std::size_t V = cfg.customers + 1;
  std::vector<Point> pts(V);
  pts[0] = {0.5 * cfg.area, 0.5 * cfg.area};
  for (std::size_t i = 1; i < V; ++i) {
    const Point& c = fam.centers[pick(rng)];
    const double x = c.x + cfg.spread * N(rng), y = c.y + cfg.spread * N(rng);
    pts[i] = {std::clamp(x, 0.0, cfg.area), std::clamp(y, 0.0, cfg.area)};
  }

  std::vector<double> grid_pts;
  for (double t = 0.0; t < cfg.horizon; t += cfg.sample_step) grid_pts.push_back(t);
  const double min_len = 1e-3 * cfg.area;
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<TravelTimeFunction> arcs(V * V);
  for (Vertex i = 0; i < V; ++i) {
    for (Vertex j = 0; j < V; ++j) {
      if (i == j) continue;
      const double L = std::max(min_len, std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y));
      double amp[3], phase[3], norm = 0.0;
      for (int m = 0; m < 3; ++m) {
        amp[m] = 0.2 + 0.8 * U(rng);
        phase[m] = two_pi * U(rng);
        norm += amp[m];
      }
      std::vector<double> times;
      for (const auto& s : tabulate_igp(fam.profile, L, cfg.horizon).samples()) times.push_back(s.t);
      times.insert(times.end(), grid_pts.begin(), grid_pts.end());
      std::sort(times.begin(), times.end());
      std::vector<TimeSample> smp;
      for (double t : times) {
        if (!smp.empty() && t - smp.back().t <= Tolerances::time_merge) continue;
        double tau = igp_travel_time(fam.profile, L, t);
        if (cfg.pi > 0.0) {
          double noise = 0.0;
          for (int m = 0; m < 3; ++m) noise += amp[m] * std::sin(two_pi * (m + 1) * t / cfg.horizon + phase[m]);
          tau *= 1.0 + cfg.pi * noise / norm;
        }
        smp.push_back({t, tau});
      }
      if (smp.back().t != cfg.horizon) smp.back().t = cfg.horizon;  // merged into a point just below T
      repair_fifo(smp);
      for (const auto& s : smp)
        if (!(s.tau > 0.0))
          throw GenerationError("perturbation too large: non-positive travel time on arc (" + std::to_string(i) +
                                "," + std::to_string(j) + ")");
      arcs[i * V + j] = TravelTimeFunction(std::move(smp));
    }
  }
  InstanceFile f;
  f.name = instance_name(cfg.seed, index);
  f.graph = TimeDependentGraph(cfg.customers, cfg.horizon, std::move(arcs), std::move(pts));
  f.provenance = Provenance{cfg.seed, index, cfg.pi};
  return f;
}

}  // namespace tdtsp::io
