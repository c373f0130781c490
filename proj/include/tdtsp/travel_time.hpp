#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tdtsp/error.hpp"

namespace tdtsp {

struct TimeSample {
  double t;    // departure time
  double tau;  // travel time when departing at t

  bool operator==(const TimeSample&) const = default;
};

// Piecewise-linear travel-time function given by breakpoint samples on [0, T].
// Constant extension tau(t) = tau(T) for t >= T.
class TravelTimeFunction {
 public:
  TravelTimeFunction() = default;

  explicit TravelTimeFunction(std::vector<TimeSample> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) throw ParameterError("travel-time function needs at least one sample");
    if (samples_.front().t != 0.0) throw ParameterError("first travel-time sample must be at t = 0");
    for (std::size_t s = 0; s < samples_.size(); ++s) {
      const auto& smp = samples_[s];
      if (!std::isfinite(smp.t) || !std::isfinite(smp.tau))
        throw ParameterError("travel-time sample " + std::to_string(s) + " is not finite");
      if (smp.tau < 0.0) throw ParameterError("travel-time sample " + std::to_string(s) + " is negative");
      if (s > 0 && !(smp.t > samples_[s - 1].t))
        throw ParameterError("travel-time sample times must be strictly increasing (index " +
                             std::to_string(s) + ")");
    }
  }

  static TravelTimeFunction constant(double tau, double horizon) {
    return TravelTimeFunction({{0.0, tau}, {horizon, tau}});
  }

  std::span<const TimeSample> samples() const { return samples_; }
  double end_time() const { return samples_.back().t; }

  double operator()(double t) const {
    if (t < 0.0 || std::isnan(t)) throw DomainError("travel time requested at negative time");
    if (t >= samples_.back().t) return samples_.back().tau;
    auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                               [](double v, const TimeSample& s) { return v < s.t; });
    const TimeSample& hi = *it;
    const TimeSample& lo = *(it - 1);
    const double w = (t - lo.t) / (hi.t - lo.t);
    return lo.tau + w * (hi.tau - lo.tau);
  }

  double max_value() const {
    double m = samples_.front().tau;
    for (const auto& s : samples_) m = std::max(m, s.tau);
    return m;
  }

  double min_value() const {
    double m = samples_.front().tau;
    for (const auto& s : samples_) m = std::min(m, s.tau);
    return m;
  }

  bool operator==(const TravelTimeFunction&) const = default;

 private:
  std::vector<TimeSample> samples_;
};

inline double eval_travel_time(const TravelTimeFunction& f, double t) { return f(t); }

// Indices s of segments [s, s+1] along which the arrival time t + tau(t)
// decreases. Checking segment endpoints suffices for piecewise-linear functions.
inline std::vector<std::size_t> validate_fifo(const TravelTimeFunction& f) {
  std::vector<std::size_t> bad;
  auto s = f.samples();
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    if (s[k + 1].t + s[k + 1].tau < s[k].t + s[k].tau) bad.push_back(k);
  }
  return bad;
}

}  // namespace tdtsp
