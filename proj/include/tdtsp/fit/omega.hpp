#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tdtsp/config.hpp"
#include "tdtsp/error.hpp"
#include "tdtsp/graph.hpp"
#include "tdtsp/time_grid.hpp"

namespace tdtsp::fit {

namespace detail {

inline void sort_merge(std::vector<double>& v, double tol) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  out.reserve(v.size());
  for (double t : v)
    if (out.empty() || t - out.back() > tol) out.push_back(t);
  v = std::move(out);
}

}  // namespace detail

// Per-vertex sampling sets S_i (shared by every arc leaving i) and the union
// grid they induce: breakpoints = sorted(union S_i with {0, T}).
class OmegaSelection {
 public:
  OmegaSelection() = default;

  OmegaSelection(std::vector<std::vector<double>> per_node, double horizon)
      : sets_(std::move(per_node)), horizon_(horizon) {
    const double tol = Tolerances::time_merge;
    if (sets_.empty()) throw ParameterError("omega selection needs at least one vertex set");
    std::vector<double> all{0.0, horizon_};
    for (std::size_t i = 0; i < sets_.size(); ++i) {
      auto& s = sets_[i];
      if (s.empty()) throw ParameterError("sampling set of vertex " + std::to_string(i) + " is empty");
      for (double t : s)
        if (!(t >= -tol && t <= horizon_ + tol))
          throw ParameterError("sampling time " + std::to_string(t) + " outside [0, T]");
      for (double& t : s) t = std::clamp(t, 0.0, horizon_);
      detail::sort_merge(s, tol);
      all.insert(all.end(), s.begin(), s.end());
    }
    detail::sort_merge(all, tol);
    if (all.back() != horizon_) all.back() = horizon_;
    grid_ = TimeGrid(all);
    // snap every sampling time onto the union grid
    auto b = grid_.breakpoints();
    for (auto& s : sets_)
      for (double& t : s) {
        auto it = std::lower_bound(b.begin(), b.end(), t - tol);
        if (it != b.end() && std::abs(*it - t) <= tol) t = *it;
      }
    union_.clear();
    for (const auto& s : sets_) union_.insert(union_.end(), s.begin(), s.end());
    detail::sort_merge(union_, 0.0);
  }

  std::size_t vertices() const { return sets_.size(); }
  const std::vector<double>& node_set(Vertex i) const { return sets_.at(i); }
  const std::vector<std::vector<double>>& node_sets() const { return sets_; }
  const TimeGrid& grid() const { return grid_; }
  double horizon() const { return horizon_; }

  // Omega itself: the union of the node sets (without the forced 0 and T).
  const std::vector<double>& union_points() const { return union_; }
  std::size_t size() const { return union_.size(); }

 private:
  std::vector<std::vector<double>> sets_;
  double horizon_ = 0.0;
  TimeGrid grid_;
  std::vector<double> union_;
};

}  // namespace tdtsp::fit
