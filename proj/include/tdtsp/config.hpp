#pragma once

namespace tdtsp {

// Numeric tolerances shared across modules. Times are minutes.
struct Tolerances {
  static constexpr double time_merge = 1e-9;      // merging of near-equal time points
  static constexpr double igp_relative = 1e-9;    // |int v - L| / max(1, L)
  static constexpr double lp_feasibility = 1e-9;  // primal residuals in the simplex
  static constexpr double lp_optimality = 1e-9;   // reduced-cost threshold
  static constexpr double fit_optimality = 1e-7;  // reduced-cost threshold of the fit solver
  static constexpr double lp_pivot = 1e-11;       // smallest admissible pivot magnitude
  static constexpr double cost_compare = 1e-9;    // ATSP branch-and-bound pruning
  static constexpr double perfect_fit = 1e-6;     // zeta* treated as zero
};

inline constexpr double kDefaultHorizon = 480.0;  // 8-hour working day
inline constexpr double kDefaultStep = 5.0;       // discretization unit

}  // namespace tdtsp
