#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tdtsp/atsp/atsp.hpp"
#include "tdtsp/config.hpp"
#include "tdtsp/error.hpp"
#include "tdtsp/fit/fit_solver.hpp"
#include "tdtsp/graph.hpp"
#include "tdtsp/learn/mlp.hpp"
#include "tdtsp/oracle/exact.hpp"

namespace tdtsp::bounds {

// D = {0, step, 2 step, ..., T}; the last gap may be shorter.
struct Discretization {
  double step = kDefaultStep;
  double horizon = kDefaultHorizon;

  Discretization(double s, double T) : step(s), horizon(T) {
    if (!(step > 0.0) || !std::isfinite(step)) throw ParameterError("discretization step must be positive");
    if (!(horizon > 0.0)) throw ParameterError("horizon must be positive");
  }

  std::vector<double> points() const {
    std::vector<double> p;
    for (std::size_t k = 0;; ++k) {
      const double t = static_cast<double>(k) * step;
      if (t >= horizon - Tolerances::time_merge) break;
      p.push_back(t);
    }
    p.push_back(horizon);
    return p;
  }
};

enum class Method { HTSP, PL_HTSP, MLPL_HTSP };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::HTSP: return "HTSP";
    case Method::PL_HTSP: return "PL-HTSP";
    case Method::MLPL_HTSP: return "MLPL-HTSP";
  }
  return "?";
}

struct BoundResult {
  Method method = Method::HTSP;
  Tour tour;
  double ub = 0.0;
  double aux_cost = 0.0;
  std::optional<double> zeta_star;
  double wall_time = 0.0;
  std::size_t omega_size = 0;
  std::size_t lp_rows = 0;
  std::size_t lp_iterations = 0;
  std::optional<AuxiliaryGraph> auxiliary;
  std::optional<fit::OmegaSelection> selection;
  std::vector<std::string> warnings;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

// Baseline: each arc costs its maximum travel time over the day (attained at a
// breakpoint because tau is piecewise linear).
inline BoundResult htsp_baseline(const TimeDependentGraph& g) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t V = g.vertices();
  atsp::CostMatrix c(V);
  for (Vertex i = 0; i < V; ++i)
    for (Vertex j = 0; j < V; ++j)
      if (i != j) c.set(i, j, g.arc(i, j).max_value());
  const auto sol = atsp::solve_atsp(c);
  BoundResult r;
  r.method = Method::HTSP;
  r.tour = sol.tour;
  r.aux_cost = sol.cost;
  r.ub = tour_duration(g, sol.tour);
  r.wall_time = detail::seconds_since(t0);
  return r;
}

inline fit::OmegaSelection build_omega_full(const TimeDependentGraph& g, const Discretization& d) {
  if (d.horizon != g.horizon()) throw ConfigError("discretization horizon differs from the graph horizon");
  return fit::OmegaSelection(std::vector<std::vector<double>>(g.vertices(), d.points()), g.horizon());
}

// Points of D inside [f - eps, f + eps]; if none, the point of D nearest to f
// (f clamped to [0, T]; the earlier point on ties).
inline std::vector<double> eta_window(const std::vector<double>& D, double f, double eps) {
  const double tol = Tolerances::time_merge;
  std::vector<double> s;
  for (double t : D)
    if (t >= f - eps - tol && t <= f + eps + tol) s.push_back(t);
  if (s.empty()) {
    const double fc = std::clamp(f, D.front(), D.back());
    double best = D.front();
    for (double t : D)
      if (std::abs(t - fc) < std::abs(best - fc)) best = t;
    s.push_back(best);
  }
  return s;
}

// Depot: {0, step}. Customer i: the ETA window of its zone.
inline fit::OmegaSelection build_omega_ml(const learn::EtaModel& model, const TimeDependentGraph& g,
                                          const Discretization& d) {
  if (d.horizon != g.horizon()) throw ConfigError("discretization horizon differs from the graph horizon");
  if (model.zones() == 0 || model.net.inputs != model.zones() || model.per_zone_mae.size() != model.zones())
    throw ConfigError("ETA model zones are inconsistent");
  const auto D = d.points();
  const auto eta = learn::etas(model, g);
  std::vector<std::vector<double>> sets(g.vertices());
  sets[0] = {D.front()};
  if (D.size() > 1) sets[0].push_back(D[1]);
  for (Vertex i = 1; i < g.vertices(); ++i) sets[i] = eta_window(D, eta[i].f, eta[i].epsilon);
  return fit::OmegaSelection(std::move(sets), g.horizon());
}

struct FitOptions {
  std::optional<double> rho;  // default: 1 / min grid width
};

// STEP 1: fit the auxiliary graph on sel. STEP 2: ATSP with constant costs
// L_ij / v_{H-1}. STEP 3: evaluate the tour on the original travel times.
inline BoundResult upper_bound(const TimeDependentGraph& g, const fit::OmegaSelection& sel, Method method,
                               const FitOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  auto problem = fit::assemble_fit_lp(fit::build_coefficients(g, sel), opt.rho.value_or(fit::default_rho(sel.grid())));
  const auto sol = fit::solve_fit(problem);
  auto ex = fit::extract_auxiliary(sol, problem);

  const std::size_t V = g.vertices();
  atsp::CostMatrix c(V);
  for (Vertex i = 0; i < V; ++i)
    for (Vertex j = 0; j < V; ++j)
      if (i != j) c.set(i, j, ex.graph.long_run_time(i, j));
  const auto tour = atsp::solve_atsp(c);

  BoundResult r;
  r.method = method;
  r.tour = tour.tour;
  r.aux_cost = tour.cost;
  r.ub = tour_duration(g, tour.tour);
  r.zeta_star = sol.zeta_star;
  r.omega_size = sel.size();
  r.lp_rows = problem.row_count();
  r.lp_iterations = sol.iterations;
  r.auxiliary = std::move(ex.graph);
  r.selection = sel;
  r.warnings = std::move(ex.warnings);
  r.wall_time = detail::seconds_since(t0);
  return r;
}

// PL-HTSP: every S_i is the full discretization. Wall time includes building Omega.
inline BoundResult pl_htsp(const TimeDependentGraph& g, const Discretization& d, const FitOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  auto r = upper_bound(g, build_omega_full(g, d), Method::PL_HTSP, opt);
  r.wall_time = detail::seconds_since(t0);
  return r;
}

// MLPL-HTSP: S_i restricted to the predicted-arrival window. Wall time includes prediction.
inline BoundResult mlpl_htsp(const TimeDependentGraph& g, const learn::EtaModel& model, const Discretization& d,
                             const FitOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  auto r = upper_bound(g, build_omega_ml(model, g, d), Method::MLPL_HTSP, opt);
  r.wall_time = detail::seconds_since(t0);
  return r;
}

inline double dev_percent(double ub, double bk) {
  if (!(bk > 0.0)) throw DomainError("best-known value must be positive");
  return 100.0 * (ub - bk) / bk;
}

enum class BkProvenance { DpExact, BestOfHeuristics };

inline const char* to_string(BkProvenance p) { return p == BkProvenance::DpExact ? "dp_exact" : "best_of_heuristics"; }

struct BestKnown {
  double value = 0.0;
  BkProvenance provenance = BkProvenance::DpExact;
  Tour tour;
};

// Exact optimum when the DP reaches n, otherwise the best heuristic bound supplied.
inline BestKnown best_known(const TimeDependentGraph& g, const std::vector<BoundResult>& heuristics) {
  if (g.customers() <= oracle::kMaxDpCustomers) {
    auto r = oracle::solve_tdtsp_exact(g);
    return {r.duration, BkProvenance::DpExact, r.tour};
  }
  if (heuristics.empty()) throw ParameterError("no heuristic results to take the best-known value from");
  const auto it = std::min_element(heuristics.begin(), heuristics.end(),
                                   [](const BoundResult& a, const BoundResult& b) { return a.ub < b.ub; });
  return {it->ub, BkProvenance::BestOfHeuristics, it->tour};
}

struct Diagnostic {
  double zeta_star = 0.0;
  bool zero_deviation = false;
  bool arrivals_sampled = false;
  bool evidence = false;
  std::string note;
};

// Zero-deviation optimality check. An arrival (= departure, no service times)
// at customer i counts as sampled when it is within step/2 of a point of S_i, or when the
// fitted graph reproduces the true travel time of the next arc at that moment.
inline Diagnostic optimality_diagnostic(const BoundResult& r, const TimeDependentGraph& g, double step) {
  Diagnostic d;
  if (!r.zeta_star || !r.auxiliary || !r.selection) {
    d.note = "no fitted auxiliary graph (HTSP result); no evidence either way";
    return d;
  }
  d.zeta_star = *r.zeta_star;
  d.zero_deviation = d.zeta_star <= Tolerances::perfect_fit;
  const auto path = r.tour.closed();
  const auto at = tour_arrivals(g, r.tour);
  d.arrivals_sampled = true;
  for (std::size_t k = 1; k + 1 < path.size(); ++k) {
    const Vertex i = path[k], j = path[k + 1];
    const double t = at[k];
    const auto& S = r.selection->node_set(i);
    const bool near = std::any_of(S.begin(), S.end(), [&](double s) { return std::abs(s - t) <= step / 2 + 1e-9; });
    const bool exact = std::abs(igp_travel_time(*r.auxiliary, i, j, t) - g.travel_time(i, j, t)) <= 1e-6;
    if (!near && !exact) d.arrivals_sampled = false;
  }
  d.evidence = d.zero_deviation && d.arrivals_sampled;
  d.note = d.evidence ? "zeta* ~ 0 and the tour's departure times are sampled: optimality evidence, not a proof "
                        "(it would be one only if Omega contained the optimal tour's times)"
                      : "no optimality evidence";
  return d;
}

}  // namespace tdtsp::bounds
