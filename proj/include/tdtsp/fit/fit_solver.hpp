#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "tdtsp/config.hpp"
#include "tdtsp/error.hpp"
#include "tdtsp/fit/fit_problem.hpp"
#include "tdtsp/igp.hpp"
#include "tdtsp/lp/simplex.hpp"

namespace tdtsp::fit {

struct FitSolution {
  std::vector<double> y;                  // per union-grid interval
  std::vector<std::vector<double>> x;     // per arc, per sampled departure
  std::vector<double> x_lo, x_hi, x_tilde;
  std::vector<std::vector<double>> residuals;
  double zeta_star = 0.0;
  std::size_t iterations = 0;
};

// Everything in FitSolution follows from y: x_ak = a_ak . y.
inline FitSolution solution_from_speeds(const FitProblem& p, std::vector<double> y) {
  const auto& co = p.coefficients;
  if (y.size() != p.y_vars()) throw ParameterError("speed vector does not match the grid");
  FitSolution s;
  s.y = std::move(y);
  const std::size_t A = co.arc_count();
  s.x.resize(A);
  s.residuals.resize(A);
  s.x_lo.resize(A);
  s.x_hi.resize(A);
  s.x_tilde.resize(A);
  for (std::size_t a = 0; a < A; ++a) {
    const auto& rows = co.arcs[a].rows;
    auto& xa = s.x[a];
    for (const auto& r : rows) {
      double v = 0.0;
      for (std::size_t q = 0; q < r.values.size(); ++q) v += r.values[q] * s.y[r.first + q];
      xa.push_back(v);
    }
    s.x_lo[a] = *std::min_element(xa.begin(), xa.end());
    s.x_hi[a] = *std::max_element(xa.begin(), xa.end());
    double sum = 0.0;
    for (double v : xa) sum += v;
    s.x_tilde[a] = sum / static_cast<double>(xa.size());
    for (double v : xa) s.residuals[a].push_back(v - s.x_tilde[a]);
    s.zeta_star += s.x_hi[a] - s.x_lo[a];
  }
  return s;
}

struct FitSolverOptions {
  std::size_t max_iterations = 200'000;
  std::size_t bland_after = 50;
  double optimality = Tolerances::fit_optimality;
  double feasibility = Tolerances::lp_feasibility;
  double pivot = Tolerances::lp_pivot;
  double perturbation = 1e-7;  // relative row offsets against degeneracy; 0 disables
};

namespace detail {

// Primal simplex on the reduced model
//   min sum_a (u_a - l_a)  s.t.  u_a >= a_g.y >= l_a (g in rows of a),  y >= rho,
// which is the fitting LP with x eliminated. u_a, l_a are free and always basic;
// a basis is described by one "key" row per arc and side (the tight row that
// defines u_a resp. l_a) plus H working rows in y-space: either y_h = rho or a
// further tight row written relative to its arc's key. Only the H x H working
// matrix is factorized; all other rows are priced in the ratio test.
class FitSimplex {
 public:
  FitSimplex(const FitProblem& p, const FitSolverOptions& opt) : p_(p), opt_(opt) {
    const auto& co = p.coefficients;
    H_ = co.intervals();
    A_ = co.arc_count();
    for (std::size_t a = 0; a < A_; ++a) {
      arc_begin_.push_back(first_.size());
      for (const auto& r : co.arcs[a].rows) {
        first_.push_back(r.first);
        ptr_.push_back(vals_.size());
        vals_.insert(vals_.end(), r.values.begin(), r.values.end());
        arc_of_.push_back(a);
      }
    }
    arc_begin_.push_back(first_.size());
    ptr_.push_back(vals_.size());
    R_ = first_.size();

    y_.assign(H_, p.rho);
    d_.assign(H_, 0.0);
    rho_.assign(H_, p.rho);
    off_.assign(R_, 0.0);
    if (opt_.perturbation > 0.0) {
      std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
      std::uniform_real_distribution<double> U(0.5, 1.0);
      for (std::size_t g = 0; g < R_; ++g) off_[g] = opt_.perturbation * dot(g, y_) * U(rng);
      for (auto& r : rho_) r *= 1.0 + opt_.perturbation * U(rng);
    }
    for (std::size_t h = 0; h < H_; ++h) slots_.push_back({Kind::Y, h});
    in_y_.assign(H_, true);
    in_u_.assign(R_, false);
    in_l_.assign(R_, false);
    ku_.resize(A_);
    kl_.resize(A_);
    for (std::size_t a = 0; a < A_; ++a) {
      std::size_t bu = arc_begin_[a], bl = arc_begin_[a];
      double vu = val(bu, y_), vl = vu;
      for (std::size_t g = arc_begin_[a] + 1; g < arc_begin_[a + 1]; ++g) {
        const double v = val(g, y_);
        if (v > vu) vu = v, bu = g;
        if (v < vl) vl = v, bl = g;
      }
      ku_[a] = bu;
      kl_[a] = bl;
    }
    tie_u_.resize(A_);
    tie_l_.resize(A_);
  }

  // Solve with the offsets, then drop them and reoptimize from that basis.
  FitSolution run() {
    std::size_t it = iterate();
    FitSolution best = finish(it);
    if (opt_.perturbation <= 0.0) return best;
    std::fill(off_.begin(), off_.end(), 0.0);
    std::fill(rho_.begin(), rho_.end(), p_.rho);
    try {
      it += iterate();
      FitSolution clean = finish(it);
      if (clean.zeta_star <= best.zeta_star) return clean;
    } catch (const InfeasibleError&) {
    }
    best.iterations = it;
    return best;
  }

 private:
  FitSolution finish(std::size_t it) const {
    std::vector<double> y = y_;
    for (double& v : y) v = std::max(v, p_.rho);
    FitSolution sol = solution_from_speeds(p_, std::move(y));
    sol.iterations = it;
    return sol;
  }

  std::size_t iterate() {
    std::size_t it = 0, degenerate_run = 0;
    Eigen::MatrixXd B(H_, H_);
    Eigen::VectorXd rhs(H_), c(H_), pi(H_), dir(H_), e(H_);
    while (true) {
      if (it >= opt_.max_iterations) throw InfeasibleError("fit LP hit the iteration limit");
      // working matrix and vertex
      B.setZero();
      for (std::size_t s = 0; s < H_; ++s) {
        const Slot& sl = slots_[s];
        if (sl.kind == Kind::Y) {
          B(s, sl.idx) = 1.0;
          rhs[s] = rho_[sl.idx];
        } else {
          const std::size_t a = arc_of_[sl.idx];
          const std::size_t key = sl.kind == Kind::U ? ku_[a] : kl_[a];
          const double sign = sl.kind == Kind::U ? 1.0 : -1.0;
          add_row(B, s, key, sign);
          add_row(B, s, sl.idx, -sign);
          rhs[s] = sign * (off_[sl.idx] - off_[key]);
        }
      }
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
      Eigen::VectorXd yv = lu.solve(rhs);
      for (std::size_t h = 0; h < H_; ++h) y_[h] = yv[h];

      c.setZero();
      for (std::size_t a = 0; a < A_; ++a) {
        add_vec(c, ku_[a], 1.0);
        add_vec(c, kl_[a], -1.0);
      }
      pi = lu.transpose().solve(c);

      // group tie slots by arc
      for (std::size_t a : touched_) tie_u_[a].clear(), tie_l_[a].clear();
      touched_.clear();
      for (std::size_t s = 0; s < H_; ++s) {
        const Slot& sl = slots_[s];
        if (sl.kind == Kind::Y) continue;
        const std::size_t a = arc_of_[sl.idx];
        if (tie_u_[a].empty() && tie_l_[a].empty()) touched_.push_back(a);
        (sl.kind == Kind::U ? tie_u_[a] : tie_l_[a]).push_back(s);
      }

      // pricing
      const bool bland = degenerate_run >= opt_.bland_after;
      Move best{};
      double best_rate = -opt_.optimality;
      auto consider = [&](const Move& m, double rate) {
        if (rate >= -opt_.optimality) return;
        if (bland ? (best.kind == MoveKind::None || m.var < best.var) : rate < best_rate) {
          best = m;
          best_rate = rate;
        }
      };
      for (std::size_t s = 0; s < H_; ++s) consider({MoveKind::Release, s, 0, false, var_id(slots_[s])}, pi[s]);
      for (std::size_t a : touched_) {
        for (int side = 0; side < 2; ++side) {
          const auto& ties = side == 0 ? tie_u_[a] : tie_l_[a];
          if (ties.empty()) continue;
          double sum = 0.0;
          for (std::size_t s : ties) sum += pi[s];
          const std::size_t key = side == 0 ? ku_[a] : kl_[a];
          consider({MoveKind::Rekey, 0, a, side == 0, H_ + 2 * key + (side == 0 ? 0 : 1)}, 1.0 - sum);
        }
      }
      if (best.kind == MoveKind::None) break;

      e.setZero();
      if (best.kind == MoveKind::Release) {
        e[best.slot] = 1.0;
        dir = lu.solve(e);
      } else {
        for (std::size_t s : best.upper ? tie_u_[best.arc] : tie_l_[best.arc]) e[s] = 1.0;
        dir = -lu.solve(e);
      }
      for (std::size_t h = 0; h < H_; ++h) d_[h] = dir[h];

      Block blk = ratio_test(best, bland);
      if (blk.kind == Kind::None) throw InfeasibleError("fit LP reported unbounded");
      ++it;
      degenerate_run = blk.theta <= 1e-12 ? degenerate_run + 1 : 0;

      // basis change
      std::size_t target;
      if (best.kind == MoveKind::Release) {
        target = best.slot;
      } else {
        auto& ties = best.upper ? tie_u_[best.arc] : tie_l_[best.arc];
        target = ties.front();
        (best.upper ? ku_ : kl_)[best.arc] = slots_[target].idx;
      }
      set_flag(slots_[target], false);
      slots_[target] = {blk.kind, blk.idx};
      set_flag(slots_[target], true);
    }
    return it;
  }

  enum class Kind { None, Y, U, L };
  enum class MoveKind { None, Release, Rekey };
  struct Slot {
    Kind kind;
    std::size_t idx;  // interval h for Y, global row g for U/L
  };
  struct Move {
    MoveKind kind = MoveKind::None;
    std::size_t slot = 0;
    std::size_t arc = 0;
    bool upper = false;
    std::size_t var = 0;
  };
  struct Cand {
    Kind kind;
    std::size_t idx;
    double slack, rate;
  };
  struct Block {
    Kind kind = Kind::None;
    std::size_t idx = 0;
    double theta = std::numeric_limits<double>::infinity();
    double mag = 0.0;
    std::size_t var = 0;
  };

  std::size_t var_id(const Slot& s) const {
    if (s.kind == Kind::Y) return s.idx;
    return H_ + 2 * s.idx + (s.kind == Kind::L ? 1 : 0);
  }

  void set_flag(const Slot& s, bool v) {
    if (s.kind == Kind::Y) in_y_[s.idx] = v;
    else if (s.kind == Kind::U) in_u_[s.idx] = v;
    else in_l_[s.idx] = v;
  }

  double dot(std::size_t g, const std::vector<double>& v) const {
    double s = 0.0;
    const std::size_t f = first_[g];
    for (std::size_t q = ptr_[g]; q < ptr_[g + 1]; ++q) s += vals_[q] * v[f + q - ptr_[g]];
    return s;
  }

  double val(std::size_t g, const std::vector<double>& v) const { return dot(g, v) + off_[g]; }

  void add_row(Eigen::MatrixXd& B, std::size_t s, std::size_t g, double sign) const {
    const std::size_t f = first_[g];
    for (std::size_t q = ptr_[g]; q < ptr_[g + 1]; ++q) B(s, f + q - ptr_[g]) += sign * vals_[q];
  }

  void add_vec(Eigen::VectorXd& c, std::size_t g, double sign) const {
    const std::size_t f = first_[g];
    for (std::size_t q = ptr_[g]; q < ptr_[g + 1]; ++q) c[f + q - ptr_[g]] += sign * vals_[q];
  }

  // Step along d_ (plus the unit key release of a Rekey move) that keeps every
  // y bound and row slack nonnegative. Outside Bland mode this is Harris'
  // two-pass test: bounds are relaxed by `feasibility` to find the step limit,
  // then the blocking candidate with the largest |rate| below it is taken.
  Block ratio_test(const Move& mv, bool bland) const {
    double dnorm = 1.0;
    for (double v : d_) dnorm = std::max(dnorm, std::abs(v));
    const double tol = opt_.pivot * 1e2 * dnorm;
    auto& cands = cands_;
    cands.clear();
    auto offer = [&](Kind k, std::size_t idx, double slack, double rate) {
      if (rate < -tol) cands.push_back({k, idx, std::max(0.0, slack), rate});
    };
    for (std::size_t h = 0; h < H_; ++h)
      if (!in_y_[h]) offer(Kind::Y, h, y_[h] - rho_[h], d_[h]);
    for (std::size_t a = 0; a < A_; ++a) {
      if (arc_begin_[a + 1] - arc_begin_[a] < 2) continue;
      const double uval = val(ku_[a], y_), lval = val(kl_[a], y_);
      double urate = dot(ku_[a], d_), lrate = dot(kl_[a], d_);
      if (mv.kind == MoveKind::Rekey && mv.arc == a) (mv.upper ? urate : lrate) += mv.upper ? 1.0 : -1.0;
      for (std::size_t g = arc_begin_[a]; g < arc_begin_[a + 1]; ++g) {
        const double v = val(g, y_), dv = dot(g, d_);
        if (g != ku_[a] && !in_u_[g]) offer(Kind::U, g, uval - v, urate - dv);
        if (g != kl_[a] && !in_l_[g]) offer(Kind::L, g, v - lval, dv - lrate);
      }
    }
    auto var_of = [&](const Cand& c) { return c.kind == Kind::Y ? c.idx : H_ + 2 * c.idx + (c.kind == Kind::L ? 1 : 0); };
    Block b;
    if (cands.empty()) return b;
    if (bland) {
      for (const auto& c : cands) {
        const double theta = c.slack / -c.rate;
        const std::size_t var = var_of(c);
        if (theta < b.theta - 1e-12 || (theta <= b.theta + 1e-12 && var < b.var))
          b = {c.kind, c.idx, std::min(theta, b.theta), -c.rate, var};
      }
      return b;
    }
    double limit = std::numeric_limits<double>::infinity();
    for (const auto& c : cands) limit = std::min(limit, (c.slack + opt_.feasibility) / -c.rate);
    for (const auto& c : cands) {
      const double theta = c.slack / -c.rate;
      if (theta > limit) continue;
      const double mag = -c.rate;
      const std::size_t var = var_of(c);
      if (b.kind == Kind::None || mag > b.mag || (mag == b.mag && var < b.var)) b = {c.kind, c.idx, theta, mag, var};
    }
    return b;
  }

  const FitProblem& p_;
  FitSolverOptions opt_;
  std::size_t H_ = 0, A_ = 0, R_ = 0;
  std::vector<std::size_t> arc_begin_, first_, ptr_, arc_of_;
  std::vector<double> vals_;
  std::vector<double> y_, d_, rho_, off_;
  std::vector<Slot> slots_;
  std::vector<bool> in_y_, in_u_, in_l_;
  std::vector<std::size_t> ku_, kl_, touched_;
  std::vector<std::vector<std::size_t>> tie_u_, tie_l_;
  mutable std::vector<Cand> cands_;
};

}  // namespace detail

// Solves the fitting LP exactly (same optimum as solve_lp on to_linear_program(p)).
inline FitSolution solve_fit(const FitProblem& p, const FitSolverOptions& opt = {}) {
  detail::FitSimplex s(p, opt);
  return s.run();
}

// Cross-check path: the assembled LP through the dense generic simplex.
inline FitSolution solve_fit_dense(const FitProblem& p) {
  const auto res = lp::solve_lp(to_linear_program(p));
  if (res.status != lp::LpStatus::Optimal)
    throw InfeasibleError(std::string("fit LP not solved: ") + lp::to_string(res.status));
  std::vector<double> y(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(p.y_vars()));
  FitSolution s = solution_from_speeds(p, std::move(y));
  s.iterations = res.iterations;
  return s;
}

struct Extraction {
  AuxiliaryGraph graph;
  std::vector<std::string> warnings;
};

// v(t) = y*(t) on the union grid, L_ij = mean over k of x*_ijk.
inline Extraction extract_auxiliary(const FitSolution& sol, const FitProblem& p) {
  const auto& co = p.coefficients;
  if (sol.x_tilde.size() != co.arc_count()) throw ParameterError("fit solution does not match the problem");
  Extraction out;
  const std::size_t V = co.customers + 1;
  std::vector<double> lengths(V * V, 0.0);
  for (std::size_t a = 0; a < co.arc_count(); ++a) {
    const auto& arc = co.arcs[a];
    const double L = std::max(0.0, sol.x_tilde[a]);
    if (L == 0.0)
      out.warnings.push_back("arc (" + std::to_string(arc.from) + "," + std::to_string(arc.to) +
                             ") has zero fitted length");
    lengths[arc.from * V + arc.to] = L;
  }
  std::vector<double> speeds(sol.y.size());
  for (std::size_t h = 0; h < speeds.size(); ++h) speeds[h] = std::max(sol.y[h], p.rho);
  out.graph = AuxiliaryGraph(SpeedProfile(co.grid, std::move(speeds)), co.customers, std::move(lengths));
  return out;
}

}  // namespace tdtsp::fit
