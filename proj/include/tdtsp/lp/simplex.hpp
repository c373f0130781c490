#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "tdtsp/config.hpp"
#include "tdtsp/lp/linear_program.hpp"

namespace tdtsp::lp {

struct SimplexOptions {
  std::size_t max_iterations = 1'000'000;
  std::size_t bland_after = 50;  // consecutive degenerate pivots before switching to Bland's rule
  double feasibility = Tolerances::lp_feasibility;
  double optimality = Tolerances::lp_optimality;
  double pivot = Tolerances::lp_pivot;
};

namespace detail {

// Dense two-phase bounded-variable primal simplex. Columns n..n+m-1 are the
// phase-1 artificials, one per row.
class DenseSimplex {
 public:
  DenseSimplex(const LinearProgram& lp, const SimplexOptions& opt)
      : opt_(opt), m_(lp.rows.size()), n_(lp.cols()), w_(n_ + m_) {
    lo_.assign(w_, 0.0);
    hi_.assign(w_, kInf);
    std::copy(lp.lower.begin(), lp.lower.end(), lo_.begin());
    std::copy(lp.upper.begin(), lp.upper.end(), hi_.begin());
    cost_.assign(lp.cost.begin(), lp.cost.end());
    cost_.resize(w_, 0.0);

    x_.assign(w_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) x_[j] = resting_value(j);

    tab_.assign(m_ * w_, 0.0);
    beta_.assign(m_, 0.0);
    basis_.assign(m_, 0);
    row_of_.assign(w_, kNone);
    for (std::size_t i = 0; i < m_; ++i) {
      double r = lp.rows[i].rhs;
      for (const auto& e : lp.rows[i].entries) {
        at(i, e.col) += e.value;
        r -= e.value * x_[e.col];
      }
      const double sign = r >= 0.0 ? 1.0 : -1.0;
      if (sign < 0.0)
        for (std::size_t j = 0; j < n_; ++j) at(i, j) = -at(i, j);
      at(i, n_ + i) = 1.0;
      basis_[i] = n_ + i;
      row_of_[n_ + i] = i;
      beta_[i] = std::abs(r);
    }
  }

  LpResult run() {
    LpResult res;
    // Phase 1: minimize the sum of artificials.
    std::vector<double> phase1(w_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) phase1[n_ + i] = 1.0;
    LpStatus st = iterate(phase1, res.iterations);
    if (st == LpStatus::IterationLimit) {
      res.status = st;
      return res;
    }
    double infeas = 0.0;
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] >= n_) infeas += beta_[i];
    if (infeas > opt_.feasibility * std::max<std::size_t>(1, m_)) {
      res.status = LpStatus::Infeasible;
      return res;
    }
    drive_out_artificials();
    for (std::size_t j = n_; j < w_; ++j) {
      hi_[j] = 0.0;
      if (row_of_[j] == kNone) x_[j] = 0.0;
    }

    st = iterate(cost_, res.iterations);
    res.status = st;
    res.x.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) res.x[j] = row_of_[j] == kNone ? x_[j] : beta_[row_of_[j]];
    res.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) res.objective += cost_[j] * res.x[j];
    return res;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  double& at(std::size_t i, std::size_t j) { return tab_[i * w_ + j]; }
  double at(std::size_t i, std::size_t j) const { return tab_[i * w_ + j]; }

  double resting_value(std::size_t j) const {
    if (std::isfinite(lo_[j])) return lo_[j];
    if (std::isfinite(hi_[j])) return hi_[j];
    return 0.0;
  }

  LpStatus iterate(const std::vector<double>& c, std::size_t& iterations) {
    std::vector<double> d(w_);
    std::size_t degenerate_run = 0;
    while (true) {
      if (iterations >= opt_.max_iterations) return LpStatus::IterationLimit;
      const bool bland = degenerate_run >= opt_.bland_after;

      // reduced costs
      for (std::size_t j = 0; j < w_; ++j) d[j] = c[j];
      for (std::size_t i = 0; i < m_; ++i) {
        const double cb = c[basis_[i]];
        if (cb == 0.0) continue;
        const double* row = &tab_[i * w_];
        for (std::size_t j = 0; j < w_; ++j) d[j] -= cb * row[j];
      }

      std::size_t enter = kNone;
      double dir = 0.0, best = 0.0;
      for (std::size_t j = 0; j < w_; ++j) {
        if (row_of_[j] != kNone || lo_[j] == hi_[j]) continue;
        double score = 0.0, sdir = 0.0;
        if (d[j] < -opt_.optimality && x_[j] < hi_[j]) {
          score = -d[j];
          sdir = 1.0;
        } else if (d[j] > opt_.optimality && x_[j] > lo_[j]) {
          score = d[j];
          sdir = -1.0;
        } else {
          continue;
        }
        if (bland) {
          enter = j;
          dir = sdir;
          break;
        }
        if (score > best) {
          best = score;
          enter = j;
          dir = sdir;
        }
      }
      if (enter == kNone) return LpStatus::Optimal;

      // ratio test
      double step = hi_[enter] - lo_[enter];  // bound flip
      std::size_t leave_row = kNone;
      double leave_mag = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double alpha = at(i, enter);
        if (std::abs(alpha) <= opt_.pivot) continue;
        const double rate = -dir * alpha;
        const std::size_t b = basis_[i];
        double lim;
        if (rate < 0.0) {
          if (!std::isfinite(lo_[b])) continue;
          lim = std::max(0.0, beta_[i] - lo_[b]) / -rate;
        } else {
          if (!std::isfinite(hi_[b])) continue;
          lim = std::max(0.0, hi_[b] - beta_[i]) / rate;
        }
        if (lim < step - 1e-12) {
          step = lim;
          leave_row = i;
          leave_mag = std::abs(alpha);
        } else if (leave_row != kNone && lim <= step + 1e-12) {
          const bool take = bland ? b < basis_[leave_row] : std::abs(alpha) > leave_mag;
          if (take) {
            leave_row = i;
            leave_mag = std::abs(alpha);
          }
        }
      }
      if (!std::isfinite(step)) return LpStatus::Unbounded;

      ++iterations;
      degenerate_run = step <= opt_.feasibility ? degenerate_run + 1 : 0;

      for (std::size_t i = 0; i < m_; ++i) beta_[i] += -dir * at(i, enter) * step;
      x_[enter] += dir * step;

      if (leave_row == kNone) continue;  // bound flip only

      const std::size_t leave = basis_[leave_row];
      const double rate = -dir * at(leave_row, enter);
      x_[leave] = rate < 0.0 ? lo_[leave] : hi_[leave];
      pivot(leave_row, enter);
      row_of_[leave] = kNone;
      beta_[leave_row] = x_[enter];
    }
  }

  void pivot(std::size_t r, std::size_t j) {
    double* prow = &tab_[r * w_];
    const double inv = 1.0 / prow[j];
    for (std::size_t k = 0; k < w_; ++k) prow[k] *= inv;
    prow[j] = 1.0;
    std::vector<std::size_t> nz;
    for (std::size_t k = 0; k < w_; ++k)
      if (prow[k] != 0.0) nz.push_back(k);
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &tab_[i * w_];
      const double f = row[j];
      if (f == 0.0) continue;
      for (std::size_t k : nz) row[k] -= f * prow[k];
      row[j] = 0.0;
    }
    basis_[r] = j;
    row_of_[j] = r;
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      std::size_t best = kNone;
      double mag = opt_.pivot * 1e3;
      for (std::size_t j = 0; j < n_; ++j) {
        if (row_of_[j] != kNone) continue;
        if (std::abs(at(i, j)) > mag) {
          mag = std::abs(at(i, j));
          best = j;
        }
      }
      if (best == kNone) continue;  // redundant row; artificial stays basic at 0
      const std::size_t art = basis_[i];
      const double value = x_[best];
      x_[art] = 0.0;
      // degenerate pivot: basic values do not move because the artificial is ~0
      pivot(i, best);
      row_of_[art] = kNone;
      beta_[i] = value;
    }
  }

  SimplexOptions opt_;
  std::size_t m_, n_, w_;
  std::vector<double> lo_, hi_, cost_, x_;
  std::vector<double> tab_, beta_;
  std::vector<std::size_t> basis_, row_of_;
};

}  // namespace detail

// Solves a LinearProgram to optimality with the dense bounded-variable simplex.
// The pivoting rule is deterministic.
inline LpResult solve_lp(const LinearProgram& lp, const SimplexOptions& opt = {}) {
  lp.validate();
  detail::DenseSimplex s(lp, opt);
  return s.run();
}

}  // namespace tdtsp::lp
