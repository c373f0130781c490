#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "tdtsp/error.hpp"
#include "tdtsp/fit/coefficients.hpp"
#include "tdtsp/lp/linear_program.hpp"

namespace tdtsp::fit {

// The fitting LP:
//   min  sum_a (xhi_a - xlo_a)
//   s.t. sum_h a_akh y_h - x_ak = 0      one equality per (arc, k)
//        xlo_a - x_ak <= 0, x_ak - xhi_a <= 0
//        x, xlo, xhi >= 0,  y_h >= rho
// Column layout: y (H), then x arc-major, then xlo (A), then xhi (A).
struct FitProblem {
  CoefficientMatrix coefficients;
  double rho = 0.0;
  std::vector<std::size_t> row_offset;  // first x column of each arc, relative to the x block

  std::size_t y_vars() const { return coefficients.intervals(); }
  std::size_t x_vars() const { return coefficients.total_rows(); }
  std::size_t bound_vars() const { return 2 * coefficients.arc_count(); }
  std::size_t equality_rows() const { return coefficients.total_rows(); }
  std::size_t inequality_rows() const { return 2 * coefficients.total_rows(); }
  std::size_t row_count() const { return equality_rows() + inequality_rows(); }

  std::size_t y_col(std::size_t h) const { return h; }
  std::size_t x_col(std::size_t arc, std::size_t k) const { return y_vars() + row_offset[arc] + k; }
  std::size_t xlo_col(std::size_t arc) const { return y_vars() + x_vars() + arc; }
  std::size_t xhi_col(std::size_t arc) const { return y_vars() + x_vars() + coefficients.arc_count() + arc; }
};

// 1 / min_h (T_{h+1} - T_h) over the union grid.
inline double default_rho(const TimeGrid& grid) { return 1.0 / grid.min_width(); }

inline FitProblem assemble_fit_lp(CoefficientMatrix co, double rho) {
  if (!(rho > 0.0)) throw ParameterError("rho must be positive");
  if (co.arc_count() == 0) throw ParameterError("fit LP needs at least one arc");
  FitProblem p;
  p.rho = rho;
  std::size_t off = 0;
  for (const auto& a : co.arcs) {
    if (a.rows.empty()) throw ParameterError("arc without sampling times");
    p.row_offset.push_back(off);
    off += a.rows.size();
  }
  p.coefficients = std::move(co);
  return p;
}

namespace detail {

inline std::string arc_tag(const ArcRows& a) { return std::to_string(a.from) + "_" + std::to_string(a.to); }

}  // namespace detail

// Normal form A z = b with one slack column per inequality row. Row order:
// fit rows (arc-major), then the xlo rows, then the xhi rows.
inline lp::LinearProgram to_linear_program(const FitProblem& p) {
  using lp::kInf;
  const auto& co = p.coefficients;
  lp::LinearProgram out;
  for (std::size_t h = 0; h < p.y_vars(); ++h) out.add_column(0.0, p.rho, kInf, "y_" + std::to_string(h));
  for (const auto& a : co.arcs)
    for (std::size_t k = 0; k < a.rows.size(); ++k)
      out.add_column(0.0, 0.0, kInf, "x_" + detail::arc_tag(a) + "_" + std::to_string(k));
  for (const auto& a : co.arcs) out.add_column(-1.0, 0.0, kInf, "xlo_" + detail::arc_tag(a));
  for (const auto& a : co.arcs) out.add_column(1.0, 0.0, kInf, "xhi_" + detail::arc_tag(a));

  for (std::size_t arc = 0; arc < co.arc_count(); ++arc) {
    const auto& a = co.arcs[arc];
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
      std::vector<lp::LinearProgram::Entry> e;
      const auto& r = a.rows[k];
      for (std::size_t q = 0; q < r.values.size(); ++q)
        if (r.values[q] != 0.0) e.push_back({p.y_col(r.first + q), r.values[q]});
      e.push_back({p.x_col(arc, k), -1.0});
      out.add_row(std::move(e), 0.0, "fit_" + detail::arc_tag(a) + "_" + std::to_string(k));
    }
  }
  for (int side = 0; side < 2; ++side) {
    for (std::size_t arc = 0; arc < co.arc_count(); ++arc) {
      const auto& a = co.arcs[arc];
      for (std::size_t k = 0; k < a.rows.size(); ++k) {
        const std::string tag = detail::arc_tag(a) + "_" + std::to_string(k);
        auto s = out.add_column(0.0, 0.0, kInf, (side == 0 ? "slo_" : "shi_") + tag);
        if (side == 0)  // xlo - x + s = 0
          out.add_row({{p.xlo_col(arc), 1.0}, {p.x_col(arc, k), -1.0}, {s, 1.0}}, 0.0, "lo_" + tag);
        else  // x - xhi + s = 0
          out.add_row({{p.x_col(arc, k), 1.0}, {p.xhi_col(arc), -1.0}, {s, 1.0}}, 0.0, "hi_" + tag);
      }
    }
  }
  return out;
}

namespace detail {

inline void write_term(std::ostream& os, double coef, const std::string& name, bool first) {
  if (coef < 0) {
    os << (first ? "-" : " - ");
    coef = -coef;
  } else if (!first) {
    os << " + ";
  }
  if (coef != 1.0) os << coef << ' ';
  os << name;
}

}  // namespace detail

// CPLEX-style LP text of the fitting model. Rows appear as fit_i_j_k (arc-major,
// k ascending), then lo_i_j_k, then hi_i_j_k; y_h >= rho in the Bounds section.
inline void write_lp(std::ostream& os, const FitProblem& p) {
  const auto& co = p.coefficients;
  auto old_prec = os.precision(17);
  os << "\\ travel-time fitting LP: " << co.arc_count() << " arcs, " << p.y_vars() << " speed intervals, "
     << co.total_rows() << " sampled departures\n";
  os << "Minimize\n obj:";
  bool first = true;
  for (const auto& a : co.arcs) {
    os << (first ? " " : " + ") << "xhi_" << detail::arc_tag(a) << " - xlo_" << detail::arc_tag(a);
    first = false;
  }
  os << "\nSubject To\n";
  for (const auto& a : co.arcs)
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
      const auto& r = a.rows[k];
      os << " fit_" << detail::arc_tag(a) << "_" << k << ": ";
      bool f = true;
      for (std::size_t q = 0; q < r.values.size(); ++q) {
        if (r.values[q] == 0.0) continue;
        detail::write_term(os, r.values[q], "y_" + std::to_string(r.first + q), f);
        f = false;
      }
      detail::write_term(os, -1.0, "x_" + detail::arc_tag(a) + "_" + std::to_string(k), f);
      os << " = 0\n";
    }
  for (const auto& a : co.arcs)
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
      const std::string tag = detail::arc_tag(a);
      os << " lo_" << tag << "_" << k << ": xlo_" << tag << " - x_" << tag << "_" << k << " <= 0\n";
    }
  for (const auto& a : co.arcs)
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
      const std::string tag = detail::arc_tag(a);
      os << " hi_" << tag << "_" << k << ": x_" << tag << "_" << k << " - xhi_" << tag << " <= 0\n";
    }
  os << "Bounds\n";
  for (std::size_t h = 0; h < p.y_vars(); ++h) os << " y_" << h << " >= " << p.rho << "\n";
  os << "End\n";
  os.precision(old_prec);
}

// Same format for a generic LinearProgram (all rows are equalities).
inline void write_lp(std::ostream& os, const lp::LinearProgram& prog) {
  auto old_prec = os.precision(17);
  os << "Minimize\n obj:";
  bool first = true;
  for (std::size_t j = 0; j < prog.cols(); ++j) {
    if (prog.cost[j] == 0.0) continue;
    os << ' ';
    detail::write_term(os, prog.cost[j], prog.col_names[j], first);
    first = false;
  }
  if (first) os << " 0";
  os << "\nSubject To\n";
  for (const auto& r : prog.rows) {
    os << ' ' << r.name << ": ";
    bool f = true;
    for (const auto& e : r.entries) {
      detail::write_term(os, e.value, prog.col_names[e.col], f);
      f = false;
    }
    if (f) os << "0 " << prog.col_names.front();
    os << " = " << r.rhs << "\n";
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < prog.cols(); ++j) {
    const double lo = prog.lower[j], hi = prog.upper[j];
    const auto& nm = prog.col_names[j];
    if (std::isinf(lo) && std::isinf(hi)) {
      os << ' ' << nm << " free\n";
    } else if (lo == 0.0 && std::isinf(hi)) {
      continue;
    } else {
      os << ' ' << (std::isinf(lo) ? "-inf" : std::to_string(lo)) << " <= " << nm << " <= "
         << (std::isinf(hi) ? "+inf" : std::to_string(hi)) << "\n";
    }
  }
  os << "End\n";
  os.precision(old_prec);
}

}  // namespace tdtsp::fit
