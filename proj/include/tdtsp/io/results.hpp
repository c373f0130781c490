#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "tdtsp/error.hpp"
#include "tdtsp/io/instance.hpp"

namespace tdtsp::io {

inline constexpr const char* kResultsHeader = "instance,BK,ub,dev_pct,time_s,method,zeta_star,omega_size,bk_provenance";
inline constexpr const char* kSummaryHeader = "method,count,failed,dev_avg,dev_min,dev_max,time_avg,time_min,time_max";

struct ResultRow {
  std::string instance;
  double bk = 0.0;
  double ub = 0.0;
  double dev_pct = 0.0;
  double time_s = 0.0;
  std::string method;
  std::optional<double> zeta_star;  // empty for HTSP
  std::size_t omega_size = 0;
  std::string bk_provenance;

  bool operator==(const ResultRow&) const = default;
};

struct Failure {
  std::string instance;
  std::string method;
  std::string message;
};

struct ResultsTable {
  std::vector<ResultRow> rows;
  std::vector<Failure> failures;

  void sort() {
    auto key = [](const auto& r) { return std::tie(r.instance, r.method); };
    std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    std::stable_sort(failures.begin(), failures.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  }
};

inline std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline void write_results(std::ostream& os, const ResultsTable& t) {
  os << kResultsHeader << '\n';
  for (const auto& r : t.rows) {
    os << r.instance << ',' << format_double(r.bk) << ',' << format_double(r.ub) << ',' << format_double(r.dev_pct)
       << ',' << format_fixed(r.time_s, 6) << ',' << r.method << ','
       << (r.zeta_star ? format_double(*r.zeta_star) : std::string()) << ',' << r.omega_size << ','
       << r.bk_provenance << '\n';
  }
}

inline ResultsTable read_results(std::istream& is) {
  ResultsTable t;
  std::string line;
  std::size_t ln = 0;
  if (!std::getline(is, line)) throw ParseError("empty results file", 0);
  ++ln;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader) throw ParseError("unexpected results header", ln);
  while (std::getline(is, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.push_back("");
    if (f.size() != 9) throw ParseError("expected 9 fields, got " + std::to_string(f.size()), ln);
    auto num = [&](const std::string& s, const char* what) {
      auto v = parse_double(s);
      if (!v) throw ParseError(std::string("bad ") + what + " '" + s + "'", ln);
      return *v;
    };
    ResultRow r;
    r.instance = f[0];
    r.bk = num(f[1], "BK");
    r.ub = num(f[2], "ub");
    r.dev_pct = num(f[3], "dev_pct");
    r.time_s = num(f[4], "time_s");
    r.method = f[5];
    if (!f[6].empty()) r.zeta_star = num(f[6], "zeta_star");
    auto om = parse_uint(f[7]);
    if (!om) throw ParseError("bad omega_size '" + f[7] + "'", ln);
    r.omega_size = static_cast<std::size_t>(*om);
    r.bk_provenance = f[8];
    if (r.bk_provenance != "dp_exact" && r.bk_provenance != "best_of_heuristics")
      throw ParseError("bad bk_provenance '" + r.bk_provenance + "'", ln);
    if (r.instance.empty() || r.method.empty()) throw ParseError("empty instance or method", ln);
    t.rows.push_back(std::move(r));
  }
  return t;
}

struct MethodSummary {
  std::string method;
  std::size_t count = 0, failed = 0;
  double dev_avg = 0.0, dev_min = 0.0, dev_max = 0.0;
  double time_avg = 0.0, time_min = 0.0, time_max = 0.0;
};

// Per method: average, minimum and maximum of DEV% and time over the rows.
inline std::vector<MethodSummary> summarize(const ResultsTable& t) {
  std::map<std::string, MethodSummary> by;
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (const auto& r : t.rows) {
    auto& s = by[r.method];
    if (s.count == 0) {
      s.method = r.method;
      s.dev_min = s.time_min = inf;
      s.dev_max = s.time_max = -inf;
    }
    ++s.count;
    s.dev_avg += r.dev_pct;
    s.time_avg += r.time_s;
    s.dev_min = std::min(s.dev_min, r.dev_pct);
    s.dev_max = std::max(s.dev_max, r.dev_pct);
    s.time_min = std::min(s.time_min, r.time_s);
    s.time_max = std::max(s.time_max, r.time_s);
  }
  for (const auto& f : t.failures) {
    auto& s = by[f.method];
    s.method = f.method;
    ++s.failed;
  }
  std::vector<MethodSummary> out;
  for (auto& [_, s] : by) {
    if (s.count > 0) {
      s.dev_avg /= static_cast<double>(s.count);
      s.time_avg /= static_cast<double>(s.count);
    }
    out.push_back(s);
  }
  return out;
}

inline void write_summary(std::ostream& os, const std::vector<MethodSummary>& sum) {
  os << kSummaryHeader << '\n';
  for (const auto& s : sum) {
    os << s.method << ',' << s.count << ',' << s.failed;
    for (double v : {s.dev_avg, s.dev_min, s.dev_max}) os << ',' << (s.count ? format_fixed(v, 2) : "");
    for (double v : {s.time_avg, s.time_min, s.time_max}) os << ',' << (s.count ? format_fixed(v, 6) : "");
    os << '\n';
  }
}

inline void print_summary(std::ostream& os, const std::vector<MethodSummary>& sum) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %6s %6s %9s %9s %9s %10s %10s %10s\n", "method", "count", "failed", "DEV avg",
                "DEV min", "DEV max", "time avg", "time min", "time max");
  os << buf;
  for (const auto& s : sum) {
    if (s.count == 0) {
      std::snprintf(buf, sizeof buf, "%-10s %6zu %6zu\n", s.method.c_str(), s.count, s.failed);
    } else {
      std::snprintf(buf, sizeof buf, "%-10s %6zu %6zu %9.2f %9.2f %9.2f %10.4f %10.4f %10.4f\n", s.method.c_str(),
                    s.count, s.failed, s.dev_avg, s.dev_min, s.dev_max, s.time_avg, s.time_min, s.time_max);
    }
    os << buf;
  }
}

// foo.csv -> foo.summary.csv
inline std::string summary_path(const std::string& results_path) {
  const std::string ext = ".csv";
  if (results_path.size() > ext.size() && results_path.compare(results_path.size() - ext.size(), ext.size(), ext) == 0)
    return results_path.substr(0, results_path.size() - ext.size()) + ".summary.csv";
  return results_path + ".summary.csv";
}

}  // namespace tdtsp::io
