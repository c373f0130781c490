#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "tdtsp/error.hpp"
#include "tdtsp/graph.hpp"
#include "tdtsp/travel_time.hpp"

namespace tdtsp::io {

inline constexpr const char* kInstanceMagic = "tdtsp-instance";
inline constexpr int kInstanceVersion = 1;

// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw ParameterError("cannot format number");
  return std::string(buf, end);
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> parse_uint(std::string_view s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

struct Provenance {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  double pi = 0.0;

  bool operator==(const Provenance&) const = default;
};

struct InstanceFile {
  std::string name;
  TimeDependentGraph graph;
  std::optional<Provenance> provenance;

  bool operator==(const InstanceFile&) const = default;
};

// Layout, one record per line ('#' starts a comment):
//   tdtsp-instance 1
//   name <token>
//   customers <n>
//   horizon <T>
//   provenance <seed> <index> <pi>        (optional)
//   vertex <i> <x> <y>                    (i = 0..n)
//   arc <i> <j> <m> <t_1> <tau_1> ... <t_m> <tau_m>
//   end
inline void write_instance(std::ostream& os, const InstanceFile& f) {
  const auto& g = f.graph;
  os << kInstanceMagic << ' ' << kInstanceVersion << '\n';
  os << "name " << (f.name.empty() ? "unnamed" : f.name) << '\n';
  os << "customers " << g.customers() << '\n';
  os << "horizon " << format_double(g.horizon()) << '\n';
  if (f.provenance)
    os << "provenance " << f.provenance->seed << ' ' << f.provenance->index << ' '
       << format_double(f.provenance->pi) << '\n';
  auto pts = g.coordinates();
  for (Vertex i = 0; i < g.vertices(); ++i)
    os << "vertex " << i << ' ' << format_double(pts[i].x) << ' ' << format_double(pts[i].y) << '\n';
  for (Vertex i = 0; i < g.vertices(); ++i) {
    for (Vertex j = 0; j < g.vertices(); ++j) {
      if (i == j) continue;
      auto s = g.arc(i, j).samples();
      os << "arc " << i << ' ' << j << ' ' << s.size();
      for (const auto& smp : s) os << ' ' << format_double(smp.t) << ' ' << format_double(smp.tau);
      os << '\n';
    }
  }
  os << "end\n";
}

inline std::string to_text(const InstanceFile& f) {
  std::ostringstream os;
  write_instance(os, f);
  return os.str();
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

inline InstanceFile read_instance(std::istream& is) {
  std::string raw;
  std::size_t ln = 0;
  InstanceFile f;
  std::optional<std::size_t> n;
  std::optional<double> horizon;
  std::vector<std::optional<Point>> verts;
  std::vector<TravelTimeFunction> arcs;
  std::vector<std::size_t> arc_line;
  bool header = false, ended = false, named = false;

  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) throw ParseError(msg, ln);
  };
  auto num = [&](std::string_view s, const char* what) {
    auto v = parse_double(s);
    need(v.has_value(), std::string("bad ") + what + " '" + std::string(s) + "'");
    return *v;
  };
  auto idx = [&](std::string_view s, const char* what) {
    auto v = parse_uint(s);
    need(v.has_value(), std::string("bad ") + what + " '" + std::string(s) + "'");
    return static_cast<std::size_t>(*v);
  };

  while (std::getline(is, raw)) {
    ++ln;
    std::string_view line = raw;
    if (auto c = line.find('#'); c != std::string_view::npos) line = line.substr(0, c);
    auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    need(!ended, "content after 'end'");
    if (!header) {
      need(tok.size() == 2 && tok[0] == kInstanceMagic, "expected header 'tdtsp-instance 1'");
      need(tok[1] == std::to_string(kInstanceVersion), "unsupported schema version " + std::string(tok[1]));
      header = true;
      continue;
    }
    const std::string_view key = tok[0];
    if (key == "name") {
      need(tok.size() == 2 && !named, "expected one 'name <token>' line");
      f.name = std::string(tok[1]);
      named = true;
    } else if (key == "customers") {
      need(tok.size() == 2 && !n, "expected one 'customers <n>' line");
      n = idx(tok[1], "customer count");
      need(*n >= 1, "need at least one customer");
      verts.assign(*n + 1, std::nullopt);
      arcs.assign((*n + 1) * (*n + 1), TravelTimeFunction{});
      arc_line.assign(arcs.size(), 0);
    } else if (key == "horizon") {
      need(tok.size() == 2 && !horizon, "expected one 'horizon <T>' line");
      horizon = num(tok[1], "horizon");
      need(*horizon > 0.0, "horizon must be positive");
    } else if (key == "provenance") {
      need(tok.size() == 4 && !f.provenance, "expected one 'provenance <seed> <index> <pi>' line");
      Provenance p;
      auto s = parse_uint(tok[1]), i = parse_uint(tok[2]);
      need(s && i, "bad provenance seed or index");
      p.seed = *s;
      p.index = *i;
      p.pi = num(tok[3], "perturbation level");
      f.provenance = p;
    } else if (key == "vertex") {
      need(n.has_value(), "'vertex' before 'customers'");
      need(tok.size() == 4, "expected 'vertex <i> <x> <y>'");
      const std::size_t i = idx(tok[1], "vertex index");
      need(i < verts.size(), "vertex " + std::to_string(i) + " out of range");
      need(!verts[i], "duplicate vertex " + std::to_string(i));
      verts[i] = Point{num(tok[2], "coordinate"), num(tok[3], "coordinate")};
    } else if (key == "arc") {
      need(n.has_value(), "'arc' before 'customers'");
      need(tok.size() >= 4, "expected 'arc <i> <j> <m> samples...'");
      const std::size_t i = idx(tok[1], "arc tail"), j = idx(tok[2], "arc head"), m = idx(tok[3], "sample count");
      const std::size_t V = *n + 1;
      need(i < V && j < V && i != j, "arc (" + std::to_string(i) + "," + std::to_string(j) + ") is not a valid arc");
      need(m >= 1, "arc needs at least one sample");
      need(tok.size() == 4 + 2 * m, "arc declares " + std::to_string(m) + " samples but lists " +
                                         std::to_string((tok.size() - 4) / 2));
      need(arc_line[i * V + j] == 0, "duplicate arc (" + std::to_string(i) + "," + std::to_string(j) + ")");
      std::vector<TimeSample> smp(m);
      for (std::size_t k = 0; k < m; ++k) smp[k] = {num(tok[4 + 2 * k], "time"), num(tok[5 + 2 * k], "travel time")};
      try {
        arcs[i * V + j] = TravelTimeFunction(std::move(smp));
      } catch (const ParameterError& e) {
        throw ParseError(e.what(), ln);
      }
      arc_line[i * V + j] = ln;
    } else if (key == "end") {
      need(tok.size() == 1, "unexpected tokens after 'end'");
      ended = true;
    } else {
      throw ParseError("unknown record '" + std::string(key) + "'", ln);
    }
  }
  if (!header) throw ParseError("empty input, expected header 'tdtsp-instance 1'", 0);
  if (!ended) throw ParseError("missing 'end' line", ln);
  if (!n) throw ParseError("missing 'customers' line", 0);
  if (!horizon) throw ParseError("missing 'horizon' line", 0);
  const std::size_t V = *n + 1;
  std::vector<Point> coords(V);
  for (Vertex i = 0; i < V; ++i) {
    if (!verts[i]) throw ParseError("missing vertex " + std::to_string(i), 0);
    coords[i] = *verts[i];
  }
  std::string non_fifo;
  std::size_t first_bad = 0;
  for (Vertex i = 0; i < V; ++i) {
    for (Vertex j = 0; j < V; ++j) {
      if (i == j) continue;
      const std::size_t a = i * V + j;
      const std::string tag = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
      if (!arc_line[a]) throw ParseError("missing arc " + tag, 0);
      const auto& fn = arcs[a];
      if (fn.samples().size() > 1 && fn.end_time() != *horizon)
        throw ParseError("arc " + tag + " samples must end at the horizon", arc_line[a]);
      if (fn.min_value() <= 0.0) throw ParseError("arc " + tag + " has a non-positive travel time", arc_line[a]);
      if (!validate_fifo(fn).empty()) {
        if (!first_bad) first_bad = arc_line[a];
        non_fifo += (non_fifo.empty() ? "" : " ") + tag;
      }
    }
  }
  if (!non_fifo.empty()) throw ParseError("FIFO violated on arcs " + non_fifo, first_bad);
  f.graph = TimeDependentGraph(*n, *horizon, std::move(arcs), std::move(coords));
  if (!named) f.name = "unnamed";
  return f;
}

inline InstanceFile from_text(const std::string& text) {
  std::istringstream is(text);
  return read_instance(is);
}

inline void save_instance(const InstanceFile& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path);
  write_instance(os, f);
  if (!os) throw ConfigError("write failed for " + path);
}

inline InstanceFile load_instance(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  return read_instance(is);
}

}  // namespace tdtsp::io
