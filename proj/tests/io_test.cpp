#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

#include <unistd.h>

#include "test_support.hpp"
#include "tdtsp/io/generator.hpp"
#include "tdtsp/io/instance.hpp"
#include "tdtsp/io/pipeline.hpp"
#include "tdtsp/io/results.hpp"

using namespace tdtsp;
using namespace tdtsp::io;

namespace {

InstanceFile random_instance(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  auto g = testkit::random_fifo_graph(rng, n, 480.0, 5);
  std::uniform_real_distribution<double> U(-50.0, 50.0);
  std::vector<Point> pts(n + 1);
  for (auto& p : pts) p = {U(rng), U(rng)};
  std::vector<TravelTimeFunction> arcs(g.arc_table().begin(), g.arc_table().end());
  InstanceFile f;
  f.name = "rand_" + std::to_string(seed);
  f.graph = TimeDependentGraph(n, 480.0, std::move(arcs), std::move(pts));
  f.provenance = Provenance{seed, 7, 0.1};
  return f;
}

std::string small_text(const std::string& arc12) {
  return "tdtsp-instance 1\n"
         "name tiny\n"
         "customers 2\n"
         "horizon 10\n"
         "vertex 0 0 0\nvertex 1 1 0\nvertex 2 0 1\n"
         "arc 0 1 1 0 3\narc 0 2 1 0 3\narc 1 0 1 0 3\n" +
         arc12 +
         "\narc 2 0 1 0 3\narc 2 1 2 0 4 10 4\n"
         "end\n";
}

std::size_t parse_line(const std::string& text) {
  try {
    from_text(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return static_cast<std::size_t>(-1);
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("tdtsp_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

GeneratorConfig small_config(double pi, std::uint64_t seed = 3) {
  GeneratorConfig c;
  c.customers = 5;
  c.periods = 4;
  c.pi = pi;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(InstanceFormat, RoundTripIsIdentity) {
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto f = random_instance(s, 4);
    const std::string text = to_text(f);
    const auto back = from_text(text);
    EXPECT_EQ(back, f);
    EXPECT_EQ(to_text(back), text);
  }
}

TEST(InstanceFormat, SaveAndLoadThroughAFile) {
  TempDir d;
  const auto f = random_instance(11, 3);
  save_instance(f, d.file("a.tdtsp"));
  EXPECT_EQ(load_instance(d.file("a.tdtsp")), f);
  EXPECT_THROW(load_instance(d.file("missing.tdtsp")), ConfigError);
}

TEST(InstanceFormat, CommentsAndBlankLinesAreIgnored) {
  std::string t = small_text("arc 1 2 1 0 3");
  t.insert(0, "# generated by hand\n\n");
  const auto f = from_text(t);
  EXPECT_EQ(f.name, "tiny");
  EXPECT_EQ(f.graph.customers(), 2u);
  EXPECT_DOUBLE_EQ(f.graph.travel_time(2, 1, 3.0), 4.0);
}

TEST(InstanceFormat, MalformedHeaderIsRejectedOnLineOne) {
  EXPECT_EQ(parse_line("tdtsp-instanc 1\n"), 1u);
  EXPECT_EQ(parse_line("tdtsp-instance 2\n"), 1u);
  EXPECT_THROW(from_text(""), ParseError);
}

TEST(InstanceFormat, DiagnosticsCarryTheLine) {
  EXPECT_EQ(parse_line(small_text("arc 1 2 1 0 x")), 11u);
  EXPECT_EQ(parse_line(small_text("arc 1 2 2 0 3")), 11u);
  EXPECT_EQ(parse_line(small_text("arc 1 1 1 0 3")), 11u);
  EXPECT_EQ(parse_line(small_text("arc 0 1 1 0 3")), 11u);   // duplicate
  EXPECT_EQ(parse_line(small_text("bogus 1")), 11u);
  EXPECT_EQ(parse_line(small_text("arc 1 2 2 0 3 5 3")), 11u);  // does not end at T
  EXPECT_EQ(parse_line(small_text("arc 1 2 2 0 0 10 0")), 11u);  // zero travel time
  EXPECT_THROW(from_text(small_text("")), ParseError);           // arc (1,2) missing
}

TEST(InstanceFormat, NonFifoArcsAreListed) {
  std::string t = small_text("arc 1 2 3 0 10 1 2 10 2");
  const std::string bad = "arc 2 1 2 0 4 10 4";
  t.replace(t.find(bad), bad.size(), "arc 2 1 3 0 9 1 1 10 1");
  try {
    from_text(t);
    FAIL() << "non-FIFO instance accepted";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("(1,2)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(2,1)"), std::string::npos) << msg;
    EXPECT_EQ(e.line(), 11u);
  }
}

TEST(InstanceFormat, NumbersUseTheShortestExactText) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(480.0), "480");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(*parse_double(format_double(x)), x);
  EXPECT_FALSE(parse_double("1e400"));
  EXPECT_FALSE(parse_double("nan"));
  EXPECT_FALSE(parse_double("1.5x"));
}

TEST(Generator, SameSeedGivesIdenticalText) {
  const auto c = small_config(0.3);
  EXPECT_EQ(to_text(generate_instance(c, 1)), to_text(generate_instance(c, 1)));
  EXPECT_NE(to_text(generate_instance(c, 1)), to_text(generate_instance(c, 2)));
  EXPECT_EQ(generate_instance(c, 4).name, "3_I_4");
}

TEST(Generator, SiblingsShareTheFamily) {
  const auto c = small_config(0.0);
  const auto a = make_family(c), b = make_family(c);
  EXPECT_EQ(a.profile, b.profile);
  for (double bp : a.profile.grid().breakpoints()) EXPECT_EQ(std::fmod(bp, 5.0), 0.0);
  auto c2 = c;
  c2.seed = 4;
  EXPECT_NE(make_family(c2).profile, a.profile);
}

TEST(Generator, UnperturbedInstancesAreIgp) {
  const auto c = small_config(0.0);
  const auto fam = make_family(c);
  const auto f = generate_instance(c, 1);
  const auto& g = f.graph;
  auto pts = g.coordinates();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 480.0);
  for (Vertex i = 0; i < g.vertices(); ++i) {
    for (Vertex j = 0; j < g.vertices(); ++j) {
      if (i == j) continue;
      const double L = std::max(1e-3 * c.area, std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y));
      for (int r = 0; r < 20; ++r) {
        const double t = U(rng);
        EXPECT_NEAR(g.travel_time(i, j, t), igp_travel_time(fam.profile, L, t), 1e-9);
      }
    }
  }
}

TEST(Generator, UnperturbedInstancesFitPerfectly) {
  const auto f = generate_instance(small_config(0.0), 2);
  const auto r = bounds::pl_htsp(f.graph, bounds::Discretization(5.0, f.graph.horizon()));
  ASSERT_TRUE(r.zeta_star.has_value());
  EXPECT_LE(*r.zeta_star, 1e-6);
}

TEST(Generator, SinglePeriodIsTimeInvariant) {
  auto c = small_config(0.0);
  c.periods = 1;
  const auto g = generate_instance(c, 1).graph;
  for (Vertex i = 0; i < g.vertices(); ++i) {
    for (Vertex j = 0; j < g.vertices(); ++j) {
      if (i == j) continue;
      EXPECT_NEAR(g.arc(i, j).min_value(), g.arc(i, j).max_value(), 1e-12 * g.arc(i, j).max_value());
    }
  }
}

TEST(Generator, PerturbedInstancesAreFifoAndDiffer) {
  const auto a = generate_instance(small_config(0.3), 1).graph;
  const auto b = generate_instance(small_config(0.0), 1).graph;
  bool differs = false;
  for (Vertex i = 0; i < a.vertices(); ++i)
    for (Vertex j = 0; j < a.vertices(); ++j) {
      if (i == j) continue;
      EXPECT_TRUE(validate_fifo(a.arc(i, j)).empty());
      differs |= a.arc(i, j) != b.arc(i, j);
    }
  EXPECT_TRUE(differs);
}

TEST(Generator, FifoRepairClipsForward) {
  std::vector<TimeSample> s{{0, 10}, {1, 2}, {2, 1.5}, {5, 4}};
  repair_fifo(s);
  EXPECT_DOUBLE_EQ(s[1].tau, 9.0);
  EXPECT_DOUBLE_EQ(s[2].tau, 8.0);
  EXPECT_DOUBLE_EQ(s[3].tau, 5.0);
  EXPECT_TRUE(validate_fifo(TravelTimeFunction(s)).empty());
}

TEST(Generator, FullPerturbationFailsOrStaysPositive) {
  auto c = small_config(1.0);
  for (std::uint64_t k = 1; k <= 5; ++k) {
    try {
      const auto g = generate_instance(c, k).graph;
      for (Vertex i = 0; i < g.vertices(); ++i) {
        for (Vertex j = 0; j < g.vertices(); ++j) {
          if (i == j) continue;
          EXPECT_GT(g.arc(i, j).min_value(), 0.0);
        }
      }
    } catch (const GenerationError&) {
    }
  }
}

TEST(Generator, ConfigJson) {
  GeneratorConfig c = small_config(0.2, 9);
  EXPECT_EQ(to_json(config_from_json(to_json(c))), to_json(c));
  EXPECT_THROW(config_from_json(nlohmann::json{{"customer", 3}}), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"pi", 1.5}}), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"customers", "ten"}}), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"periods", 200}}), ConfigError);
}

TEST(Results, RoundTripAndHeader) {
  ResultsTable t;
  t.rows.push_back({"1_I_1", 379.27, 387.43, bounds::dev_percent(387.43, 379.27), 0.5, "PL-HTSP", 1.25, 40,
                    "dp_exact"});
  t.rows.push_back({"1_I_1", 379.27, 390.0, bounds::dev_percent(390.0, 379.27), 0.001, "HTSP", std::nullopt, 0,
                    "dp_exact"});
  std::stringstream ss;
  write_results(ss, t);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "instance,BK,ub,dev_pct,time_s,method,zeta_star,omega_size,bk_provenance");
  const auto back = read_results(ss);
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(back.rows[0], t.rows[0]);
  EXPECT_FALSE(back.rows[1].zeta_star.has_value());
  for (const auto& r : back.rows) EXPECT_EQ(format_fixed(r.dev_pct, 2), format_fixed(100 * (r.ub - r.bk) / r.bk, 2));

  std::stringstream bad("instance,BK,ub\n");
  EXPECT_THROW(read_results(bad), ParseError);
  std::stringstream short_row(std::string(kResultsHeader) + "\na,1,2,3\n");
  EXPECT_THROW(read_results(short_row), ParseError);
}

TEST(Results, SummaryAveragesRows) {
  ResultsTable t;
  for (int k = 0; k < 4; ++k)
    t.rows.push_back({"i" + std::to_string(k), 100, 100.0 + k, double(k), 0.1 * k, "HTSP", std::nullopt, 0, "dp_exact"});
  t.failures.push_back({"i9", "HTSP", "boom"});
  const auto s = summarize(t);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].count, 4u);
  EXPECT_EQ(s[0].failed, 1u);
  EXPECT_DOUBLE_EQ(s[0].dev_avg, 1.5);
  EXPECT_DOUBLE_EQ(s[0].dev_min, 0.0);
  EXPECT_DOUBLE_EQ(s[0].dev_max, 3.0);
  EXPECT_NEAR(s[0].time_avg, 0.15, 1e-15);
  EXPECT_EQ(summary_path("out/results.csv"), "out/results.summary.csv");
  EXPECT_EQ(summary_path("results"), "results.summary.csv");
}

TEST(Bench, OneRowPerInstanceAndMethod) {
  TempDir d;
  const auto c = small_config(0.3);
  for (std::uint64_t k = 1; k <= 3; ++k) {
    const auto f = generate_instance(c, k);
    save_instance(f, d.file(f.name + ".tdtsp"));
  }
  save_instance(generate_instance(c, 9), d.file("ignored.txt"));
  const auto paths = list_instances(d.str());
  ASSERT_EQ(paths.size(), 3u);

  const auto t = run_benchmark(paths, {bounds::Method::HTSP}, {}, 2);
  ASSERT_EQ(t.rows.size(), 3u);
  double mean = 0.0;
  for (const auto& r : t.rows) {
    EXPECT_EQ(r.bk_provenance, "dp_exact");
    EXPECT_GE(r.ub, r.bk - 1e-9);
    mean += r.dev_pct / 3.0;
  }
  EXPECT_NEAR(summarize(t)[0].dev_avg, mean, 1e-12);

  const auto mixed = run_benchmark(paths, {bounds::Method::PL_HTSP, bounds::Method::HTSP, bounds::Method::MLPL_HTSP},
                                   {}, 3);
  ASSERT_EQ(mixed.rows.size(), 6u);
  EXPECT_EQ(mixed.failures.size(), 3u);  // no model for MLPL
  for (std::size_t k = 1; k < mixed.rows.size(); ++k)
    EXPECT_LE(std::tie(mixed.rows[k - 1].instance, mixed.rows[k - 1].method),
              std::tie(mixed.rows[k].instance, mixed.rows[k].method));
  EXPECT_EQ(mixed.rows[0].method, "HTSP");
  EXPECT_EQ(mixed.rows[1].method, "PL-HTSP");
}

TEST(Bench, UnreadableInstanceIsRecordedAndTheRunContinues) {
  TempDir d;
  save_instance(generate_instance(small_config(0.0), 1), d.file("a.tdtsp"));
  {
    std::ofstream os(d.file("b.tdtsp"));
    os << "tdtsp-instance 1\ncustomers x\n";
  }
  const auto t = run_benchmark(list_instances(d.str()), {bounds::Method::HTSP}, {}, 1);
  EXPECT_EQ(t.rows.size(), 1u);
  ASSERT_EQ(t.failures.size(), 1u);
  EXPECT_EQ(t.failures[0].instance, "b");
}

TEST(Bench, ThreadCountFromEnvironment) {
  ::setenv("TDTSP_THREADS", "3", 1);
  EXPECT_EQ(thread_count(), 3u);
  ::setenv("TDTSP_THREADS", "zero", 1);
  EXPECT_GE(thread_count(), 1u);
  ::unsetenv("TDTSP_THREADS");
}

TEST(Train, ModelFromDpLabels) {
  auto c = small_config(0.2);
  std::vector<TimeDependentGraph> gs;
  for (std::uint64_t k = 1; k <= 12; ++k) gs.push_back(generate_instance(c, k).graph);
  TrainOptions opt;
  opt.zones = 3;
  opt.seed = 5;
  opt.threads = 2;
  const auto out = train_model(gs, opt);
  EXPECT_EQ(out.dp_labels, 12u);
  EXPECT_EQ(out.heuristic_labels, 0u);
  EXPECT_EQ(out.model.zones(), 3u);
  const auto r = bounds::mlpl_htsp(gs[0], out.model, bounds::Discretization(5.0, 480.0));
  EXPECT_GE(r.ub, oracle::solve_tdtsp_exact(gs[0]).duration - 1e-9);
}
