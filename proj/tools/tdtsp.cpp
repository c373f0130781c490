// tdtsp: generate instances, train the arrival-time model, solve and benchmark.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tdtsp/bounds/bounds.hpp"
#include "tdtsp/error.hpp"
#include "tdtsp/io/generator.hpp"
#include "tdtsp/io/instance.hpp"
#include "tdtsp/io/pipeline.hpp"
#include "tdtsp/io/results.hpp"
#include "tdtsp/learn/mlp.hpp"

namespace {

using namespace tdtsp;

constexpr int kExitInput = 2;
constexpr int kExitCapacity = 3;

std::optional<double> parse_rho(const std::string& s) {
  if (s == "auto") return std::nullopt;
  auto v = io::parse_double(s);
  if (!v || !(*v > 0.0)) throw ConfigError("--rho must be 'auto' or a positive number");
  return v;
}

std::vector<bounds::Method> parse_methods(const std::string& list) {
  std::vector<bounds::Method> out;
  std::stringstream ss(list);
  std::string m;
  while (std::getline(ss, m, ','))
    if (!m.empty()) out.push_back(io::parse_method(m));
  if (out.empty()) throw ConfigError("--methods lists no method");
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os || !(os << text)) throw ConfigError("cannot write " + path);
}

struct GenerateArgs {
  std::string config, out;
  std::size_t count = 1, start = 1;
  std::optional<std::size_t> customers;
  std::optional<double> pi;
  std::optional<std::uint64_t> seed;
};

int run_generate(const GenerateArgs& a) {
  io::GeneratorConfig cfg = a.config.empty() ? io::GeneratorConfig{} : io::load_generator_config(a.config);
  if (a.customers) cfg.customers = *a.customers;
  if (a.pi) cfg.pi = *a.pi;
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();
  std::filesystem::create_directories(a.out);
  for (std::size_t k = 0; k < a.count; ++k) {
    const auto f = io::generate_instance(cfg, a.start + k);
    const auto path = (std::filesystem::path(a.out) / (f.name + io::kInstanceExtension)).string();
    io::save_instance(f, path);
    std::cout << path << '\n';
  }
  return 0;
}

struct TrainArgs {
  std::string instances, model_out, report;
  std::size_t k = 5;
  std::uint64_t seed = 1;
  bool fitted_labels = false;
};

int run_train(const TrainArgs& a) {
  const auto paths = io::list_instances(a.instances);
  std::vector<TimeDependentGraph> gs;
  for (const auto& p : paths) gs.push_back(io::load_instance(p).graph);
  io::TrainOptions opt;
  opt.zones = a.k;
  opt.seed = a.seed;
  opt.fitted_labels = a.fitted_labels;
  const auto out = io::train_model(gs, opt);
  learn::save_model(out.model, a.model_out);
  const std::string report = learn::error_report(out.model);
  if (!a.report.empty()) write_file(a.report, report);
  std::cout << "instances " << gs.size() << " (dp labels " << out.dp_labels << ", heuristic labels "
            << out.heuristic_labels << ")\n"
            << "zones " << out.model.zones() << "  train " << out.model.train_size << "  validation "
            << out.model.validation_size << "  iterations " << out.model.iterations << '\n'
            << report;
  return 0;
}

struct SolveArgs {
  std::string instance, method = "pl", model, rho = "auto";
  double step = kDefaultStep;
};

int run_solve(const SolveArgs& a) {
  const auto f = io::load_instance(a.instance);
  io::SolveOptions opt;
  opt.step = a.step;
  opt.rho = parse_rho(a.rho);
  std::optional<learn::EtaModel> model;
  if (!a.model.empty()) model = learn::load_model(a.model);
  opt.model = model ? &*model : nullptr;
  const auto r = io::run_method(f.graph, io::parse_method(a.method), opt);
  const auto bk = bounds::best_known(f.graph, {r});

  std::cout << "instance " << f.name << '\n' << "method " << bounds::to_string(r.method) << '\n' << "tour 0";
  for (auto v : r.tour.order) std::cout << ' ' << v;
  std::cout << " 0\n";
  char buf[128];
  std::snprintf(buf, sizeof buf, "ub %.6f\nBK %.6f %s\nDEV=%.2f\n", r.ub, bk.value, bounds::to_string(bk.provenance),
                bounds::dev_percent(r.ub, bk.value));
  std::cout << buf;
  if (r.zeta_star) std::cout << "zeta_star " << io::format_double(*r.zeta_star) << '\n';
  std::cout << "omega_size " << r.omega_size << '\n' << "lp_rows " << r.lp_rows << '\n';
  std::snprintf(buf, sizeof buf, "time_s %.6f\n", r.wall_time);
  std::cout << buf;
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

struct BenchArgs {
  std::string dir, methods = "htsp,pl", model, out = "results.csv", rho = "auto";
  double step = kDefaultStep;
  std::size_t threads = 0;
};

int run_bench(const BenchArgs& a) {
  const auto methods = parse_methods(a.methods);
  io::SolveOptions opt;
  opt.step = a.step;
  opt.rho = parse_rho(a.rho);
  std::optional<learn::EtaModel> model;
  if (!a.model.empty()) model = learn::load_model(a.model);
  opt.model = model ? &*model : nullptr;
  const auto paths = io::list_instances(a.dir);
  if (paths.empty()) throw ConfigError("no *" + std::string(io::kInstanceExtension) + " files in " + a.dir);
  const auto t = io::run_benchmark(paths, methods, opt, a.threads ? a.threads : io::thread_count());

  std::ostringstream csv, sum_csv;
  io::write_results(csv, t);
  const auto sum = io::summarize(t);
  io::write_summary(sum_csv, sum);
  write_file(a.out, csv.str());
  write_file(io::summary_path(a.out), sum_csv.str());
  io::print_summary(std::cout, sum);
  for (const auto& f : t.failures) std::cerr << "failed: " << f.instance << ' ' << f.method << ": " << f.message << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned upper bounds for the time-dependent TSP"};
  app.require_subcommand(1);

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "write synthetic instances");
  gen->add_option("--config", ga.config, "generator config (JSON)")->check(CLI::ExistingFile);
  gen->add_option("--out", ga.out, "output directory")->required();
  gen->add_option("--count", ga.count, "number of instances")->check(CLI::PositiveNumber);
  gen->add_option("--start-index", ga.start, "index of the first instance");
  gen->add_option("--customers", ga.customers, "override n");
  gen->add_option("--pi", ga.pi, "override the perturbation level");
  gen->add_option("--seed", ga.seed, "override the family seed");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "fit zones and the arrival-time network");
  train->add_option("--instances", ta.instances, "directory of training instances")->required();
  train->add_option("--k", ta.k, "number of zones")->check(CLI::PositiveNumber);
  train->add_option("--seed", ta.seed, "seed for k-means and the network");
  train->add_option("--model-out", ta.model_out, "model file to write")->required();
  train->add_option("--report", ta.report, "also write the per-zone error report here");
  train->add_flag("--fitted-labels", ta.fitted_labels, "n > 16: let PL-HTSP compete for the label tour");

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "upper bound for one instance");
  solve->add_option("--instance", sa.instance, "instance file")->required();
  solve->add_option("--method", sa.method, "htsp, pl or mlpl")->check(CLI::IsMember({"htsp", "pl", "mlpl"}));
  solve->add_option("--model", sa.model, "model file (mlpl)");
  solve->add_option("--step-minutes", sa.step, "discretization step")->check(CLI::PositiveNumber);
  solve->add_option("--rho", sa.rho, "'auto' or a positive speed floor");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "run methods over a directory of instances");
  bench->add_option("--dir", ba.dir, "instance directory")->required();
  bench->add_option("--methods", ba.methods, "comma separated: htsp,pl,mlpl");
  bench->add_option("--model", ba.model, "model file (mlpl)");
  bench->add_option("--out", ba.out, "results CSV");
  bench->add_option("--step-minutes", ba.step, "discretization step")->check(CLI::PositiveNumber);
  bench->add_option("--rho", ba.rho, "'auto' or a positive speed floor");
  bench->add_option("--threads", ba.threads, "workers (default TDTSP_THREADS or all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitInput;
  }

  try {
    if (*gen) return run_generate(ga);
    if (*train) return run_train(ta);
    if (*solve) return run_solve(sa);
    if (*bench) return run_bench(ba);
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const GenerationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
