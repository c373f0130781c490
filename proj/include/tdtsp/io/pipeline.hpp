#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tdtsp/bounds/bounds.hpp"
#include "tdtsp/error.hpp"
#include "tdtsp/io/instance.hpp"
#include "tdtsp/io/results.hpp"
#include "tdtsp/learn/kmeans.hpp"
#include "tdtsp/learn/labels.hpp"
#include "tdtsp/learn/mlp.hpp"
#include "tdtsp/oracle/exact.hpp"

namespace tdtsp::io {

inline constexpr const char* kInstanceExtension = ".tdtsp";

// TDTSP_THREADS if set to a positive integer, else the hardware concurrency.
inline std::size_t thread_count() {
  if (const char* env = std::getenv("TDTSP_THREADS")) {
    auto v = parse_uint(env);
    if (v && *v > 0) return static_cast<std::size_t>(*v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i < count on up to `threads` workers; the first exception is rethrown.
inline void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t i; !failed && (i = next++) < count;) {
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) err = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);
}

inline std::vector<std::string> list_instances(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw ConfigError("not a directory: " + dir);
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == kInstanceExtension) out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

inline bounds::Method parse_method(const std::string& s) {
  if (s == "htsp" || s == "HTSP") return bounds::Method::HTSP;
  if (s == "pl" || s == "PL-HTSP") return bounds::Method::PL_HTSP;
  if (s == "mlpl" || s == "MLPL-HTSP") return bounds::Method::MLPL_HTSP;
  throw ConfigError("unknown method '" + s + "' (expected htsp, pl or mlpl)");
}

struct SolveOptions {
  double step = kDefaultStep;
  std::optional<double> rho;  // nullopt: 1 / smallest grid width
  const learn::EtaModel* model = nullptr;
};

inline bounds::BoundResult run_method(const TimeDependentGraph& g, bounds::Method m, const SolveOptions& opt) {
  const bounds::Discretization d(opt.step, g.horizon());
  const bounds::FitOptions fo{opt.rho};
  switch (m) {
    case bounds::Method::HTSP: return bounds::htsp_baseline(g);
    case bounds::Method::PL_HTSP: return bounds::pl_htsp(g, d, fo);
    case bounds::Method::MLPL_HTSP:
      if (!opt.model) throw ConfigError("MLPL-HTSP needs a trained model");
      return bounds::mlpl_htsp(g, *opt.model, d, fo);
  }
  throw ConfigError("unknown method");
}

inline ResultRow make_row(const std::string& instance, const bounds::BoundResult& r, const bounds::BestKnown& bk) {
  ResultRow row;
  row.instance = instance;
  row.bk = bk.value;
  row.ub = r.ub;
  row.dev_pct = bounds::dev_percent(r.ub, bk.value);
  row.time_s = r.wall_time;
  row.method = bounds::to_string(r.method);
  row.zeta_star = r.zeta_star;
  row.omega_size = r.omega_size;
  row.bk_provenance = bounds::to_string(bk.provenance);
  return row;
}

// One instance, every method; failures are recorded instead of thrown.
inline ResultsTable bench_instance(const InstanceFile& f, const std::vector<bounds::Method>& methods,
                                   const SolveOptions& opt) {
  ResultsTable t;
  std::vector<bounds::BoundResult> done;
  for (auto m : methods) {
    try {
      done.push_back(run_method(f.graph, m, opt));
    } catch (const std::exception& e) {
      t.failures.push_back({f.name, bounds::to_string(m), e.what()});
    }
  }
  if (done.empty()) return t;
  bounds::BestKnown bk;
  try {
    bk = bounds::best_known(f.graph, done);
  } catch (const std::exception& e) {
    for (const auto& r : done) t.failures.push_back({f.name, bounds::to_string(r.method), e.what()});
    return t;
  }
  for (const auto& r : done) t.rows.push_back(make_row(f.name, r, bk));
  return t;
}

inline ResultsTable run_benchmark(const std::vector<std::string>& paths, const std::vector<bounds::Method>& methods,
                                  const SolveOptions& opt, std::size_t threads = thread_count()) {
  std::vector<ResultsTable> part(paths.size());
  parallel_for(paths.size(), threads, [&](std::size_t i) {
    try {
      part[i] = bench_instance(load_instance(paths[i]), methods, opt);
    } catch (const std::exception& e) {
      const std::string name = std::filesystem::path(paths[i]).stem().string();
      for (auto m : methods) part[i].failures.push_back({name, bounds::to_string(m), e.what()});
    }
  });
  ResultsTable t;
  for (auto& p : part) {
    t.rows.insert(t.rows.end(), p.rows.begin(), p.rows.end());
    t.failures.insert(t.failures.end(), p.failures.begin(), p.failures.end());
  }
  t.sort();
  return t;
}

struct TrainOptions {
  std::size_t zones = 5;
  std::uint64_t seed = 1;
  double step = kDefaultStep;
  bool fitted_labels = false;  // n > 16: also run PL-HTSP when picking the label tour
  std::size_t threads = thread_count();
};

struct TrainOutcome {
  learn::EtaModel model;
  std::size_t dp_labels = 0, heuristic_labels = 0;
};

// Label tour: DP optimum when it is in reach, else the best heuristic tour.
inline Tour label_tour(const TimeDependentGraph& g, const TrainOptions& opt, bool* exact = nullptr) {
  if (g.customers() <= oracle::kMaxDpCustomers) {
    if (exact) *exact = true;
    return oracle::solve_tdtsp_exact(g).tour;
  }
  if (exact) *exact = false;
  std::vector<bounds::BoundResult> hs{bounds::htsp_baseline(g)};
  if (opt.fitted_labels) hs.push_back(bounds::pl_htsp(g, bounds::Discretization(opt.step, g.horizon())));
  return bounds::best_known(g, hs).tour;
}

inline TrainOutcome train_model(const std::vector<TimeDependentGraph>& graphs, const TrainOptions& opt) {
  if (graphs.size() < 2) throw ParameterError("training needs at least two instances");
  std::vector<Tour> tours(graphs.size());
  std::vector<char> exact(graphs.size(), 0);
  parallel_for(graphs.size(), opt.threads, [&](std::size_t i) {
    bool e = false;
    tours[i] = label_tour(graphs[i], opt, &e);
    exact[i] = e;
  });
  std::vector<Point> pts;
  for (const auto& g : graphs) {
    auto c = g.coordinates();
    pts.insert(pts.end(), c.begin() + 1, c.end());
  }
  learn::Zoning z = learn::kmeans_fit(pts, opt.zones, opt.seed);
  std::vector<learn::TrainingExample> ex;
  for (std::size_t i = 0; i < graphs.size(); ++i) ex.push_back(learn::make_labels(graphs[i], tours[i], z));
  TrainOutcome out;
  out.model = learn::mlp_train(ex, std::move(z), opt.seed);
  for (char e : exact) (e ? out.dp_labels : out.heuristic_labels)++;
  return out;
}

}  // namespace tdtsp::io
