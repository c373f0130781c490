#pragma once

#include <ceres/ceres.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tdtsp/error.hpp"
#include "tdtsp/graph.hpp"
#include "tdtsp/learn/kmeans.hpp"
#include "tdtsp/learn/labels.hpp"

namespace tdtsp::learn {

inline constexpr std::size_t kHidden = 5;

struct MlpConfig {
  std::size_t hidden = kHidden;
  double l2 = 1e-4;
  int max_iterations = 2000;
  double validation_fraction = 0.1;
};

// K -> hidden (tanh) -> K (linear). Flat parameter layout: W1 (hidden x K,
// row-major), b1, W2 (K x hidden), b2.
struct Mlp {
  std::size_t inputs = 0, hidden = 0;
  std::vector<double> params;

  std::size_t size() const { return hidden * inputs + hidden + inputs * hidden + inputs; }
  std::size_t w1() const { return 0; }
  std::size_t b1() const { return hidden * inputs; }
  std::size_t w2() const { return b1() + hidden; }
  std::size_t b2() const { return w2() + inputs * hidden; }

  std::vector<double> forward(const double* p, const std::vector<double>& x, std::vector<double>* act = nullptr) const {
    std::vector<double> a(hidden), out(inputs);
    for (std::size_t j = 0; j < hidden; ++j) {
      double s = p[b1() + j];
      for (std::size_t i = 0; i < inputs; ++i) s += p[w1() + j * inputs + i] * x[i];
      a[j] = std::tanh(s);
    }
    for (std::size_t k = 0; k < inputs; ++k) {
      double s = p[b2() + k];
      for (std::size_t j = 0; j < hidden; ++j) s += p[w2() + k * hidden + j] * a[j];
      out[k] = s;
    }
    if (act) *act = std::move(a);
    return out;
  }
  std::vector<double> forward(const std::vector<double>& x) const { return forward(params.data(), x); }
};

namespace detail {

// 0.5 * masked MSE + 0.5 * l2 * |W|^2 / N, with its exact gradient.
class MlpLoss final : public ceres::FirstOrderFunction {
 public:
  MlpLoss(const Mlp& net, const std::vector<const TrainingExample*>& data, double l2)
      : net_(net), data_(data), l2_(l2) {
    for (const auto* ex : data_)
      for (char m : ex->mask) observed_ += m ? 1.0 : 0.0;
    observed_ = std::max(observed_, 1.0);
  }

  bool Evaluate(const double* p, double* cost, double* grad) const override {
    const std::size_t K = net_.inputs, Hn = net_.hidden;
    double loss = 0.0;
    if (grad) std::fill(grad, grad + net_.size(), 0.0);
    std::vector<double> act, delta(K), back(Hn);
    for (const auto* ex : data_) {
      const auto out = net_.forward(p, ex->counts, &act);
      for (std::size_t k = 0; k < K; ++k) {
        const double r = ex->mask[k] ? out[k] - ex->targets[k] : 0.0;
        loss += 0.5 * r * r / observed_;
        delta[k] = r / observed_;
      }
      if (!grad) continue;
      std::fill(back.begin(), back.end(), 0.0);
      for (std::size_t k = 0; k < K; ++k) {
        if (delta[k] == 0.0) continue;
        grad[net_.b2() + k] += delta[k];
        for (std::size_t j = 0; j < Hn; ++j) {
          grad[net_.w2() + k * Hn + j] += delta[k] * act[j];
          back[j] += delta[k] * p[net_.w2() + k * Hn + j];
        }
      }
      for (std::size_t j = 0; j < Hn; ++j) {
        const double g = back[j] * (1.0 - act[j] * act[j]);
        grad[net_.b1() + j] += g;
        for (std::size_t i = 0; i < K; ++i) grad[net_.w1() + j * K + i] += g * ex->counts[i];
      }
    }
    const double scale = l2_ / static_cast<double>(std::max<std::size_t>(1, data_.size()));
    auto penalize = [&](std::size_t from, std::size_t to) {
      for (std::size_t q = from; q < to; ++q) {
        loss += 0.5 * scale * p[q] * p[q];
        if (grad) grad[q] += scale * p[q];
      }
    };
    penalize(net_.w1(), net_.b1());
    penalize(net_.w2(), net_.b2());
    *cost = loss;
    return std::isfinite(loss);
  }

  int NumParameters() const override { return static_cast<int>(net_.size()); }

 private:
  const Mlp& net_;
  std::vector<const TrainingExample*> data_;
  double l2_;
  double observed_ = 0.0;
};

}  // namespace detail

struct ZoneErrors {
  std::vector<double> mean_error;  // signed, prediction - target
  std::vector<double> mae;
  std::vector<double> std_error;   // root mean square error
  std::vector<std::size_t> observations;
};

struct EtaModel {
  Zoning zoning;
  Mlp net;
  std::vector<double> per_zone_mae;  // epsilon_k
  ZoneErrors validation;
  double r2 = 0.0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  double final_loss = 0.0;
  std::size_t train_size = 0, validation_size = 0;

  std::size_t zones() const { return zoning.zones(); }
};

// Forward pass with negative ETAs clamped to 0.
inline std::vector<double> mlp_predict(const EtaModel& m, const std::vector<double>& counts) {
  if (counts.size() != m.zones())
    throw ParameterError("expected " + std::to_string(m.zones()) + " zone counts, got " +
                         std::to_string(counts.size()));
  auto out = m.net.forward(counts);
  for (double& v : out) v = std::max(0.0, v);
  return out;
}

inline ZoneErrors zone_errors(const EtaModel& m, const std::vector<const TrainingExample*>& data, double* r2 = nullptr) {
  const std::size_t K = m.zones();
  ZoneErrors e{std::vector<double>(K, 0.0), std::vector<double>(K, 0.0), std::vector<double>(K, 0.0),
               std::vector<std::size_t>(K, 0)};
  double ss_res = 0.0, sum = 0.0, sum2 = 0.0, cnt = 0.0;
  for (const auto* ex : data) {
    const auto p = mlp_predict(m, ex->counts);
    for (std::size_t k = 0; k < K; ++k) {
      if (!ex->mask[k]) continue;
      const double r = p[k] - ex->targets[k];
      e.mean_error[k] += r;
      e.mae[k] += std::abs(r);
      e.std_error[k] += r * r;
      ++e.observations[k];
      ss_res += r * r;
      sum += ex->targets[k];
      sum2 += ex->targets[k] * ex->targets[k];
      cnt += 1.0;
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (e.observations[k] == 0) continue;
    const double c = static_cast<double>(e.observations[k]);
    e.mean_error[k] /= c;
    e.mae[k] /= c;
    e.std_error[k] = std::sqrt(e.std_error[k] / c);
  }
  if (r2) {
    const double ss_tot = cnt > 0 ? sum2 - sum * sum / cnt : 0.0;
    *r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
  }
  return e;
}

// Splits the examples 90/10 by a seeded shuffle, fits the network on the
// training part with L-BFGS, and calibrates epsilon_k as the validation MAE of
// zone k. A zone never observed in validation falls back to its training MAE,
// then to the mean over calibrated zones.
inline EtaModel mlp_train(const std::vector<TrainingExample>& examples, Zoning zoning, std::uint64_t seed,
                          const MlpConfig& cfg = {}) {
  if (examples.size() < 2) throw ParameterError("training needs at least two examples");
  const std::size_t K = zoning.zones();
  for (const auto& ex : examples)
    if (ex.zones() != K || ex.targets.size() != K || ex.mask.size() != K)
      throw ParameterError("training example zone count differs from the zoning");

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(cfg.validation_fraction * static_cast<double>(examples.size()))), 1,
      examples.size() - 1);
  std::vector<const TrainingExample*> train, val;
  for (std::size_t q = 0; q < order.size(); ++q) (q < n_val ? val : train).push_back(&examples[order[q]]);

  EtaModel m;
  m.zoning = std::move(zoning);
  m.seed = seed;
  m.train_size = train.size();
  m.validation_size = val.size();
  m.net.inputs = K;
  m.net.hidden = cfg.hidden;
  m.net.params.assign(m.net.size(), 0.0);
  const double lim1 = std::sqrt(6.0 / static_cast<double>(K + cfg.hidden));
  std::uniform_real_distribution<double> U(-lim1, lim1);
  for (std::size_t q = m.net.w1(); q < m.net.b1(); ++q) m.net.params[q] = U(rng);
  for (std::size_t q = m.net.w2(); q < m.net.b2(); ++q) m.net.params[q] = U(rng);
  double gsum = 0.0, gcnt = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    double s = 0.0, c = 0.0;
    for (const auto* ex : train)
      if (ex->mask[k]) s += ex->targets[k], c += 1.0;
    gsum += s;
    gcnt += c;
    m.net.params[m.net.b2() + k] = c > 0 ? s / c : 0.0;
  }
  for (std::size_t k = 0; k < K; ++k)
    if (m.net.params[m.net.b2() + k] == 0.0 && gcnt > 0) m.net.params[m.net.b2() + k] = gsum / gcnt;

  ceres::GradientProblem problem(new detail::MlpLoss(m.net, train, cfg.l2));
  ceres::GradientProblemSolver::Options opt;
  opt.line_search_direction_type = ceres::LBFGS;
  opt.max_num_iterations = cfg.max_iterations;
  opt.logging_type = ceres::SILENT;
  opt.minimizer_progress_to_stdout = false;
  opt.function_tolerance = 1e-12;
  opt.gradient_tolerance = 1e-10;
  opt.parameter_tolerance = 1e-12;
  ceres::GradientProblemSolver::Summary summary;
  std::vector<double> p = m.net.params;
  ceres::Solve(opt, problem, p.data(), &summary);
  if (!std::isfinite(summary.final_cost))
    throw TrainingError("MLP training diverged: " + summary.BriefReport());
  for (double v : p)
    if (!std::isfinite(v)) throw TrainingError("MLP training produced non-finite weights");
  m.net.params = std::move(p);
  m.iterations = summary.iterations.size();
  m.final_loss = summary.final_cost;

  m.validation = zone_errors(m, val, &m.r2);
  const ZoneErrors tr = zone_errors(m, train);
  m.per_zone_mae.assign(K, -1.0);
  double mean_mae = 0.0, counted = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (m.validation.observations[k] > 0) m.per_zone_mae[k] = m.validation.mae[k];
    else if (tr.observations[k] > 0) m.per_zone_mae[k] = tr.mae[k];
    if (m.per_zone_mae[k] >= 0) mean_mae += m.per_zone_mae[k], counted += 1.0;
  }
  for (double& e : m.per_zone_mae)
    if (e < 0) e = counted > 0 ? mean_mae / counted : 0.0;
  return m;
}

struct Eta {
  double f = 0.0;        // predicted arrival time
  double epsilon = 0.0;  // zone mean absolute error
  std::size_t zone = 0;
};

inline std::vector<Eta> etas(const EtaModel& m, const TimeDependentGraph& g) {
  const auto pred = mlp_predict(m, m.zoning.counts(g));
  std::vector<Eta> out(g.vertices());
  auto pts = g.coordinates();
  for (Vertex i = 1; i < g.vertices(); ++i) {
    const std::size_t k = m.zoning.zone_of(pts[i]);
    out[i] = {pred[k], m.per_zone_mae[k], k};
  }
  return out;
}

inline Eta eta_for_customer(const EtaModel& m, const TimeDependentGraph& g, Vertex i) {
  if (i == 0 || i > g.customers()) throw ParameterError("vertex " + std::to_string(i) + " is not a customer");
  return etas(m, g)[i];
}

// ---- serialization ----

inline constexpr const char* kModelFormat = "tdtsp-eta-model";
inline constexpr int kModelVersion = 1;

inline nlohmann::json to_json(const EtaModel& m) {
  nlohmann::json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  auto& c = j["centroids"] = nlohmann::json::array();
  for (const auto& p : m.zoning.centroids) c.push_back({p.x, p.y});
  j["layers"] = {m.net.inputs, m.net.hidden, m.net.inputs};
  j["weights"] = m.net.params;
  j["per_zone_mae"] = m.per_zone_mae;
  j["validation"] = {{"mean_error", m.validation.mean_error},
                     {"mae", m.validation.mae},
                     {"std_error", m.validation.std_error},
                     {"observations", m.validation.observations}};
  j["r2"] = m.r2;
  j["seed"] = m.seed;
  j["iterations"] = m.iterations;
  j["final_loss"] = m.final_loss;
  j["train_size"] = m.train_size;
  j["validation_size"] = m.validation_size;
  return j;
}

inline EtaModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != kModelFormat) throw ConfigError("not an ETA model file");
    if (j.at("version") != kModelVersion)
      throw ConfigError("unsupported model version " + j.at("version").dump());
    EtaModel m;
    for (const auto& p : j.at("centroids")) m.zoning.centroids.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    const auto layers = j.at("layers").get<std::vector<std::size_t>>();
    const std::size_t K = m.zoning.zones();
    if (layers.size() != 3 || layers[0] != K || layers[2] != K) throw ConfigError("layer sizes do not match the zoning");
    m.net.inputs = K;
    m.net.hidden = layers[1];
    m.net.params = j.at("weights").get<std::vector<double>>();
    if (m.net.params.size() != m.net.size()) throw ConfigError("weight count does not match the layer sizes");
    m.per_zone_mae = j.at("per_zone_mae").get<std::vector<double>>();
    if (m.per_zone_mae.size() != K) throw ConfigError("per-zone MAE count does not match the zoning");
    for (double e : m.per_zone_mae)
      if (!(e >= 0.0)) throw ConfigError("per-zone MAE must be nonnegative");
    const auto& v = j.at("validation");
    m.validation.mean_error = v.at("mean_error").get<std::vector<double>>();
    m.validation.mae = v.at("mae").get<std::vector<double>>();
    m.validation.std_error = v.at("std_error").get<std::vector<double>>();
    m.validation.observations = v.at("observations").get<std::vector<std::size_t>>();
    m.r2 = j.at("r2").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.iterations = j.at("iterations").get<std::size_t>();
    m.final_loss = j.at("final_loss").get<double>();
    m.train_size = j.at("train_size").get<std::size_t>();
    m.validation_size = j.at("validation_size").get<std::size_t>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model file: ") + e.what());
  }
}

inline void save_model(const EtaModel& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write model file " + path);
  os << to_json(m).dump(2) << "\n";
}

inline EtaModel load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read model file " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("model file " + path + " is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

// Per-zone error table: zone, mean error, MAE, standard error, plus an average row.
inline std::string error_report(const EtaModel& m) {
  std::string out = "zone,mean_error,mae,std_error,observations\n";
  char buf[160];
  double me = 0, ma = 0, se = 0, c = 0;
  for (std::size_t k = 0; k < m.zones(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.2f,%.2f,%.2f,%zu\n", k + 1, m.validation.mean_error[k], m.validation.mae[k],
                  m.validation.std_error[k], m.validation.observations[k]);
    out += buf;
    if (m.validation.observations[k] > 0) {
      me += m.validation.mean_error[k], ma += m.validation.mae[k], se += m.validation.std_error[k], c += 1;
    }
  }
  if (c > 0) {
    std::snprintf(buf, sizeof buf, "average,%.2f,%.2f,%.2f,\n", me / c, ma / c, se / c);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "r2,%.4f\n", m.r2);
  out += buf;
  return out;
}

}  // namespace tdtsp::learn
