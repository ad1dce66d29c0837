#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kaczmarz/clustering.hpp"
#include "kaczmarz/error.hpp"
#include "kaczmarz/matgen.hpp"
#include "kaczmarz/sampling.hpp"

namespace kaczmarz {

using Json = nlohmann::ordered_json;

inline constexpr std::array<std::string_view, 5> kExperiments{
    "pairwise", "coreset", "cluster-variants", "spectral-convergence", "weighted-vs-uniform"};

enum class Aggregate { Mean, Median };

struct SpectrumConfig {
  std::string kind = "exponential";  // exponential | ratio | values
  double kappa = 1e7;
  Vector values;

  SpectrumSpec spec() const {
    if (kind == "exponential") return SpectrumSpec::exponential_decay();
    if (kind == "ratio") return SpectrumSpec::explicit_ratio(kappa);
    return SpectrumSpec::explicit_values(values);
  }
};

struct SolverSection {
  std::size_t beta = 1;
  double lambda = 1.0;
  std::size_t iterations = 1000;
  std::size_t stride = 1;
};

struct ClusterSection {
  ClusterCriterion criterion = ClusterCriterion::NormalizedDistance;
  std::optional<double> epsilon;  // swept when absent
  std::size_t reassign_every = 0;
  ClusterSamplingMode mode = ClusterSamplingMode::BestCluster;
  bool signed_residual = false;
};

/// Effective experiment configuration: per-experiment defaults with the
/// user's document merged over them. `echo` keeps that merged document.
struct ExperimentConfig {
  std::string experiment;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  Aggregate aggregate = Aggregate::Mean;
  SpectrumConfig spectrum;
  SolverSection solver;
  std::string x_star = "sphere";  // sphere | gaussian | last-basis
  std::string x0 = "zero";        // zero | sphere

  std::vector<std::string> schemes;          // pairwise
  std::optional<double> box_bound;           // pairwise
  std::vector<double> c_values;              // coreset
  std::vector<double> kappas;                // coreset
  double noise = 0.0;                        // coreset, relative rhs noise
  double coreset_c = 5.0;                    // cluster-variants
  ClusterSection cluster;                    // cluster-variants
  std::vector<std::string> strategies;       // spectral-convergence, weighted-vs-uniform
  double threshold = 1e-12;                  // weighted-vs-uniform

  Json echo;
};

/// Default document for `experiment`; throws Config for unknown names.
inline Json default_config(std::string_view experiment) {
  Json solver = {{"beta", 1}, {"lambda", 1.0}, {"iterations", 2000}, {"stride", 10}};
  Json base = {{"experiment", std::string(experiment)}, {"seed", 1}, {"trials", 1}, {"aggregate", "mean"},
               {"output_dir", "out/" + std::string(experiment)}};
  if (experiment == "pairwise") {
    base.update(Json{{"m", 240},
                     {"n", 12},
                     {"trials", 100},
                     {"spectrum", {{"kind", "exponential"}}},
                     {"solver", {{"beta", 3}, {"lambda", 1.0}, {"iterations", 20000}, {"stride", 100}}},
                     {"x_star", "sphere"},
                     {"x0", "sphere"},
                     {"schemes", {"scheme-base", "scheme-combined", "scheme-pairs"}},
                     {"box_bound", nullptr}});
  } else if (experiment == "coreset") {
    base.update(Json{{"m", 2000},
                     {"n", 20},
                     {"trials", 20},
                     {"x_star", "sphere"},
                     {"kappas", {1e2, 1e4, 1e7}},
                     {"c_values", {1, 2, 3, 4, 5}},
                     {"noise", 1e-2}});
  } else if (experiment == "cluster-variants") {
    base.update(Json{{"m", 2000},
                     {"n", 20},
                     {"trials", 10},
                     {"spectrum", {{"kind", "ratio"}, {"kappa", 1e7}}},
                     {"solver", solver},
                     {"x_star", "sphere"},
                     {"x0", "sphere"},
                     {"coreset_c", 5},
                     {"cluster",
                      {{"criterion", "normalized-distance"},
                       {"epsilon", nullptr},
                       {"reassign_every", 0},
                       {"mode", "best"},
                       {"signed", false}}}});
  } else if (experiment == "spectral-convergence") {
    base.update(Json{{"m", 240},
                     {"n", 12},
                     {"trials", 50},
                     {"spectrum", {{"kind", "exponential"}}},
                     {"solver", {{"beta", 1}, {"lambda", 1.0}, {"iterations", 20000}, {"stride", 100}}},
                     {"x_star", "last-basis"},
                     {"x0", "zero"},
                     {"strategies", {"uniform"}}});
  } else if (experiment == "weighted-vs-uniform") {
    base.update(Json{{"m", 240},
                     {"n", 12},
                     {"trials", 50},
                     {"spectrum", {{"kind", "exponential"}}},
                     {"solver", {{"beta", 1}, {"lambda", 1.0}, {"iterations", 5000000}, {"stride", 5000}}},
                     {"x_star", "last-basis"},
                     {"x0", "zero"},
                     {"strategies", {"uniform", "spectral"}},
                     {"threshold", 1e-12}});
  } else {
    throw Error(ErrorCode::Config, "unknown experiment '" + std::string(experiment) + "'");
  }
  return base;
}

namespace detail {

inline void reject_unknown_keys(const Json& user, const Json& defaults, const std::string& path) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!defaults.contains(it.key())) throw Error(ErrorCode::Config, "unknown config key '" + key + "'");
    const Json& d = defaults[it.key()];
    if (d.is_object() && it.value().is_object()) reject_unknown_keys(it.value(), d, key);
  }
}

template <class T>
T get_field(const Json& doc, const char* key, const std::string& path) {
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::Config, "config key '" + path + key + "' has the wrong type");
  }
}

inline std::size_t get_count(const Json& doc, const char* key, const std::string& path = "") {
  const Json& v = doc.at(key);
  if (!v.is_number_integer() && !(v.is_number_float() && v.get<double>() == std::floor(v.get<double>())))
    throw Error(ErrorCode::Config, "config key '" + path + key + "' must be an integer");
  const double d = v.get<double>();
  if (!(d >= 1)) throw Error(ErrorCode::Config, "config key '" + path + key + "' must be >= 1");
  return static_cast<std::size_t>(d);
}

inline std::string get_choice(const Json& doc, const char* key, std::initializer_list<std::string_view> allowed,
                              const std::string& path = "") {
  const auto s = get_field<std::string>(doc, key, path);
  if (std::find(allowed.begin(), allowed.end(), s) == allowed.end())
    throw Error(ErrorCode::Config, "config key '" + path + key + "' has unsupported value '" + s + "'");
  return s;
}

}  // namespace detail

namespace detail {

inline ExperimentConfig parse_config_impl(const Json& user) {
  if (!user.is_object()) throw Error(ErrorCode::Config, "config must be a JSON object");
  if (!user.contains("experiment") || !user["experiment"].is_string())
    throw Error(ErrorCode::Config, "config needs a string 'experiment' field");
  Json doc = default_config(user["experiment"].get<std::string>());
  Json spectrum_defaults = {{"kind", "exponential"}, {"kappa", 1e7}, {"values", Json::array()}};
  Json allowed = doc;
  if (allowed.contains("spectrum")) allowed["spectrum"] = spectrum_defaults;
  detail::reject_unknown_keys(user, allowed, "");
  doc.merge_patch(user);

  ExperimentConfig c;
  c.experiment = doc["experiment"].get<std::string>();
  c.m = detail::get_count(doc, "m");
  c.n = detail::get_count(doc, "n");
  c.trials = detail::get_count(doc, "trials");
  if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() && doc["seed"].get<long long>() >= 0))
    throw Error(ErrorCode::Config, "config key 'seed' must be a non-negative integer");
  c.seed = doc["seed"].get<std::uint64_t>();
  c.output_dir = detail::get_field<std::string>(doc, "output_dir", "");
  c.aggregate = detail::get_choice(doc, "aggregate", {"mean", "median"}) == "mean" ? Aggregate::Mean : Aggregate::Median;
  if (c.m < c.n) throw Error(ErrorCode::Config, "need m >= n, got m=" + std::to_string(c.m) + " n=" + std::to_string(c.n));
  c.x_star = detail::get_choice(doc, "x_star", {"sphere", "gaussian", "last-basis"});

  if (doc.contains("spectrum")) {
    const Json& s = doc["spectrum"];
    c.spectrum.kind = detail::get_choice(s, "kind", {"exponential", "ratio", "values"}, "spectrum.");
    if (s.contains("kappa")) c.spectrum.kappa = detail::get_field<double>(s, "kappa", "spectrum.");
    if (s.contains("values")) c.spectrum.values = detail::get_field<Vector>(s, "values", "spectrum.");
    if (c.spectrum.kind == "ratio" && !(c.spectrum.kappa >= 1.0))
      throw Error(ErrorCode::Config, "spectrum.kappa must be >= 1");
    if (c.spectrum.kind == "values" && c.spectrum.values.size() != c.n)
      throw Error(ErrorCode::Config, "spectrum.values needs exactly n entries");
  }
  if (doc.contains("solver")) {
    const Json& s = doc["solver"];
    c.solver.beta = detail::get_count(s, "beta", "solver.");
    c.solver.lambda = detail::get_field<double>(s, "lambda", "solver.");
    c.solver.iterations = detail::get_count(s, "iterations", "solver.");
    c.solver.stride = detail::get_count(s, "stride", "solver.");
    if (!(c.solver.lambda > 0.0 && c.solver.lambda <= 2.0))
      throw Error(ErrorCode::Config, "solver.lambda must lie in (0, 2]");
    if (c.solver.beta > c.m)
      throw Error(ErrorCode::Config, "solver.beta=" + std::to_string(c.solver.beta) + " exceeds m=" + std::to_string(c.m));
  }
  if (doc.contains("x0")) c.x0 = detail::get_choice(doc, "x0", {"zero", "sphere"});
  if (doc.contains("schemes")) {
    c.schemes = detail::get_field<std::vector<std::string>>(doc, "schemes", "");
    if (c.schemes.empty()) throw Error(ErrorCode::Config, "schemes must not be empty");
    for (const auto& s : c.schemes) {
      const auto kind = parse_strategy_kind(s);
      if (kind != StrategyKind::SchemeBaseOnly && kind != StrategyKind::SchemeCombinedUniform &&
          kind != StrategyKind::SchemePairsOnly)
        throw Error(ErrorCode::Config, "pairwise schemes must be scheme-base, scheme-combined or scheme-pairs");
    }
  }
  if (doc.contains("box_bound") && !doc["box_bound"].is_null()) {
    c.box_bound = detail::get_field<double>(doc, "box_bound", "");
    if (!(*c.box_bound > 0.0)) throw Error(ErrorCode::Config, "box_bound must be positive");
  }
  if (doc.contains("c_values")) {
    c.c_values = detail::get_field<Vector>(doc, "c_values", "");
    if (c.c_values.empty()) throw Error(ErrorCode::Config, "c_values must not be empty");
    for (double v : c.c_values)
      if (!(v * static_cast<double>(c.n) >= 1.0)) throw Error(ErrorCode::Config, "every c must satisfy c*n >= 1");
  }
  if (doc.contains("kappas")) {
    c.kappas = detail::get_field<Vector>(doc, "kappas", "");
    if (c.kappas.empty()) throw Error(ErrorCode::Config, "kappas must not be empty");
    for (double v : c.kappas)
      if (!(v >= 1.0)) throw Error(ErrorCode::Config, "every kappa must be >= 1");
  }
  if (doc.contains("noise")) {
    c.noise = detail::get_field<double>(doc, "noise", "");
    if (!(c.noise >= 0.0)) throw Error(ErrorCode::Config, "noise must be >= 0");
  }
  if (doc.contains("coreset_c")) {
    c.coreset_c = detail::get_field<double>(doc, "coreset_c", "");
    if (!(c.coreset_c * static_cast<double>(c.n) >= 1.0)) throw Error(ErrorCode::Config, "coreset_c*n must be >= 1");
  }
  if (doc.contains("cluster")) {
    const Json& s = doc["cluster"];
    try {
      c.cluster.criterion = parse_cluster_criterion(detail::get_field<std::string>(s, "criterion", "cluster."));
    } catch (const Error& e) {
      throw Error(ErrorCode::Config, std::string("cluster.criterion: ") + e.what());
    }
    if (s.contains("epsilon") && !s["epsilon"].is_null()) {
      c.cluster.epsilon = detail::get_field<double>(s, "epsilon", "cluster.");
      if (!(*c.cluster.epsilon > 0.0)) throw Error(ErrorCode::Config, "cluster.epsilon must be positive");
    }
    const Json& r = s.at("reassign_every");
    if (!r.is_number_integer() || r.get<long long>() < 0)
      throw Error(ErrorCode::Config, "cluster.reassign_every must be a non-negative integer");
    c.cluster.reassign_every = r.get<std::size_t>();
    c.cluster.mode = detail::get_choice(s, "mode", {"best", "sweep"}, "cluster.") == "best"
                         ? ClusterSamplingMode::BestCluster
                         : ClusterSamplingMode::SweepThenBest;
    c.cluster.signed_residual = detail::get_field<bool>(s, "signed", "cluster.");
  }
  if (doc.contains("strategies")) {
    c.strategies = detail::get_field<std::vector<std::string>>(doc, "strategies", "");
    if (c.strategies.empty()) throw Error(ErrorCode::Config, "strategies must not be empty");
    for (const auto& s : c.strategies) {
      const auto kind = parse_strategy_kind(s);
      if (kind != StrategyKind::Uniform && kind != StrategyKind::SquaredNorm && kind != StrategyKind::Spectral)
        throw Error(ErrorCode::Config, "strategies must be uniform, sq-norm or spectral");
    }
  }
  if (doc.contains("threshold")) {
    c.threshold = detail::get_field<double>(doc, "threshold", "");
    if (!(c.threshold >= 0.0)) throw Error(ErrorCode::Config, "threshold must be >= 0");
  }
  c.echo = std::move(doc);
  return c;
}

}  // namespace detail

/// Merges `user` over the defaults of `user["experiment"]` and validates.
inline ExperimentConfig parse_config(const Json& user) {
  try {
    return detail::parse_config_impl(user);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("malformed config: ") + e.what());
  }
}

inline ExperimentConfig parse_config_text(std::string_view text) {
  Json user;
  try {
    user = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(user);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

}  // namespace kaczmarz
