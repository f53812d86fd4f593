#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "evea/embedding.hpp"
#include "evea/errors.hpp"
#include "evea/evolution.hpp"
#include "evea/graph.hpp"
#include "evea/objectives.hpp"

namespace evea {

struct NetworkSpec {
  std::string name;
  std::string path;
  bool directed = false;
  ProbabilityModel prob_model = ProbabilityModel::weighted_cascade();
  CostModel cost_model = CostModel::degree();

  Graph load() const { return load_edge_list(path, directed, prob_model, cost_model); }
};

struct EmbeddingSpec {
  WalkConfig walks;
  std::string file;  // nonempty: load this table instead of training
};

struct ExperimentSpec {
  std::vector<NetworkSpec> networks;
  std::vector<AlgoConfig> algorithms;  // rng seeds assigned per cell by the runner
  EvalConfig eval;
  EmbeddingSpec embedding;
  std::uint32_t repetitions = 10;
  std::string output_dir = "out";
  std::uint64_t master_seed = 0;

  void validate() const {
    if (networks.empty()) throw ConfigError("experiment needs at least one network");
    if (algorithms.empty()) throw ConfigError("experiment needs at least one algorithm");
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (output_dir.empty()) throw ConfigError("output_dir must be set");
    eval.validate();
    embedding.walks.validate();
    for (std::size_t i = 0; i < algorithms.size(); ++i)
      for (std::size_t j = i + 1; j < algorithms.size(); ++j)
        if (algorithms[i].variant == algorithms[j].variant)
          throw ConfigError("duplicate algorithm variant in experiment");
  }
};

namespace cfg {

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + ": bad value for '" + std::string(key) + "'");
  }
}

template <typename T>
T require(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing required key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + ": bad value for '" + std::string(key) + "'");
  }
}

inline ProbabilityModel prob_model_from_json(const nlohmann::json& j, const std::string& where) {
  check_keys(j, {"kind", "p"}, where);
  const auto kind = require<std::string>(j, "kind", where);
  if (kind == "weighted_cascade") return ProbabilityModel::weighted_cascade();
  if (kind == "constant") return ProbabilityModel::constant(require<double>(j, "p", where));
  throw ConfigError(where + ": prob_model kind must be 'constant' or 'weighted_cascade'");
}

inline CostModel cost_model_from_json(const nlohmann::json& j, const std::string& where) {
  check_keys(j, {"kind", "path"}, where);
  const auto kind = require<std::string>(j, "kind", where);
  if (kind == "degree") return CostModel::degree();
  if (kind == "unit") return CostModel::unit();
  if (kind == "file") return CostModel::from_file(require<std::string>(j, "path", where));
  throw ConfigError(where + ": cost_model kind must be 'degree', 'unit' or 'file'");
}

inline DelayDistribution delay_from_json(const nlohmann::json& j, const std::string& where) {
  check_keys(j, {"kind", "q"}, where);
  const auto kind = require<std::string>(j, "kind", where);
  if (kind == "unit") return DelayDistribution::unit();
  if (kind == "geometric") return DelayDistribution::geometric(require<double>(j, "q", where));
  throw ConfigError(where + ": delay kind must be 'unit' or 'geometric'");
}

inline EvalConfig eval_from_json(const nlohmann::json& j) {
  const std::string where = "eval";
  check_keys(j, {"mc_samples", "delay", "base_seed", "cache", "mode"}, where);
  EvalConfig cfg;
  cfg.mc_samples = get_or<std::uint32_t>(j, "mc_samples", cfg.mc_samples, where);
  if (j.contains("delay")) cfg.delay = delay_from_json(j.at("delay"), where + ".delay");
  cfg.base_seed = get_or<std::uint64_t>(j, "base_seed", cfg.base_seed, where);
  cfg.cache_enabled = get_or<bool>(j, "cache", cfg.cache_enabled, where);
  const auto mode = get_or<std::string>(j, "mode", "per_generation", where);
  if (mode == "per_generation")
    cfg.mode = EvalConfig::Mode::per_generation;
  else if (mode == "once")
    cfg.mode = EvalConfig::Mode::once;
  else
    throw ConfigError(where + ": mode must be 'per_generation' or 'once'");
  cfg.validate();
  return cfg;
}

inline nlohmann::json eval_to_json(const EvalConfig& cfg) {
  nlohmann::json j;
  j["mc_samples"] = cfg.mc_samples;
  j["delay"] = {{"kind", cfg.delay.kind == DelayDistribution::Kind::unit ? "unit" : "geometric"},
                {"q", cfg.delay.q}};
  j["base_seed"] = cfg.base_seed;
  j["cache"] = cfg.cache_enabled;
  j["mode"] = cfg.mode == EvalConfig::Mode::per_generation ? "per_generation" : "once";
  return j;
}

inline AlgoConfig algo_from_json(const nlohmann::json& j) {
  const std::string where = "algorithm";
  check_keys(j,
             {"variant", "population_size", "max_generations", "crossover_rate", "mutation_rate",
              "tournament_size", "init_size_min", "init_size_max", "max_seeds", "rng_seed"},
             where);
  AlgoConfig cfg;
  cfg.variant = variant_from_name(require<std::string>(j, "variant", where));
  cfg.population_size = get_or<std::uint32_t>(j, "population_size", cfg.population_size, where);
  cfg.max_generations = get_or<std::uint32_t>(j, "max_generations", cfg.max_generations, where);
  cfg.crossover_rate = get_or<double>(j, "crossover_rate", cfg.crossover_rate, where);
  cfg.mutation_rate = get_or<double>(j, "mutation_rate", cfg.mutation_rate, where);
  cfg.tournament_size = get_or<std::uint32_t>(j, "tournament_size", cfg.tournament_size, where);
  cfg.init_size_min = get_or<std::uint32_t>(j, "init_size_min", cfg.init_size_min, where);
  cfg.init_size_max = get_or<std::uint32_t>(j, "init_size_max", cfg.init_size_max, where);
  cfg.max_seeds = get_or<std::uint32_t>(j, "max_seeds", cfg.max_seeds, where);
  cfg.rng_seed = get_or<std::uint64_t>(j, "rng_seed", cfg.rng_seed, where);
  return cfg;
}

inline nlohmann::json algo_to_json(const AlgoConfig& cfg) {
  nlohmann::json j;
  j["variant"] = variant_name(cfg.variant);
  j["population_size"] = cfg.population_size;
  j["max_generations"] = cfg.max_generations;
  j["crossover_rate"] = cfg.crossover_rate;
  j["mutation_rate"] = cfg.mutation_rate;
  j["tournament_size"] = cfg.tournament_size;
  j["init_size_min"] = cfg.init_size_min;
  j["init_size_max"] = cfg.init_size_max;
  j["max_seeds"] = cfg.max_seeds;
  j["rng_seed"] = cfg.rng_seed;
  return j;
}

inline WalkConfig walks_from_json(const nlohmann::json& j) {
  const std::string where = "embedding";
  check_keys(j,
             {"dims", "walks_per_node", "walk_length", "window", "negatives", "epochs",
              "learning_rate", "rng_seed", "return_param_p", "inout_param_q", "file"},
             where);
  WalkConfig cfg;
  cfg.dims = get_or<std::uint32_t>(j, "dims", cfg.dims, where);
  cfg.walks_per_node = get_or<std::uint32_t>(j, "walks_per_node", cfg.walks_per_node, where);
  cfg.walk_length = get_or<std::uint32_t>(j, "walk_length", cfg.walk_length, where);
  cfg.window = get_or<std::uint32_t>(j, "window", cfg.window, where);
  cfg.negatives = get_or<std::uint32_t>(j, "negatives", cfg.negatives, where);
  cfg.epochs = get_or<std::uint32_t>(j, "epochs", cfg.epochs, where);
  cfg.learning_rate = get_or<double>(j, "learning_rate", cfg.learning_rate, where);
  cfg.rng_seed = get_or<std::uint64_t>(j, "rng_seed", cfg.rng_seed, where);
  cfg.return_param_p = get_or<double>(j, "return_param_p", cfg.return_param_p, where);
  cfg.inout_param_q = get_or<double>(j, "inout_param_q", cfg.inout_param_q, where);
  cfg.validate();
  return cfg;
}

inline nlohmann::json walks_to_json(const WalkConfig& cfg, const std::string& file) {
  nlohmann::json j;
  j["dims"] = cfg.dims;
  j["walks_per_node"] = cfg.walks_per_node;
  j["walk_length"] = cfg.walk_length;
  j["window"] = cfg.window;
  j["negatives"] = cfg.negatives;
  j["epochs"] = cfg.epochs;
  j["learning_rate"] = cfg.learning_rate;
  j["rng_seed"] = cfg.rng_seed;
  j["return_param_p"] = cfg.return_param_p;
  j["inout_param_q"] = cfg.inout_param_q;
  j["file"] = file;
  return j;
}

inline NetworkSpec network_from_json(const nlohmann::json& j) {
  const std::string where = "network";
  check_keys(j, {"name", "path", "directed", "prob_model", "cost_model"}, where);
  NetworkSpec spec;
  spec.name = require<std::string>(j, "name", where);
  spec.path = require<std::string>(j, "path", where);
  spec.directed = get_or<bool>(j, "directed", false, where);
  if (j.contains("prob_model"))
    spec.prob_model = prob_model_from_json(j.at("prob_model"), where + ".prob_model");
  if (j.contains("cost_model"))
    spec.cost_model = cost_model_from_json(j.at("cost_model"), where + ".cost_model");
  if (spec.name.empty() || spec.name.find_first_of("/\\ ") != std::string::npos)
    throw ConfigError(where + ": name must be a nonempty token without spaces or slashes");
  return spec;
}

inline nlohmann::json network_to_json(const NetworkSpec& spec) {
  nlohmann::json j;
  j["name"] = spec.name;
  j["path"] = spec.path;
  j["directed"] = spec.directed;
  j["prob_model"] = {
      {"kind",
       spec.prob_model.kind == ProbabilityModel::Kind::constant ? "constant" : "weighted_cascade"},
      {"p", spec.prob_model.p}};
  j["cost_model"] = {{"kind", spec.cost_model.kind == CostModel::Kind::degree ? "degree"
                              : spec.cost_model.kind == CostModel::Kind::unit ? "unit"
                                                                              : "file"},
                     {"path", spec.cost_model.path}};
  return j;
}

}  // namespace cfg

inline ExperimentSpec experiment_from_json(const nlohmann::json& j) {
  cfg::check_keys(j,
                  {"networks", "algorithms", "eval", "embedding", "repetitions", "output_dir",
                   "master_seed", "config_hash"},
                  "experiment");
  ExperimentSpec spec;
  if (!j.contains("networks") || !j.at("networks").is_array())
    throw ConfigError("experiment: 'networks' must be an array");
  for (const auto& n : j.at("networks")) spec.networks.push_back(cfg::network_from_json(n));
  if (!j.contains("algorithms") || !j.at("algorithms").is_array())
    throw ConfigError("experiment: 'algorithms' must be an array");
  for (const auto& a : j.at("algorithms")) spec.algorithms.push_back(cfg::algo_from_json(a));
  if (j.contains("eval")) spec.eval = cfg::eval_from_json(j.at("eval"));
  if (j.contains("embedding")) {
    spec.embedding.walks = cfg::walks_from_json(j.at("embedding"));
    spec.embedding.file = cfg::get_or<std::string>(j.at("embedding"), "file", "", "embedding");
  }
  spec.repetitions = cfg::get_or<std::uint32_t>(j, "repetitions", spec.repetitions, "experiment");
  spec.output_dir = cfg::get_or<std::string>(j, "output_dir", spec.output_dir, "experiment");
  spec.master_seed = cfg::get_or<std::uint64_t>(j, "master_seed", spec.master_seed, "experiment");
  spec.validate();
  return spec;
}

inline nlohmann::json experiment_to_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  auto networks = nlohmann::json::array();
  for (const auto& n : spec.networks) networks.push_back(cfg::network_to_json(n));
  j["networks"] = std::move(networks);
  auto algorithms = nlohmann::json::array();
  for (const auto& a : spec.algorithms) algorithms.push_back(cfg::algo_to_json(a));
  j["algorithms"] = std::move(algorithms);
  j["eval"] = cfg::eval_to_json(spec.eval);
  j["embedding"] = cfg::walks_to_json(spec.embedding.walks, spec.embedding.file);
  j["repetitions"] = spec.repetitions;
  j["output_dir"] = spec.output_dir;
  j["master_seed"] = spec.master_seed;
  return j;
}

inline ExperimentSpec load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return experiment_from_json(j);
}

// Stable hash of the resolved experiment; stamps every output file. The
// output directory is excluded: where results land does not change them,
// and replaying a manifest into a fresh directory must reproduce files
// byte-identically.
inline std::uint64_t config_hash(const ExperimentSpec& spec) {
  nlohmann::json j = experiment_to_json(spec);
  j.erase("output_dir");
  const std::string dump = j.dump();
  std::uint64_t h = mix64(dump.size());
  for (unsigned char c : dump) h = hash_at(h, c);
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

}  // namespace evea
