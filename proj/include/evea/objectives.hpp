#pragma once

#include <array>
#include <cstdint>
#include <mutex>
#include <span>
#include <unordered_map>

#include "evea/diffusion.hpp"
#include "evea/graph.hpp"

namespace evea {

// Objective triple (influence spread, seed cost, propagation time), stored
// as a minimization vector (-spread, cost, time) for uniform dominance.
class ObjectiveVector {
 public:
  ObjectiveVector() = default;

  static ObjectiveVector from_max(double spread, double cost, double time) {
    ObjectiveVector v;
    v.min_ = {-spread, cost, time};
    return v;
  }
  static ObjectiveVector from_min(std::array<double, 3> triple) {
    ObjectiveVector v;
    v.min_ = triple;
    return v;
  }

  double spread() const { return -min_[0]; }
  double cost() const { return min_[1]; }
  double time() const { return min_[2]; }
  const std::array<double, 3>& min_triple() const { return min_; }

  friend bool operator==(const ObjectiveVector&, const ObjectiveVector&) = default;

 private:
  std::array<double, 3> min_{0.0, 0.0, 0.0};
};

// Strict Pareto dominance on the minimization triples.
inline bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  bool strict = false;
  for (int i = 0; i < 3; ++i) {
    if (a.min_triple()[i] > b.min_triple()[i]) return false;
    if (a.min_triple()[i] < b.min_triple()[i]) strict = true;
  }
  return strict;
}

struct EvalConfig {
  enum class Mode { per_generation, once };

  std::uint32_t mc_samples = 100;
  DelayDistribution delay = DelayDistribution::unit();
  std::uint64_t base_seed = 0;
  bool cache_enabled = true;
  Mode mode = Mode::per_generation;

  void validate() const {
    if (mc_samples < 1) throw ConfigError("eval.mc_samples must be >= 1");
  }
};

// Exact total activation cost of a seed set.
inline double seed_cost(const Graph& g, const SeedSet& s) {
  require_canonical_seed_set(s, g.node_count());
  double total = 0.0;
  for (NodeId v : s) total += g.cost(v);
  return total;
}

namespace detail {

struct SeedSetHash {
  std::size_t operator()(const SeedSet& s) const noexcept {
    std::uint64_t h = mix64(s.size());
    for (NodeId v : s) h = hash_at(h, v);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace detail

// Evaluates objective vectors for seed sets on one graph. Spread and time
// come from Monte Carlo estimation keyed by the current evaluation seed;
// cost is always exact. The memo cache is keyed by seed-set content, so
// results are independent of call order and safe under concurrent callers.
class Evaluator {
 public:
  Evaluator(const Graph& g, EvalConfig cfg) : graph_(&g), cfg_(cfg), seed_(cfg.base_seed) {
    cfg_.validate();
  }

  // Switch to a new evaluation seed (fresh common random numbers);
  // invalidates the cache.
  void reseed(std::uint64_t seed) {
    std::lock_guard lock(mutex_);
    seed_ = seed;
    cache_.clear();
  }

  std::uint64_t current_seed() const { return seed_; }
  const EvalConfig& config() const { return cfg_; }

  ObjectiveVector evaluate(const SeedSet& s) const {
    require_canonical_seed_set(s, graph_->node_count());
    if (cfg_.cache_enabled) {
      std::lock_guard lock(mutex_);
      auto it = cache_.find(s);
      if (it != cache_.end()) return it->second;
    }
    const McEstimate est =
        estimate_objectives_mc(*graph_, s, cfg_.mc_samples, cfg_.delay, seed_);
    const ObjectiveVector v =
        ObjectiveVector::from_max(est.mean_spread, seed_cost(*graph_, s), est.mean_finish_time);
    if (cfg_.cache_enabled) {
      std::lock_guard lock(mutex_);
      cache_.try_emplace(s, v);
    }
    return v;
  }

 private:
  const Graph* graph_;
  EvalConfig cfg_;
  std::uint64_t seed_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<SeedSet, ObjectiveVector, detail::SeedSetHash> cache_;
};

// One-shot evaluation with cfg.base_seed.
inline ObjectiveVector evaluate(const Graph& g, const SeedSet& s, const EvalConfig& cfg) {
  return Evaluator(g, cfg).evaluate(s);
}

}  // namespace evea
