#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "evea/embedding.hpp"
#include "evea/graph.hpp"
#include "evea/metrics.hpp"
#include "evea/nsga2.hpp"
#include "evea/objectives.hpp"
#include "evea/operators.hpp"

namespace evea {

enum class Variant { EVEA, NSGA2, NSGA2_VC, NSGA2_VM };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::EVEA: return "EVEA";
    case Variant::NSGA2: return "NSGA2";
    case Variant::NSGA2_VC: return "NSGA2+VC";
    case Variant::NSGA2_VM: return "NSGA2+VM";
  }
  return "?";
}

inline Variant variant_from_name(const std::string& s) {
  if (s == "EVEA") return Variant::EVEA;
  if (s == "NSGA2") return Variant::NSGA2;
  if (s == "NSGA2+VC") return Variant::NSGA2_VC;
  if (s == "NSGA2+VM") return Variant::NSGA2_VM;
  throw ConfigError("unknown algorithm variant: " + s);
}

// Variants using the embedding-aligned crossover need an embedding table.
inline bool variant_needs_embeddings(Variant v) {
  return v == Variant::EVEA || v == Variant::NSGA2_VC;
}

struct Individual {
  SeedSet seeds;  // sorted, duplicate-free, 1 <= |seeds| <= max_seeds
  std::optional<ObjectiveVector> objectives;
  std::uint32_t rank = 0;
  double crowding = 0.0;
};

struct AlgoConfig {
  std::uint32_t population_size = 100;
  std::uint32_t max_generations = 1000;
  double crossover_rate = 0.9;
  double mutation_rate = 0.2;
  std::uint32_t tournament_size = 2;
  std::uint32_t init_size_min = 1;
  std::uint32_t init_size_max = 30;
  std::uint32_t max_seeds = 100;
  Variant variant = Variant::EVEA;
  std::uint64_t rng_seed = 0;

  void validate(NodeId node_count) const {
    if (population_size < 2 || population_size % 2 != 0)
      throw ConfigError("population_size must be even and >= 2");
    if (crossover_rate < 0.0 || crossover_rate > 1.0)
      throw ConfigError("crossover_rate must be in [0,1]");
    if (mutation_rate < 0.0 || mutation_rate > 1.0)
      throw ConfigError("mutation_rate must be in [0,1]");
    if (tournament_size < 1) throw ConfigError("tournament_size must be >= 1");
    if (init_size_min < 1 || init_size_min > init_size_max)
      throw ConfigError("init size range must satisfy 1 <= min <= max");
    if (init_size_max > max_seeds) throw ConfigError("init size range must lie within max_seeds");
    if (init_size_max > node_count)
      throw ConfigError("init size range upper bound exceeds node count");
    if (node_count == 0) throw ConfigError("graph has no nodes");
  }

  std::uint32_t fixed_length() const { return (init_size_min + init_size_max) / 2; }
};

struct GenerationRecord {
  std::vector<ObjectiveVector> front;  // population front 0, duplicates collapsed
  double hypervolume = 0.0;
  double wall_ms = 0.0;
  std::uint64_t eval_seed = 0;
};

struct RunResult {
  AlgoConfig algo;
  EvalConfig eval;
  std::uint64_t graph_fingerprint = 0;
  std::uint64_t embedding_fingerprint = 0;
  NormalizationBounds trace_bounds;  // run-local bounds behind the HV trace
  std::vector<GenerationRecord> generations;  // entries for generations 0..G_max
  std::vector<Individual> final_population;
  std::vector<std::string> warnings;
  std::uint32_t generations_executed = 0;

  const GenerationRecord& final_record() const { return generations.back(); }
};

// HV trace for a completed run: (generation, front-0 hypervolume).
inline std::vector<std::pair<std::uint32_t, double>> convergence_trace(const RunResult& run) {
  std::vector<std::pair<std::uint32_t, double>> trace;
  trace.reserve(run.generations.size());
  for (std::uint32_t t = 0; t < run.generations.size(); ++t)
    trace.emplace_back(t, run.generations[t].hypervolume);
  return trace;
}

// Fixed objective bounds for a run's own HV trace, derived from the graph:
// spread in [0, n], cost in [0, sum of the max_seeds largest costs], time
// in [0, n]. Geometric delays can exceed the time bound; normalize() clips.
inline NormalizationBounds trace_bounds_for(const Graph& g, const AlgoConfig& cfg) {
  std::vector<double> costs(g.costs().begin(), g.costs().end());
  std::sort(costs.begin(), costs.end(), std::greater<>());
  double cost_cap = 0.0;
  for (std::size_t i = 0; i < std::min<std::size_t>(cfg.max_seeds, costs.size()); ++i)
    cost_cap += costs[i];
  NormalizationBounds b;
  const auto n = static_cast<double>(g.node_count());
  b.lo = {-n, 0.0, 0.0};
  b.hi = {0.0, cost_cap, n};
  return b;
}

// N individuals; lengths drawn uniformly from the init range (the pure
// fixed-length variant uses the midpoint length instead), node sets drawn
// uniformly without replacement. All unevaluated.
inline std::vector<Individual> initialize_population(const Graph& g, const AlgoConfig& cfg,
                                                     Rng& rng) {
  cfg.validate(g.node_count());
  const NodeId n = g.node_count();
  std::vector<Individual> pop(cfg.population_size);
  for (auto& ind : pop) {
    const std::uint32_t len =
        cfg.variant == Variant::NSGA2
            ? cfg.fixed_length()
            : cfg.init_size_min +
                  static_cast<std::uint32_t>(rng.next_below(cfg.init_size_max - cfg.init_size_min + 1));
    SeedSet s;
    s.reserve(len);
    while (s.size() < len) {
      const auto v = static_cast<NodeId>(rng.next_below(n));
      detail::insert_sorted(s, v);
    }
    ind.seeds = std::move(s);
  }
  return pop;
}

namespace detail {

inline void require_evaluated(const std::vector<Individual>& pop) {
  for (const auto& ind : pop)
    if (!ind.objectives)
      throw std::invalid_argument("unevaluated individual in selection");
}

inline std::vector<ObjectiveVector> objective_list(const std::vector<Individual>& pop) {
  std::vector<ObjectiveVector> out;
  out.reserve(pop.size());
  for (const auto& ind : pop) out.push_back(*ind.objectives);
  return out;
}

// Rank + crowding assignment in place.
inline void assign_rank_and_crowding(std::vector<Individual>& pop) {
  require_evaluated(pop);
  const auto objectives = objective_list(pop);
  const auto fronts = fast_nondominated_sort(objectives);
  for (std::uint32_t r = 0; r < fronts.size(); ++r) {
    std::vector<ObjectiveVector> front_objs;
    front_objs.reserve(fronts[r].size());
    for (std::size_t i : fronts[r]) front_objs.push_back(objectives[i]);
    const auto crowd = crowding_distance(front_objs);
    for (std::size_t k = 0; k < fronts[r].size(); ++k) {
      pop[fronts[r][k]].rank = r;
      pop[fronts[r][k]].crowding = crowd[k];
    }
  }
}

}  // namespace detail

// N tournaments with replacement; winner = lower rank, ties by larger
// crowding distance, remaining ties by coin flip.
inline std::vector<Individual> tournament_selection(const std::vector<Individual>& pop,
                                                    const AlgoConfig& cfg, Rng& rng) {
  detail::require_evaluated(pop);
  if (pop.empty()) throw std::invalid_argument("tournament over empty population");
  std::vector<Individual> pool;
  pool.reserve(cfg.population_size);
  for (std::uint32_t t = 0; t < cfg.population_size; ++t) {
    std::size_t best = rng.next_below(pop.size());
    for (std::uint32_t k = 1; k < cfg.tournament_size; ++k) {
      const std::size_t challenger = rng.next_below(pop.size());
      const auto& b = pop[best];
      const auto& c = pop[challenger];
      if (c.rank < b.rank)
        best = challenger;
      else if (c.rank == b.rank) {
        if (c.crowding > b.crowding)
          best = challenger;
        else if (c.crowding == b.crowding && rng.next_bernoulli(0.5))
          best = challenger;
      }
    }
    pool.push_back(pop[best]);
  }
  return pool;
}

// Elitist truncation of parents+offspring to N: fill by ascending front,
// split the last admitted front by descending crowding distance (ties by
// stable input order). Ranks and crowding are recomputed on the survivors.
inline std::vector<Individual> environmental_selection(std::vector<Individual> combined,
                                                       std::uint32_t n) {
  if (combined.size() < n)
    throw std::invalid_argument("environmental selection needs at least N individuals");
  detail::require_evaluated(combined);

  const auto objectives = detail::objective_list(combined);
  const auto fronts = fast_nondominated_sort(objectives);

  std::vector<Individual> survivors;
  survivors.reserve(n);
  for (const auto& front : fronts) {
    if (survivors.size() == n) break;
    if (survivors.size() + front.size() <= n) {
      for (std::size_t i : front) survivors.push_back(std::move(combined[i]));
      continue;
    }
    std::vector<ObjectiveVector> front_objs;
    front_objs.reserve(front.size());
    for (std::size_t i : front) front_objs.push_back(objectives[i]);
    const auto crowd = crowding_distance(front_objs);
    std::vector<std::size_t> order(front.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return crowd[a] > crowd[b]; });
    for (std::size_t k = 0; survivors.size() < n; ++k)
      survivors.push_back(std::move(combined[front[order[k]]]));
  }
  detail::assign_rank_and_crowding(survivors);
  return survivors;
}

namespace detail {

// Deterministic fan-out evaluation: slots are assigned by index, so the
// result is identical for any thread count.
inline void evaluate_population(std::vector<Individual>& pop, const Evaluator& evaluator,
                                unsigned threads, bool force) {
  auto work = [&](std::size_t i) {
    if (force || !pop[i].objectives) pop[i].objectives = evaluator.evaluate(pop[i].seeds);
  };
  if (threads <= 1 || pop.size() < 2) {
    for (std::size_t i = 0; i < pop.size(); ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  const unsigned n = std::min<unsigned>(threads, static_cast<unsigned>(pop.size()));
  workers.reserve(n);
  for (unsigned t = 0; t < n; ++t)
    workers.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < pop.size();) work(i);
    });
  for (auto& w : workers) w.join();
}

inline void enforce_max_seeds(SeedSet& s, std::uint32_t max_seeds, Rng& rng) {
  while (s.size() > max_seeds)
    s.erase(s.begin() + static_cast<std::ptrdiff_t>(rng.next_below(s.size())));
}

}  // namespace detail

// Algorithm main loop: initialization, tournament selection, variant
// crossover and mutation, NSGA-II environmental selection, per-generation
// front/HV bookkeeping.
//
// Variant table:
//   EVEA      embedding-aligned crossover + variable-length mutation
//   NSGA2     fixed-length uniform crossover + replace-only mutation
//   NSGA2+VC  embedding-aligned crossover + replace-only mutation
//   NSGA2+VM  fixed-length uniform crossover + variable-length mutation
inline RunResult run(const Graph& g, const EmbeddingTable* emb, const AlgoConfig& cfg,
                     const EvalConfig& eval_cfg, unsigned threads = 1) {
  cfg.validate(g.node_count());
  eval_cfg.validate();

  RunResult result;
  result.algo = cfg;
  result.eval = eval_cfg;
  result.graph_fingerprint = g.fingerprint();
  result.trace_bounds = trace_bounds_for(g, cfg);

  if (variant_needs_embeddings(cfg.variant)) {
    if (emb == nullptr)
      throw ConfigError(std::string(variant_name(cfg.variant)) + " requires an embedding table");
    if (!emb->covers(g))
      throw ConfigError("embedding table does not cover the graph's nodes");
    result.embedding_fingerprint = emb->trained_on();
    if (emb->trained_on() != 0 && emb->trained_on() != result.graph_fingerprint)
      result.warnings.push_back("embedding fingerprint does not match the run's graph");
  }

  Evaluator evaluator(g, eval_cfg);
  const bool per_generation = eval_cfg.mode == EvalConfig::Mode::per_generation;
  auto generation_seed = [&](std::uint32_t t) { return derive_seed(eval_cfg.base_seed, t); };

  Rng rng(cfg.rng_seed);
  auto pop = initialize_population(g, cfg, rng);

  auto record_generation = [&](std::uint32_t t, double wall_ms) {
    GenerationRecord rec;
    rec.eval_seed = evaluator.current_seed();
    rec.wall_ms = wall_ms;
    const auto fronts = fast_nondominated_sort(detail::objective_list(pop));
    std::vector<ObjectiveVector> front0;
    front0.reserve(fronts[0].size());
    for (std::size_t i : fronts[0]) front0.push_back(*pop[i].objectives);
    rec.front = extract_pareto_front(front0);  // collapse duplicates
    rec.hypervolume = hypervolume_3d(normalize(rec.front, result.trace_bounds));
    result.generations.push_back(std::move(rec));
    (void)t;
  };

  using clock = std::chrono::steady_clock;
  auto gen_start = clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(clock::now() - gen_start).count();
  };

  evaluator.reseed(generation_seed(0));
  detail::evaluate_population(pop, evaluator, threads, true);
  detail::assign_rank_and_crowding(pop);
  record_generation(0, elapsed_ms());

  for (std::uint32_t t = 1; t <= cfg.max_generations; ++t) {
    gen_start = clock::now();
    if (per_generation) {
      evaluator.reseed(generation_seed(t));
      detail::evaluate_population(pop, evaluator, threads, true);
      detail::assign_rank_and_crowding(pop);
    }

    auto pool = tournament_selection(pop, cfg, rng);

    std::vector<Individual> offspring;
    offspring.reserve(cfg.population_size);
    for (std::size_t i = 0; i + 1 < pool.size(); i += 2) {
      const SeedSet& p1 = pool[i].seeds;
      const SeedSet& p2 = pool[i + 1].seeds;
      std::pair<SeedSet, SeedSet> children;
      switch (cfg.variant) {
        case Variant::EVEA:
        case Variant::NSGA2_VC:
          children = embedding_aligned_crossover(p1, p2, *emb, cfg.crossover_rate, rng);
          break;
        case Variant::NSGA2:
        case Variant::NSGA2_VM:
          // Fixed-length crossover is undefined for unequal lengths, which
          // the VM variant produces; such pairs pass through unchanged.
          if (p1.size() == p2.size())
            children = fixed_length_uniform_crossover(p1, p2, cfg.crossover_rate,
                                                      g.node_count(), rng);
          else
            children = {p1, p2};
          break;
      }
      auto mutate = [&](SeedSet s) {
        if (rng.next_bernoulli(cfg.mutation_rate)) {
          const bool variable_length =
              cfg.variant == Variant::EVEA || cfg.variant == Variant::NSGA2_VM;
          s = variable_length ? variable_length_mutation(s, g, rng)
                              : replace_only_mutation(s, g, rng);
        }
        detail::enforce_max_seeds(s, cfg.max_seeds, rng);
        return s;
      };
      offspring.push_back(Individual{mutate(std::move(children.first)), std::nullopt, 0, 0.0});
      offspring.push_back(Individual{mutate(std::move(children.second)), std::nullopt, 0, 0.0});
    }

    detail::evaluate_population(offspring, evaluator, threads, true);

    std::vector<Individual> combined;
    combined.reserve(pop.size() + offspring.size());
    for (auto& ind : pop) combined.push_back(std::move(ind));
    for (auto& ind : offspring) combined.push_back(std::move(ind));
    pop = environmental_selection(std::move(combined), cfg.population_size);

    record_generation(t, elapsed_ms());
  }

  result.generations_executed = cfg.max_generations;
  result.final_population = std::move(pop);
  return result;
}

}  // namespace evea
