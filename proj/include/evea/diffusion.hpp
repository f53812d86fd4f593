#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <queue>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "evea/graph.hpp"
#include "evea/rng.hpp"

namespace evea {

// Seed sets are sorted, duplicate-free node-id vectors.
using SeedSet = std::vector<NodeId>;

inline bool is_canonical_seed_set(const SeedSet& s, NodeId node_count) {
  if (s.empty()) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] >= node_count) return false;
    if (i > 0 && s[i] <= s[i - 1]) return false;
  }
  return true;
}

inline void require_canonical_seed_set(const SeedSet& s, NodeId node_count) {
  if (s.empty()) throw std::invalid_argument("seed set must be nonempty");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] >= node_count)
      throw std::invalid_argument("seed id out of range: " + std::to_string(s[i]));
    if (i > 0 && s[i] <= s[i - 1])
      throw std::invalid_argument("seed set must be sorted and duplicate-free");
  }
}

// Per-hop activation delay; values are integers >= 1 so a hop always costs
// at least one time step.
struct DelayDistribution {
  enum class Kind { unit, geometric };
  Kind kind = Kind::unit;
  double q = 1.0;  // geometric success probability, in (0, 1]

  static DelayDistribution unit() { return {Kind::unit, 1.0}; }
  static DelayDistribution geometric(double q) {
    if (!(q > 0.0 && q <= 1.0)) throw ConfigError("geometric delay parameter must be in (0,1]");
    return {Kind::geometric, q};
  }

  std::uint32_t sample(std::uint64_t bits) const {
    if (kind == Kind::unit || q >= 1.0) return 1;
    const double u = unit_from_bits(bits);
    const double d = std::floor(std::log1p(-u) / std::log1p(-q));
    return 1 + static_cast<std::uint32_t>(std::max(0.0, d));
  }

  friend bool operator==(const DelayDistribution&, const DelayDistribution&) = default;
};

struct CascadeResult {
  std::vector<NodeId> activated;                // sorted by id
  std::vector<std::uint32_t> activation_time;   // parallel to activated
  std::uint32_t finish_time = 0;                // max activation time

  std::size_t spread() const { return activated.size(); }

  // Activation time of v, or -1 if v was not activated.
  std::int64_t time_of(NodeId v) const {
    auto it = std::lower_bound(activated.begin(), activated.end(), v);
    if (it == activated.end() || *it != v) return -1;
    return activation_time[static_cast<std::size_t>(it - activated.begin())];
  }
};

// Event-driven LAIC cascade. Every arc's coin and delay are pure functions
// of (sim_seed, arc index), which makes the realization a live-edge graph:
// outcomes are independent of traversal order, coupled across seed sets
// (common random numbers) and monotone in the seed set. With unit delays
// this reduces to synchronous round-based IC.
inline CascadeResult simulate_cascade(const Graph& g, const SeedSet& seeds,
                                      const DelayDistribution& delay, std::uint64_t sim_seed) {
  require_canonical_seed_set(seeds, g.node_count());

  const std::uint64_t coin_stream = derive_seed(sim_seed, 0x0c01);
  const std::uint64_t delay_stream = derive_seed(sim_seed, 0xde1a);

  using Event = std::pair<std::uint32_t, NodeId>;  // (time, node)
  std::priority_queue<Event, std::vector<Event>, std::greater<>> heap;
  std::vector<char> done(g.node_count(), 0);

  for (NodeId s : seeds) heap.emplace(0, s);

  std::vector<NodeId> activated;
  std::vector<std::uint32_t> times;
  std::uint32_t finish = 0;

  while (!heap.empty()) {
    auto [t, u] = heap.top();
    heap.pop();
    if (done[u]) continue;  // an earlier successful activation already holds
    done[u] = 1;
    activated.push_back(u);
    times.push_back(t);
    finish = std::max(finish, t);

    const Arc* first = g.arcs().data();
    for (const Arc& a : g.out_arcs(u)) {
      if (done[a.dst]) continue;
      const auto arc_id = static_cast<std::uint64_t>(&a - first);
      if (unit_from_bits(hash_at(coin_stream, arc_id)) < a.prob) {
        const std::uint32_t d = delay.sample(hash_at(delay_stream, arc_id));
        heap.emplace(t + d, a.dst);
      }
    }
  }

  // Canonical order: sort by node id, times follow.
  std::vector<std::size_t> order(activated.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return activated[a] < activated[b]; });
  CascadeResult r;
  r.activated.reserve(order.size());
  r.activation_time.reserve(order.size());
  for (std::size_t i : order) {
    r.activated.push_back(activated[i]);
    r.activation_time.push_back(times[i]);
  }
  r.finish_time = finish;
  return r;
}

struct McEstimate {
  double mean_spread = 0.0;
  double mean_finish_time = 0.0;
  double std_spread = 0.0;
  double std_finish_time = 0.0;
  std::uint32_t samples = 0;
};

// Averages spread and finish time over R independent cascades; cascade i
// uses sub-seed derive_seed(base_seed, i), so estimates are bit-reproducible
// and share random numbers across candidate seed sets. The reduction is a
// fixed chunked sum: results are identical for any thread count.
inline McEstimate estimate_objectives_mc(const Graph& g, const SeedSet& seeds, std::uint32_t samples,
                                         const DelayDistribution& delay, std::uint64_t base_seed,
                                         unsigned threads = 1) {
  if (samples < 1) throw std::invalid_argument("mc_samples must be >= 1");
  require_canonical_seed_set(seeds, g.node_count());

  constexpr std::uint32_t kChunk = 1024;
  const std::uint32_t n_chunks = (samples + kChunk - 1) / kChunk;
  struct Partial {
    double s = 0, t = 0, s2 = 0, t2 = 0;
  };
  std::vector<Partial> partials(n_chunks);

  auto run_chunk = [&](std::uint32_t c) {
    Partial p;
    const std::uint32_t lo = c * kChunk;
    const std::uint32_t hi = std::min(samples, lo + kChunk);
    for (std::uint32_t i = lo; i < hi; ++i) {
      const CascadeResult r = simulate_cascade(g, seeds, delay, derive_seed(base_seed, i));
      const auto spread = static_cast<double>(r.spread());
      const auto finish = static_cast<double>(r.finish_time);
      p.s += spread;
      p.t += finish;
      p.s2 += spread * spread;
      p.t2 += finish * finish;
    }
    partials[c] = p;
  };

  if (threads <= 1 || n_chunks == 1) {
    for (std::uint32_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::uint32_t> next{0};
    std::vector<std::thread> pool;
    const unsigned n = std::min<unsigned>(threads, n_chunks);
    pool.reserve(n);
    for (unsigned i = 0; i < n; ++i)
      pool.emplace_back([&] {
        for (std::uint32_t c; (c = next.fetch_add(1)) < n_chunks;) run_chunk(c);
      });
    for (auto& th : pool) th.join();
  }

  Partial total;
  for (const Partial& p : partials) {
    total.s += p.s;
    total.t += p.t;
    total.s2 += p.s2;
    total.t2 += p.t2;
  }
  McEstimate est;
  est.samples = samples;
  const double r = samples;
  est.mean_spread = total.s / r;
  est.mean_finish_time = total.t / r;
  if (samples > 1) {
    est.std_spread = std::sqrt(std::max(0.0, (total.s2 - total.s * total.s / r) / (r - 1)));
    est.std_finish_time = std::sqrt(std::max(0.0, (total.t2 - total.t * total.t / r) / (r - 1)));
  }
  return est;
}

struct ExactExpectation {
  double spread = 0.0;
  double finish_time = 0.0;
};

// Brute-force oracle: enumerates all 2^|arcs| live-edge subgraphs weighted
// by the product of arc probabilities, multi-source BFS on each. Unit
// delays only; finish time of a realization is the max BFS depth over
// reached nodes. Enforced limit: at most 20 arcs.
inline ExactExpectation exact_expectation(const Graph& g, const SeedSet& seeds,
                                          const DelayDistribution& delay = DelayDistribution::unit()) {
  if (delay.kind != DelayDistribution::Kind::unit)
    throw std::invalid_argument("exact_expectation supports unit delays only");
  if (g.arc_count() > 20)
    throw std::invalid_argument("exact_expectation limited to graphs with <= 20 arcs");
  require_canonical_seed_set(seeds, g.node_count());

  const auto arcs = g.arcs();
  const auto m = static_cast<std::uint32_t>(arcs.size());
  const NodeId n = g.node_count();

  double exp_spread = 0.0;
  double exp_finish = 0.0;

  std::vector<std::int32_t> dist(n);
  std::vector<NodeId> frontier, next_frontier;

  for (std::uint64_t mask = 0; mask < (1ULL << m); ++mask) {
    double prob = 1.0;
    for (std::uint32_t e = 0; e < m; ++e)
      prob *= (mask >> e & 1) ? arcs[e].prob : 1.0 - arcs[e].prob;
    if (prob == 0.0) continue;

    std::fill(dist.begin(), dist.end(), -1);
    frontier.clear();
    for (NodeId s : seeds) {
      dist[s] = 0;
      frontier.push_back(s);
    }
    std::int32_t depth = 0;
    std::uint32_t reached = static_cast<std::uint32_t>(seeds.size());
    std::int32_t max_depth = 0;
    while (!frontier.empty()) {
      next_frontier.clear();
      ++depth;
      for (NodeId u : frontier) {
        for (const Arc& a : g.out_arcs(u)) {
          const auto arc_id = static_cast<std::uint32_t>(&a - arcs.data());
          if (!(mask >> arc_id & 1)) continue;
          if (dist[a.dst] >= 0) continue;
          dist[a.dst] = depth;
          max_depth = depth;
          ++reached;
          next_frontier.push_back(a.dst);
        }
      }
      frontier.swap(next_frontier);
    }
    exp_spread += prob * reached;
    exp_finish += prob * max_depth;
  }
  return {exp_spread, exp_finish};
}

}  // namespace evea
