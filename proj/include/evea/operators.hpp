#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "evea/diffusion.hpp"
#include "evea/embedding.hpp"
#include "evea/graph.hpp"
#include "evea/rng.hpp"

namespace evea {

namespace detail {

inline bool contains(const SeedSet& s, NodeId v) {
  return std::binary_search(s.begin(), s.end(), v);
}

inline void insert_sorted(SeedSet& s, NodeId v) {
  const auto it = std::lower_bound(s.begin(), s.end(), v);
  if (it == s.end() || *it != v) s.insert(it, v);
}

inline void erase_sorted(SeedSet& s, NodeId v) {
  const auto it = std::lower_bound(s.begin(), s.end(), v);
  if (it != s.end() && *it == v) s.erase(it);
}

// Uniform draw from V \ s. Enumerates the complement when it is small,
// otherwise rejection-samples; both are exact-uniform.
inline NodeId draw_outside(const SeedSet& s, NodeId node_count, Rng& rng) {
  const std::uint64_t outside = node_count - s.size();
  if (outside == 0) throw std::logic_error("draw_outside: seed set covers all nodes");
  if (outside * 4 <= node_count) {
    std::vector<NodeId> complement;
    complement.reserve(outside);
    std::size_t i = 0;
    for (NodeId v = 0; v < node_count; ++v) {
      if (i < s.size() && s[i] == v) {
        ++i;
        continue;
      }
      complement.push_back(v);
    }
    return complement[rng.next_below(complement.size())];
  }
  for (;;) {
    const auto v = static_cast<NodeId>(rng.next_below(node_count));
    if (!contains(s, v)) return v;
  }
}

}  // namespace detail

// Greedy minimum-distance matching between two seed sets in embedding
// space: min(|s1|,|s2|) pairs, surplus nodes of the longer set unmatched.
struct AlignmentPairing {
  struct Pair {
    NodeId from_s1;
    NodeId from_s2;
    double distance;
  };
  std::vector<Pair> pairs;
  std::vector<NodeId> unmatched_1;
  std::vector<NodeId> unmatched_2;
};

// Repeatedly takes the unmatched cross pair with minimum Euclidean
// distance, ties broken by smaller (id1, id2), until the shorter set is
// exhausted.
inline AlignmentPairing align_pairs(const SeedSet& s1, const SeedSet& s2,
                                    const EmbeddingTable& emb) {
  if (s1.empty() || s2.empty()) throw std::invalid_argument("align_pairs: empty seed set");
  for (NodeId v : s1)
    if (v >= emb.node_count()) throw std::out_of_range("align_pairs: missing embedding vector");
  for (NodeId v : s2)
    if (v >= emb.node_count()) throw std::out_of_range("align_pairs: missing embedding vector");

  struct Candidate {
    double dist;
    NodeId a;
    NodeId b;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(s1.size() * s2.size());
  for (NodeId a : s1)
    for (NodeId b : s2) candidates.push_back({euclidean_distance(emb, a, b), a, b});
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    return std::tie(x.dist, x.a, x.b) < std::tie(y.dist, y.a, y.b);
  });

  AlignmentPairing result;
  const std::size_t target = std::min(s1.size(), s2.size());
  std::vector<char> used1(s1.size(), 0), used2(s2.size(), 0);
  auto index_of = [](const SeedSet& s, NodeId v) {
    return static_cast<std::size_t>(std::lower_bound(s.begin(), s.end(), v) - s.begin());
  };
  for (const Candidate& c : candidates) {
    if (result.pairs.size() == target) break;
    const std::size_t i = index_of(s1, c.a);
    const std::size_t j = index_of(s2, c.b);
    if (used1[i] || used2[j]) continue;
    used1[i] = used2[j] = 1;
    result.pairs.push_back({c.a, c.b, c.dist});
  }
  for (std::size_t i = 0; i < s1.size(); ++i)
    if (!used1[i]) result.unmatched_1.push_back(s1[i]);
  for (std::size_t j = 0; j < s2.size(); ++j)
    if (!used2[j]) result.unmatched_2.push_back(s2[j]);
  return result;
}

// For each aligned pair (u, v), with probability p_c the nodes swap
// membership across the children. A swap that would land a node already
// present shrinks that child by one (no repair); unmatched nodes stay with
// their own side. Children are never empty: a swap always leaves the
// incoming node in place, and one that would empty a child is skipped.
inline std::pair<SeedSet, SeedSet> embedding_aligned_crossover(const SeedSet& s1, const SeedSet& s2,
                                                               const EmbeddingTable& emb, double p_c,
                                                               Rng& rng) {
  const AlignmentPairing alignment = align_pairs(s1, s2, emb);
  SeedSet c1 = s1;
  SeedSet c2 = s2;
  for (const auto& pair : alignment.pairs) {
    if (!rng.next_bernoulli(p_c)) continue;
    const NodeId u = pair.from_s1;
    const NodeId v = pair.from_s2;
    if (u == v) continue;
    const bool c1_would_empty = c1.size() == 1 && c1[0] == u && detail::contains(c1, v);
    const bool c2_would_empty = c2.size() == 1 && c2[0] == v && detail::contains(c2, u);
    if (c1_would_empty || c2_would_empty) continue;
    detail::erase_sorted(c1, u);
    detail::insert_sorted(c1, v);
    detail::erase_sorted(c2, v);
    detail::insert_sorted(c2, u);
  }
  return {std::move(c1), std::move(c2)};
}

// One strategy uniformly at random among the feasible ones:
//   add     - uniform node from V\S appended      (infeasible when |S| = n)
//   delete  - uniform member removed              (infeasible when |S| = 1)
//   replace - uniform member swapped with V\S     (infeasible when |S| = n)
// Returns the set unchanged when nothing is feasible (single-node graph).
inline SeedSet variable_length_mutation(const SeedSet& s, const Graph& g, Rng& rng) {
  require_canonical_seed_set(s, g.node_count());
  const NodeId n = g.node_count();

  enum Strategy { kAdd, kDelete, kReplace };
  std::vector<Strategy> feasible;
  if (s.size() < n) feasible.push_back(kAdd);
  if (s.size() > 1) feasible.push_back(kDelete);
  if (s.size() < n) feasible.push_back(kReplace);
  if (feasible.empty()) return s;

  SeedSet out = s;
  switch (feasible[rng.next_below(feasible.size())]) {
    case kAdd:
      detail::insert_sorted(out, detail::draw_outside(out, n, rng));
      break;
    case kDelete:
      out.erase(out.begin() + static_cast<std::ptrdiff_t>(rng.next_below(out.size())));
      break;
    case kReplace: {
      // The incoming node is drawn from V \ S (the original set), so a
      // replace never reproduces the input.
      const auto victim = out.begin() + static_cast<std::ptrdiff_t>(rng.next_below(out.size()));
      out.erase(victim);
      detail::insert_sorted(out, detail::draw_outside(s, n, rng));
      break;
    }
  }
  return out;
}

// Replaces a uniform member with a uniform outside node; preserves length.
// Baseline mutation for the fixed-length NSGA-II variants.
inline SeedSet replace_only_mutation(const SeedSet& s, const Graph& g, Rng& rng) {
  require_canonical_seed_set(s, g.node_count());
  if (s.size() == g.node_count()) return s;
  SeedSet out = s;
  out.erase(out.begin() + static_cast<std::ptrdiff_t>(rng.next_below(out.size())));
  detail::insert_sorted(out, detail::draw_outside(s, g.node_count(), rng));
  return out;
}

// Position-wise swap on the sorted representations with probability p_c per
// slot; duplicate collisions are repaired by resampling uniform unused
// nodes until each child is back at length k.
inline std::pair<SeedSet, SeedSet> fixed_length_uniform_crossover(const SeedSet& s1,
                                                                  const SeedSet& s2, double p_c,
                                                                  NodeId node_count, Rng& rng) {
  if (s1.size() != s2.size())
    throw std::invalid_argument("fixed_length_uniform_crossover: unequal parent lengths");
  const std::size_t k = s1.size();

  std::vector<NodeId> a(s1), b(s2);
  for (std::size_t i = 0; i < k; ++i)
    if (rng.next_bernoulli(p_c)) std::swap(a[i], b[i]);

  auto repair = [&](std::vector<NodeId>& child) {
    std::sort(child.begin(), child.end());
    child.erase(std::unique(child.begin(), child.end()), child.end());
    while (child.size() < k)
      detail::insert_sorted(child, detail::draw_outside(child, node_count, rng));
  };
  repair(a);
  repair(b);
  return {std::move(a), std::move(b)};
}

}  // namespace evea
