#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "evea/objectives.hpp"

namespace evea {

// Deb's fast non-dominated sort: front 0 is the non-dominated set, front
// i+1 the non-dominated set after removing fronts <= i. O(N^2) dominance
// comparisons; every index appears in exactly one front.
inline std::vector<std::vector<std::size_t>> fast_nondominated_sort(
    std::span<const ObjectiveVector> points) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> fronts;
  if (n == 0) return fronts;

  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> domination_count(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dominates(points[i], points[j])) {
        dominated[i].push_back(j);
        ++domination_count[j];
      } else if (dominates(points[j], points[i])) {
        dominated[j].push_back(i);
        ++domination_count[i];
      }
    }
  }

  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i)
    if (domination_count[i] == 0) current.push_back(i);
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t i : current)
      for (std::size_t j : dominated[i])
        if (--domination_count[j] == 0) next.push_back(j);
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

// NSGA-II crowding distance within one front. Boundary members of each
// objective get infinity; interior members accumulate neighbor gaps
// normalized by the objective range; a zero-range objective contributes 0.
// Ties in an objective are ordered by index so the assignment is
// deterministic.
inline std::vector<double> crowding_distance(std::span<const ObjectiveVector> front) {
  const std::size_t n = front.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> distance(n, 0.0);
  if (n <= 2) {
    std::fill(distance.begin(), distance.end(), kInf);
    return distance;
  }
  std::vector<std::size_t> order(n);
  for (int m = 0; m < 3; ++m) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double fa = front[a].min_triple()[m];
      const double fb = front[b].min_triple()[m];
      return fa != fb ? fa < fb : a < b;
    });
    const double range =
        front[order.back()].min_triple()[m] - front[order.front()].min_triple()[m];
    distance[order.front()] = kInf;
    distance[order.back()] = kInf;
    if (range <= 0.0) continue;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double gap = front[order[i + 1]].min_triple()[m] - front[order[i - 1]].min_triple()[m];
      distance[order[i]] += gap / range;
    }
  }
  return distance;
}

}  // namespace evea
