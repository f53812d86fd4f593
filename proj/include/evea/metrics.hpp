#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "evea/objectives.hpp"
#include "evea/rng.hpp"

namespace evea {

// Maximal non-dominated subset; duplicates collapsed, first-occurrence
// order preserved. Idempotent.
inline std::vector<ObjectiveVector> extract_pareto_front(std::span<const ObjectiveVector> points) {
  std::vector<ObjectiveVector> front;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < points.size() && keep; ++j)
      if (j != i && dominates(points[j], points[i])) keep = false;
    if (!keep) continue;
    if (std::find(front.begin(), front.end(), points[i]) == front.end())
      front.push_back(points[i]);
  }
  return front;
}

// Per-objective (min, max) over a declared reference set. Frozen before any
// hypervolume comparison and shared across all algorithms being compared.
struct NormalizationBounds {
  std::array<double, 3> lo{0.0, 0.0, 0.0};
  std::array<double, 3> hi{1.0, 1.0, 1.0};

  static NormalizationBounds from_points(std::span<const ObjectiveVector> points) {
    if (points.empty()) throw std::invalid_argument("bounds require at least one point");
    NormalizationBounds b;
    for (int m = 0; m < 3; ++m) {
      b.lo[m] = points[0].min_triple()[m];
      b.hi[m] = points[0].min_triple()[m];
    }
    for (const auto& p : points)
      for (int m = 0; m < 3; ++m) {
        b.lo[m] = std::min(b.lo[m], p.min_triple()[m]);
        b.hi[m] = std::max(b.hi[m], p.min_triple()[m]);
      }
    return b;
  }

  bool valid() const {
    for (int m = 0; m < 3; ++m)
      if (!(hi[m] >= lo[m]) || !std::isfinite(lo[m]) || !std::isfinite(hi[m])) return false;
    return true;
  }

  friend bool operator==(const NormalizationBounds&, const NormalizationBounds&) = default;
};

struct NormalizedFront {
  std::vector<std::array<double, 3>> points;  // minimization, in [0,1]^3
  std::size_t clipped = 0;
};

// Affine map of each objective into [0,1]; zero-range objectives map to
// 0.5; out-of-bounds points are clipped (counted).
inline NormalizedFront normalize(std::span<const ObjectiveVector> front,
                                 const NormalizationBounds& bounds) {
  if (!bounds.valid()) throw std::invalid_argument("invalid normalization bounds");
  NormalizedFront out;
  out.points.reserve(front.size());
  for (const auto& p : front) {
    std::array<double, 3> q{};
    bool clipped = false;
    for (int m = 0; m < 3; ++m) {
      const double range = bounds.hi[m] - bounds.lo[m];
      if (range <= 0.0) {
        q[m] = 0.5;
        continue;
      }
      double v = (p.min_triple()[m] - bounds.lo[m]) / range;
      if (v < 0.0 || v > 1.0) {
        clipped = true;
        v = std::clamp(v, 0.0, 1.0);
      }
      q[m] = v;
    }
    if (clipped) ++out.clipped;
    out.points.push_back(q);
  }
  return out;
}

// Exact dominated volume of a 3-D minimization front relative to `ref`:
// sweep over the sorted third coordinate with an incrementally maintained
// 2-D staircase. Dominated and duplicate points contribute nothing.
inline double hypervolume_3d(std::span<const std::array<double, 3>> points,
                             std::array<double, 3> ref = {1.1, 1.1, 1.1}) {
  if (points.empty()) return 0.0;
  std::string offenders;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!(points[i][0] <= ref[0] && points[i][1] <= ref[1] && points[i][2] <= ref[2]))
      offenders += (offenders.empty() ? "" : ", ") + std::to_string(i);
  if (!offenders.empty())
    throw std::invalid_argument("hypervolume: points beyond reference at indices " + offenders);

  std::vector<std::array<double, 3>> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return std::tie(a[2], a[0], a[1]) < std::tie(b[2], b[0], b[1]);
  });

  // Staircase of (x, y) projections, sorted by x ascending / y descending.
  std::vector<std::array<double, 2>> stairs;
  auto area = [&]() {
    double acc = 0.0;
    for (std::size_t i = 0; i < stairs.size(); ++i) {
      const double next_x = i + 1 < stairs.size() ? stairs[i + 1][0] : ref[0];
      acc += (next_x - stairs[i][0]) * (ref[1] - stairs[i][1]);
    }
    return acc;
  };

  double volume = 0.0;
  double prev_z = pts.front()[2];
  for (const auto& p : pts) {
    if (p[2] > prev_z) {
      volume += area() * (p[2] - prev_z);
      prev_z = p[2];
    }
    const std::array<double, 2> xy{p[0], p[1]};
    // Skip if 2-D weakly dominated by the staircase.
    bool dominated = false;
    for (const auto& s : stairs)
      if (s[0] <= xy[0] && s[1] <= xy[1]) {
        dominated = true;
        break;
      }
    if (dominated) continue;
    std::erase_if(stairs, [&](const auto& s) { return xy[0] <= s[0] && xy[1] <= s[1]; });
    stairs.insert(std::lower_bound(stairs.begin(), stairs.end(), xy), xy);
  }
  volume += area() * (ref[2] - prev_z);
  return volume;
}

inline double hypervolume_3d(const NormalizedFront& front,
                             std::array<double, 3> ref = {1.1, 1.1, 1.1}) {
  return hypervolume_3d(std::span<const std::array<double, 3>>(front.points), ref);
}

struct WilcoxonResult {
  double statistic = 0.0;  // W = min(W+, W-)
  double p_value = 1.0;
  std::size_t n = 0;  // pairs used after dropping zero differences
  bool exact = false;
};

enum class WilcoxonMethod { automatic, exact, normal_approx };

// Two-sided paired Wilcoxon signed-rank test. Exact permutation p-value for
// n <= 15 (enumeration of sign assignments over the tied average ranks),
// normal approximation with tie and continuity corrections otherwise.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> xs, std::span<const double> ys,
                                           WilcoxonMethod method = WilcoxonMethod::automatic) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("wilcoxon: samples must have equal length");

  std::vector<double> diffs;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - ys[i];
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.empty()) throw std::invalid_argument("wilcoxon: all differences zero");
  const std::size_t n = diffs.size();
  if (n < 5) throw std::invalid_argument("wilcoxon: samples too small (need >= 5 nonzero pairs)");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(diffs[a]) < std::abs(diffs[b]);
  });

  // Average ranks over tie groups; collect tie sizes for the variance term.
  std::vector<double> ranks(n, 0.0);
  std::vector<std::size_t> tie_sizes;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    tie_sizes.push_back(j - i);
    i = j;
  }

  double w_plus = 0.0, w_minus = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    (diffs[i] > 0.0 ? w_plus : w_minus) += ranks[i];
  const double w = std::min(w_plus, w_minus);

  WilcoxonResult result;
  result.statistic = w;
  result.n = n;
  const bool use_exact =
      method == WilcoxonMethod::exact || (method == WilcoxonMethod::automatic && n <= 15);

  if (use_exact) {
    if (n > 25) throw std::invalid_argument("wilcoxon: exact mode limited to n <= 25");
    std::uint64_t count_le = 0;
    const std::uint64_t total = 1ULL << n;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1) sum += ranks[i];
      if (sum <= w) ++count_le;
    }
    result.exact = true;
    result.p_value = std::min(1.0, 2.0 * static_cast<double>(count_le) / static_cast<double>(total));
  } else {
    const double dn = static_cast<double>(n);
    const double mean = dn * (dn + 1.0) / 4.0;
    double tie_term = 0.0;
    for (std::size_t t : tie_sizes) {
      const double td = static_cast<double>(t);
      tie_term += td * td * td - td;
    }
    const double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0 - tie_term / 48.0;
    if (var <= 0.0) throw std::invalid_argument("wilcoxon: zero variance (all ranks tied away)");
    const double num = std::abs(w_plus - mean);
    const double z = (num - std::min(0.5, num)) / std::sqrt(var);
    result.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  }
  return result;
}

}  // namespace evea
