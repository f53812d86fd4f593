#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "evea/diffusion.hpp"
#include "evea/fixtures.hpp"
#include "evea/graph.hpp"

using namespace evea;

namespace {

Graph load_text(const std::string& text, bool directed, const ProbabilityModel& pm) {
  std::istringstream in(text);
  return load_edge_list_stream(in, "test", directed, pm, CostModel::unit());
}

Graph random_graph(Rng& rng, int max_nodes, int max_arcs, double p) {
  const int n = 2 + static_cast<int>(rng.next_below(max_nodes - 1));
  std::vector<std::pair<NodeId, NodeId>> endpoints;
  const int m = 1 + static_cast<int>(rng.next_below(max_arcs));
  for (int e = 0; e < m; ++e) {
    const auto src = static_cast<NodeId>(rng.next_below(n));
    const auto dst = static_cast<NodeId>(rng.next_below(n));
    endpoints.emplace_back(src, dst);
  }
  return Graph::build(std::move(endpoints), static_cast<NodeId>(n), true,
                      ProbabilityModel::constant(p), CostModel::unit(), {});
}

SeedSet random_seeds(Rng& rng, NodeId n) {
  SeedSet s;
  const auto count = 1 + rng.next_below(n);
  while (s.size() < count) {
    const auto v = static_cast<NodeId>(rng.next_below(n));
    if (!std::binary_search(s.begin(), s.end(), v)) s.insert(std::lower_bound(s.begin(), s.end(), v), v);
  }
  return s;
}

}  // namespace

TEST_CASE("deterministic path cascade", "[diffusion]") {
  const Graph g = load_text("0 1\n1 2\n", true, ProbabilityModel::constant(1.0));
  const CascadeResult r = simulate_cascade(g, {0}, DelayDistribution::unit(), 42);
  REQUIRE(r.spread() == 3);
  REQUIRE(r.time_of(0) == 0);
  REQUIRE(r.time_of(1) == 1);
  REQUIRE(r.time_of(2) == 2);
  REQUIRE(r.finish_time == 2);
}

TEST_CASE("seeding everything ends at time zero", "[diffusion]") {
  const Graph g = load_text("0 1\n1 2\n2 3\n", true, ProbabilityModel::constant(0.7));
  const CascadeResult r = simulate_cascade(g, {0, 1, 2, 3}, DelayDistribution::unit(), 9);
  REQUIRE(r.spread() == 4);
  REQUIRE(r.finish_time == 0);
  for (auto t : r.activation_time) REQUIRE(t == 0);
}

TEST_CASE("figure1 seeds D,E finish in two steps", "[diffusion]") {
  const Graph g = figure1_graph();
  SeedSet seeds{figure1_node(g, 'D'), figure1_node(g, 'E')};
  std::sort(seeds.begin(), seeds.end());
  const CascadeResult r = simulate_cascade(g, seeds, DelayDistribution::unit(), 1);
  REQUIRE(r.spread() == 8);
  REQUIRE(r.finish_time == 2);
  REQUIRE(r.time_of(figure1_node(g, 'B')) == -1);
  REQUIRE(r.time_of(figure1_node(g, 'G')) == -1);
}

TEST_CASE("cascade input validation", "[diffusion]") {
  const Graph g = load_text("0 1\n", true, ProbabilityModel::constant(1.0));
  REQUIRE_THROWS_AS(simulate_cascade(g, {}, DelayDistribution::unit(), 0), std::invalid_argument);
  REQUIRE_THROWS_AS(simulate_cascade(g, {5}, DelayDistribution::unit(), 0), std::invalid_argument);
  REQUIRE_THROWS_AS(simulate_cascade(g, {1, 0}, DelayDistribution::unit(), 0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(simulate_cascade(g, {0, 0}, DelayDistribution::unit(), 0),
                    std::invalid_argument);
}

TEST_CASE("exact expectation on the half-probability path", "[diffusion]") {
  const Graph g = load_text("0 1\n1 2\n", true, ProbabilityModel::constant(0.5));
  const ExactExpectation e = exact_expectation(g, {0});
  REQUIRE_THAT(e.spread, Catch::Matchers::WithinAbs(1.75, 1e-12));
  REQUIRE_THAT(e.finish_time, Catch::Matchers::WithinAbs(0.75, 1e-12));
}

TEST_CASE("exact expectation degenerate probabilities", "[diffusion]") {
  const Graph zero = load_text("0 1\n1 2\n0 2\n", true, ProbabilityModel::constant(0.0));
  const ExactExpectation ez = exact_expectation(zero, {0, 1});
  REQUIRE(ez.spread == 2.0);
  REQUIRE(ez.finish_time == 0.0);

  const Graph one = load_text("0 1\n1 2\n3 0\n", true, ProbabilityModel::constant(1.0));
  const ExactExpectation eo = exact_expectation(one, {0});
  REQUIRE(eo.spread == 3.0);       // reachable set {0,1,2}
  REQUIRE(eo.finish_time == 2.0);  // eccentricity within the reachable set
}

TEST_CASE("exact expectation guards", "[diffusion]") {
  Rng rng(1);
  const Graph big = random_graph(rng, 10, 12, 0.5);
  REQUIRE_THROWS_AS(exact_expectation(big, {0}, DelayDistribution::geometric(0.5)),
                    std::invalid_argument);
  std::string text;
  for (int i = 0; i < 21; ++i) text += "0 " + std::to_string(i + 1) + '\n';
  const Graph too_big = load_text(text, true, ProbabilityModel::constant(0.5));
  REQUIRE_THROWS_AS(exact_expectation(too_big, {0}), std::invalid_argument);
}

TEST_CASE("monte carlo estimates are deterministic and thread-invariant", "[diffusion]") {
  Rng rng(7);
  const Graph g = random_graph(rng, 10, 12, 0.5);
  const SeedSet seeds = random_seeds(rng, g.node_count());
  const McEstimate a = estimate_objectives_mc(g, seeds, 5000, DelayDistribution::unit(), 11);
  const McEstimate b = estimate_objectives_mc(g, seeds, 5000, DelayDistribution::unit(), 11);
  const McEstimate c = estimate_objectives_mc(g, seeds, 5000, DelayDistribution::unit(), 11, 4);
  REQUIRE(a.mean_spread == b.mean_spread);
  REQUIRE(a.mean_finish_time == b.mean_finish_time);
  REQUIRE(a.mean_spread == c.mean_spread);
  REQUIRE(a.mean_finish_time == c.mean_finish_time);
  REQUIRE(a.std_spread == c.std_spread);
}

TEST_CASE("monte carlo on deterministic graphs has zero variance", "[diffusion]") {
  const Graph g = load_text("0 1\n1 2\n", true, ProbabilityModel::constant(1.0));
  const McEstimate est = estimate_objectives_mc(g, {0}, 64, DelayDistribution::unit(), 3);
  REQUIRE(est.mean_spread == 3.0);
  REQUIRE(est.mean_finish_time == 2.0);
  REQUIRE(est.std_spread == 0.0);

  const Graph lonely = Graph::build({}, 1, true, ProbabilityModel::constant(1.0),
                                    CostModel::unit(), {});
  const McEstimate iso = estimate_objectives_mc(lonely, {0}, 10, DelayDistribution::unit(), 5);
  REQUIRE(iso.mean_spread == 1.0);
  REQUIRE(iso.mean_finish_time == 0.0);
}

TEST_CASE("monte carlo agrees with the exact oracle", "[diffusion]") {
  Rng rng(123);
  int checked = 0;
  int outside = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const double p = std::array{0.3, 0.5, 1.0}[rng.next_below(3)];
    const Graph g = random_graph(rng, 10, 12, p);
    const SeedSet seeds = random_seeds(rng, g.node_count());
    const ExactExpectation exact = exact_expectation(g, seeds);
    const McEstimate mc =
        estimate_objectives_mc(g, seeds, 20000, DelayDistribution::unit(), derive_seed(9, trial));
    ++checked;
    const double se_s = mc.std_spread / std::sqrt(20000.0);
    const double se_t = mc.std_finish_time / std::sqrt(20000.0);
    const bool ok_s = se_s == 0.0 ? std::abs(mc.mean_spread - exact.spread) < 1e-9
                                  : std::abs(mc.mean_spread - exact.spread) <= 4.0 * se_s;
    const bool ok_t = se_t == 0.0 ? std::abs(mc.mean_finish_time - exact.finish_time) < 1e-9
                                  : std::abs(mc.mean_finish_time - exact.finish_time) <= 4.0 * se_t;
    if (!(ok_s && ok_t)) ++outside;
  }
  REQUIRE(checked == 30);
  REQUIRE(outside <= 1);
}

TEST_CASE("coupled monotonicity: adding a seed never reduces a realization", "[diffusion]") {
  Rng rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    const Graph g = random_graph(rng, 12, 24, 0.4);
    SeedSet s = random_seeds(rng, g.node_count());
    if (s.size() == g.node_count()) continue;
    NodeId extra;
    do {
      extra = static_cast<NodeId>(rng.next_below(g.node_count()));
    } while (std::binary_search(s.begin(), s.end(), extra));
    SeedSet bigger = s;
    bigger.insert(std::lower_bound(bigger.begin(), bigger.end(), extra), extra);

    const std::uint64_t sim_seed = rng.next_u64();
    const auto small = simulate_cascade(g, s, DelayDistribution::unit(), sim_seed);
    const auto large = simulate_cascade(g, bigger, DelayDistribution::unit(), sim_seed);
    REQUIRE(large.spread() >= small.spread());
  }
}

TEST_CASE("finish time is zero exactly when no non-seed activates", "[diffusion]") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const Graph g = random_graph(rng, 8, 10, 0.3);
    const SeedSet s = random_seeds(rng, g.node_count());
    const auto r = simulate_cascade(g, s, DelayDistribution::unit(), rng.next_u64());
    REQUIRE((r.finish_time == 0) == (r.spread() == s.size()));
  }
}

TEST_CASE("geometric delays are at least one per hop", "[diffusion]") {
  const Graph g = load_text("0 1\n", true, ProbabilityModel::constant(1.0));
  double total = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const auto r = simulate_cascade(g, {0}, DelayDistribution::geometric(0.5), derive_seed(4, i));
    REQUIRE(r.time_of(1) >= 1);
    total += static_cast<double>(r.finish_time);
  }
  REQUIRE_THAT(total / 2000.0, Catch::Matchers::WithinAbs(2.0, 0.15));  // mean of geometric(0.5)
  REQUIRE_THROWS_AS(DelayDistribution::geometric(0.0), ConfigError);
  REQUIRE_THROWS_AS(DelayDistribution::geometric(1.5), ConfigError);
}
