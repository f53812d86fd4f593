#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "evea/fixtures.hpp"
#include "evea/graph.hpp"

using namespace evea;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

Graph load_text(const std::string& text, bool directed,
                const ProbabilityModel& pm = ProbabilityModel::constant(1.0),
                const CostModel& cm = CostModel::unit()) {
  std::istringstream in(text);
  return load_edge_list_stream(in, "test", directed, pm, cm);
}

}  // namespace

TEST_CASE("single directed edge with unit costs", "[graph]") {
  const Graph g = load_text("0 1\n", true);
  REQUIRE(g.node_count() == 2);
  REQUIRE(g.arc_count() == 1);
  REQUIRE(g.arcs()[0].prob == 1.0);
  REQUIRE(g.cost(0) == 1.0);
  REQUIRE(g.cost(1) == 1.0);
}

TEST_CASE("weighted cascade assigns reciprocal in-degree", "[graph]") {
  const Graph g = load_text("0 1\n1 2\n2 0\n", true, ProbabilityModel::weighted_cascade());
  for (const Arc& a : g.arcs()) REQUIRE(a.prob == 1.0);  // every in-degree is 1

  const Graph h = load_text("0 2\n1 2\n3 2\n0 1\n", true, ProbabilityModel::weighted_cascade());
  for (NodeId v = 0; v < h.node_count(); ++v) {
    if (h.in_degree(v) == 0) continue;
    double sum = 0.0;
    for (auto id : h.in_arc_ids(v)) sum += h.arcs()[id].prob;
    REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("undirected input symmetrizes and counts neighbors once", "[graph]") {
  const Graph g = load_text("0 1\n1 2\n", false, ProbabilityModel::constant(0.5),
                            CostModel::degree());
  REQUIRE(g.arc_count() == 4);
  REQUIRE(g.cost(0) == 1.0);
  REQUIRE(g.cost(1) == 2.0);
  REQUIRE(g.cost(2) == 1.0);
}

TEST_CASE("degree cost sum matches arc count", "[graph]") {
  const std::string text = "0 1\n0 2\n1 2\n2 3\n3 0\n";
  const Graph directed = load_text(text, true, ProbabilityModel::constant(0.1), CostModel::degree());
  double sum = 0.0;
  for (double c : directed.costs()) sum += c;
  REQUIRE(sum == 2.0 * directed.arc_count());

  const Graph undirected =
      load_text(text, false, ProbabilityModel::constant(0.1), CostModel::degree());
  sum = 0.0;
  for (double c : undirected.costs()) sum += c;
  REQUIRE(sum == static_cast<double>(undirected.arc_count()));
}

TEST_CASE("ids remap densely in first-appearance order", "[graph]") {
  const Graph g = load_text("100 7\n7 42\n", true);
  REQUIRE(g.node_count() == 3);
  REQUIRE(g.original_id(0) == 100);
  REQUIRE(g.original_id(1) == 7);
  REQUIRE(g.original_id(2) == 42);
}

TEST_CASE("malformed input reports the line", "[graph]") {
  REQUIRE_THROWS_MATCHES(load_text("0 1\nnot an edge\n", true), DataError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(":2")));
  REQUIRE_THROWS_MATCHES(load_text("0 1 9\n", true), DataError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(":1")));
  REQUIRE_THROWS_AS(load_text("0 -1\n", true), DataError);
  REQUIRE_THROWS_AS(load_text("", true), DataError);
  REQUIRE_THROWS_AS(load_text("# only comments\n", true), DataError);
}

TEST_CASE("self loops drop with a counted warning, duplicates collapse", "[graph]") {
  const Graph g = load_text("0 0\n0 1\n0 1\n1 0\n", true);
  REQUIRE(g.node_count() == 2);
  REQUIRE(g.arc_count() == 2);
  REQUIRE(g.load_stats().self_loops_dropped == 1);
  REQUIRE(g.load_stats().duplicate_arcs_collapsed == 1);
}

TEST_CASE("degree reports in/out pairs and validates ids", "[graph]") {
  const Graph star = load_text("0 1\n0 2\n0 3\n", true);
  REQUIRE(degree(star, 0) == std::make_pair(NodeId{0}, NodeId{3}));
  REQUIRE(degree(star, 1) == std::make_pair(NodeId{1}, NodeId{0}));
  REQUIRE_THROWS_AS(degree(star, 4), std::out_of_range);

  const Graph single = induced_subgraph(star, 1, 7);
  REQUIRE(degree(single, 0) == std::make_pair(NodeId{0}, NodeId{0}));
}

TEST_CASE("figure1 fixture matches the designed degrees", "[graph]") {
  const Graph g = figure1_graph();
  REQUIRE(g.node_count() == 10);
  REQUIRE(g.arc_count() == 12);
  const auto total_degree = [&](char label) {
    const NodeId v = figure1_node(g, label);
    return g.in_degree(v) + g.out_degree(v);
  };
  REQUIRE(total_degree('A') == 2);
  REQUIRE(total_degree('B') == 3);
  REQUIRE(total_degree('D') == 2);
  REQUIRE(total_degree('E') == 2);
  REQUIRE(g.cost(figure1_node(g, 'B')) == 3.0);
}

TEST_CASE("induced subgraph identity, singleton and determinism", "[graph]") {
  const Graph g = load_text("0 1\n1 2\n2 3\n3 4\n4 0\n1 3\n", false,
                            ProbabilityModel::weighted_cascade(), CostModel::degree());
  SECTION("n = node_count reproduces the graph") {
    const Graph sub = induced_subgraph(g, g.node_count(), 99);
    REQUIRE(sub == g);
  }
  SECTION("n = 1 gives a single node without arcs") {
    const Graph sub = induced_subgraph(g, 1, 5);
    REQUIRE(sub.node_count() == 1);
    REQUIRE(sub.arc_count() == 0);
  }
  SECTION("same seed, same subgraph") {
    const Graph a = induced_subgraph(g, 3, 1234);
    const Graph b = induced_subgraph(g, 3, 1234);
    REQUIRE(a == b);
  }
  SECTION("n = 0 rejected") {
    REQUIRE_THROWS_AS(induced_subgraph(g, 0, 1), std::invalid_argument);
  }
}

TEST_CASE("json round-trip preserves the structure", "[graph]") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    std::string text;
    const int n = 3 + static_cast<int>(rng.next_below(8));
    const int m = 2 + static_cast<int>(rng.next_below(20));
    for (int e = 0; e < m; ++e) {
      const auto src = rng.next_below(n);
      const auto dst = rng.next_below(n);
      text += std::to_string(src) + ' ' + std::to_string(dst) + '\n';
    }
    const bool directed = rng.next_bernoulli(0.5);
    const auto pm = rng.next_bernoulli(0.5) ? ProbabilityModel::weighted_cascade()
                                            : ProbabilityModel::constant(rng.next_unit());
    Graph g;
    try {
      g = load_text(text, directed, pm, CostModel::degree());
    } catch (const DataError&) {
      continue;  // all lines happened to be self-loops
    }
    const Graph back = Graph::from_json(g.to_json());
    REQUIRE(back == g);
    REQUIRE(back.fingerprint() == g.fingerprint());
  }
}

TEST_CASE("graph file save/load round-trip", "[graph]") {
  const Graph g = figure1_graph();
  const auto path = fs::temp_directory_path() / "evea_graph_roundtrip.json";
  g.save(path.string());
  const Graph back = Graph::load(path.string());
  REQUIRE(back == g);
  fs::remove(path);
}

TEST_CASE("cost override file", "[graph]") {
  const auto edge_path = write_temp("evea_cost_edges.txt", "5 6\n6 7\n");
  SECTION("valid file maps original ids") {
    const auto cost_path = write_temp("evea_costs_ok.txt", "# costs\n5 1.5\n6 0\n7 2.25\n99 4\n");
    const Graph g = load_edge_list(edge_path.string(), true, ProbabilityModel::constant(1.0),
                                   CostModel::from_file(cost_path.string()));
    REQUIRE(g.cost(0) == 1.5);
    REQUIRE(g.cost(1) == 0.0);
    REQUIRE(g.cost(2) == 2.25);
  }
  SECTION("missing node rejected") {
    const auto cost_path = write_temp("evea_costs_missing.txt", "5 1\n6 1\n");
    REQUIRE_THROWS_AS(load_edge_list(edge_path.string(), true, ProbabilityModel::constant(1.0),
                                     CostModel::from_file(cost_path.string())),
                      DataError);
  }
  SECTION("negative cost rejected") {
    const auto cost_path = write_temp("evea_costs_neg.txt", "5 1\n6 -2\n7 1\n");
    REQUIRE_THROWS_AS(load_edge_list(edge_path.string(), true, ProbabilityModel::constant(1.0),
                                     CostModel::from_file(cost_path.string())),
                      DataError);
  }
}

TEST_CASE("facebook network matches published counts when present", "[graph]") {
  const fs::path path = fs::path("data") / "facebook_combined.txt";
  if (!fs::exists(path)) {
    SUCCEED("facebook_combined.txt not present; check skipped");
    return;
  }
  const Graph g = load_edge_list(path.string(), false, ProbabilityModel::weighted_cascade(),
                                 CostModel::degree());
  REQUIRE(g.node_count() == 4039);
  REQUIRE(g.arc_count() == 176468);  // 88234 undirected edges
}
