#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "evea/embedding.hpp"
#include "evea/fixtures.hpp"
#include "evea/graph.hpp"

using namespace evea;
namespace fs = std::filesystem;

namespace {

Graph load_text(const std::string& text, bool directed = true) {
  std::istringstream in(text);
  return load_edge_list_stream(in, "test", directed, ProbabilityModel::constant(1.0),
                               CostModel::unit());
}

WalkConfig tiny_config(std::uint64_t seed) {
  WalkConfig cfg;
  cfg.dims = 8;
  cfg.walks_per_node = 6;
  cfg.walk_length = 12;
  cfg.window = 3;
  cfg.negatives = 3;
  cfg.epochs = 2;
  cfg.rng_seed = seed;
  return cfg;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb) + 1e-300);
}

// Two disconnected 6-cliques (undirected), nodes 0-5 and 6-11.
Graph two_cliques() {
  std::string text;
  for (int base : {0, 6})
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j)
        text += std::to_string(base + i) + ' ' + std::to_string(base + j) + '\n';
  return load_text(text, false);
}

}  // namespace

TEST_CASE("walks stop at sinks and cycle deterministically", "[embedding]") {
  WalkConfig cfg = tiny_config(1);
  cfg.walks_per_node = 2;
  cfg.walk_length = 4;
  cfg.window = 2;

  const Graph lonely = Graph::build({}, 1, true, ProbabilityModel::constant(1.0),
                                    CostModel::unit(), {});
  for (const auto& walk : generate_walks(lonely, cfg).walks) {
    REQUIRE(walk.size() == 1);
    REQUIRE(walk[0] == 0);
  }

  const Graph cycle = load_text("0 1\n1 0\n");
  const WalkCorpus corpus = generate_walks(cycle, cfg);
  for (const auto& walk : corpus.walks) {
    REQUIRE(walk.size() == 4);
    for (std::size_t i = 1; i < walk.size(); ++i) REQUIRE(walk[i] == 1 - walk[i - 1]);
  }

  const Graph sink = load_text("0 1\n");
  for (const auto& walk : generate_walks(sink, cfg).walks) {
    if (walk[0] == 1) {
      REQUIRE(walk.size() == 1);  // no out-arcs
    } else {
      REQUIRE(walk.size() == 2);
      REQUIRE(walk[1] == 1);
    }
  }
}

TEST_CASE("corpus and training are deterministic", "[embedding]") {
  const Graph g = figure1_graph();
  const WalkConfig cfg = tiny_config(77);
  const WalkCorpus c1 = generate_walks(g, cfg);
  const WalkCorpus c2 = generate_walks(g, cfg);
  REQUIRE(c1.content_hash() == c2.content_hash());

  const EmbeddingTable t1 = train_sgns(c1, cfg);
  const EmbeddingTable t2 = train_sgns(c2, cfg);
  REQUIRE(t1.node_count() == t2.node_count());
  for (NodeId v = 0; v < t1.node_count(); ++v) {
    const auto a = t1.vector(v);
    const auto b = t2.vector(v);
    for (std::uint32_t d = 0; d < t1.dims(); ++d) REQUIRE(a[d] == b[d]);
  }
  REQUIRE(t1.trained_on() == g.fingerprint());
  REQUIRE(t1.all_finite());
}

TEST_CASE("epochs zero returns the initialization", "[embedding]") {
  const Graph g = figure1_graph();
  WalkConfig cfg = tiny_config(3);
  cfg.epochs = 0;
  const EmbeddingTable t = train_sgns(generate_walks(g, cfg), cfg);
  const double bound = 0.5 / cfg.dims;
  for (NodeId v = 0; v < t.node_count(); ++v)
    for (double x : t.vector(v)) {
      REQUIRE(x >= -bound);
      REQUIRE(x < bound);
    }
}

TEST_CASE("single-node graph trains to finite vectors", "[embedding]") {
  const Graph g = Graph::build({}, 1, true, ProbabilityModel::constant(1.0), CostModel::unit(), {});
  const WalkConfig cfg = tiny_config(4);
  const EmbeddingTable t = train_embeddings(g, cfg);
  REQUIRE(t.node_count() == 1);
  REQUIRE(t.all_finite());
}

TEST_CASE("missing corpus coverage is an error naming the node", "[embedding]") {
  WalkCorpus corpus;
  corpus.node_count = 3;
  corpus.walks = {{0, 1, 0}, {1, 0, 1}};
  REQUIRE_THROWS_MATCHES(train_sgns(corpus, tiny_config(1)), std::invalid_argument,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("2")));
}

TEST_CASE("disconnected cliques separate in embedding space", "[embedding]") {
  const Graph g = two_cliques();
  double intra_total = 0.0;
  double inter_total = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const EmbeddingTable t = train_embeddings(g, tiny_config(seed));
    REQUIRE(t.all_finite());
    double intra = 0.0, inter = 0.0;
    int n_intra = 0, n_inter = 0;
    for (NodeId u = 0; u < 12; ++u)
      for (NodeId v = u + 1; v < 12; ++v) {
        const double c = cosine(t.vector(u), t.vector(v));
        if ((u < 6) == (v < 6)) {
          intra += c;
          ++n_intra;
        } else {
          inter += c;
          ++n_inter;
        }
      }
    intra_total += intra / n_intra;
    inter_total += inter / n_inter;
  }
  REQUIRE(intra_total / 10.0 > inter_total / 10.0);
}

TEST_CASE("euclidean distance basics", "[embedding]") {
  EmbeddingTable t(3, 2);
  t.vector(1)[0] = 3.0;
  t.vector(1)[1] = 4.0;
  REQUIRE(euclidean_distance(t, 0, 0) == 0.0);
  REQUIRE(euclidean_distance(t, 0, 1) == 5.0);

  Rng rng(6);
  EmbeddingTable r(5, 4);
  for (NodeId v = 0; v < 5; ++v)
    for (double& x : r.vector(v)) x = rng.next_unit() - 0.5;
  for (NodeId u = 0; u < 5; ++u)
    for (NodeId v = 0; v < 5; ++v)
      REQUIRE(euclidean_distance(r, u, v) == euclidean_distance(r, v, u));
  REQUIRE_THROWS_AS(euclidean_distance(r, 0, 9), std::out_of_range);
}

TEST_CASE("save/load round-trip is lossless", "[embedding]") {
  const Graph g = figure1_graph();
  const EmbeddingTable t = train_embeddings(g, tiny_config(11));
  const auto path = fs::temp_directory_path() / "evea_embed_roundtrip.txt";
  save_embeddings(t, path.string());
  const EmbeddingTable back = load_embeddings(path.string());
  REQUIRE(back.node_count() == t.node_count());
  REQUIRE(back.dims() == t.dims());
  for (NodeId v = 0; v < t.node_count(); ++v)
    for (std::uint32_t d = 0; d < t.dims(); ++d)
      REQUIRE_THAT(back.vector(v)[d], Catch::Matchers::WithinAbs(t.vector(v)[d], 1e-9));
  REQUIRE(back.trained_on() == 0);  // external provenance unknown
  REQUIRE(back.covers(g));
  fs::remove(path);
}

TEST_CASE("embedding file validation", "[embedding]") {
  const auto path = fs::temp_directory_path() / "evea_embed_bad.txt";
  auto write = [&](const std::string& content) {
    std::ofstream out(path);
    out << content;
  };

  write("2 2\n0 0.5 0.5\n");
  REQUIRE_THROWS_AS(load_embeddings(path.string()), DataError);  // missing node 1
  write("2 2\n0 0.5 0.5\n1 0.5\n");
  REQUIRE_THROWS_AS(load_embeddings(path.string()), DataError);  // dimension mismatch
  write("2 2\n0 0.5 0.5 0.5\n1 0.5 0.5\n");
  REQUIRE_THROWS_AS(load_embeddings(path.string()), DataError);  // extra value
  write("2 2\n0 0.5 0.5\n0 0.5 0.5\n");
  REQUIRE_THROWS_AS(load_embeddings(path.string()), DataError);  // duplicate
  write("2 2\nx 0.5 0.5\n1 0.5 0.5\n");
  REQUIRE_THROWS_AS(load_embeddings(path.string()), DataError);  // malformed
  write("");
  REQUIRE_THROWS_AS(load_embeddings(path.string()), DataError);  // empty
  fs::remove(path);
}

TEST_CASE("externally produced embedding files import cleanly", "[embedding]") {
  // Word2vec-style text written by another tool: ids unordered, plain floats.
  const Graph g = figure1_graph();
  const auto path = fs::temp_directory_path() / "evea_embed_external.txt";
  {
    std::ofstream out(path);
    out << "10 3\n";
    for (int v = 9; v >= 0; --v)
      out << v << ' ' << 0.1 * v << " -0.25 " << 1.5 + v << '\n';
  }
  const EmbeddingTable t = load_embeddings(path.string());
  REQUIRE(t.covers(g));
  REQUIRE(t.vector(9)[0] == 0.9);
  REQUIRE(t.vector(0)[2] == 1.5);
  fs::remove(path);
}

TEST_CASE("second-order walk bias steers returns", "[embedding]") {
  // 0 <-> 1 <-> 2: from a 0->1 step, a tiny return parameter pulls the walk
  // back to 0, a huge one pushes it on to 2.
  const Graph g = load_text("0 1\n1 0\n1 2\n2 1\n");
  WalkConfig cfg = tiny_config(9);
  cfg.walks_per_node = 200;
  cfg.walk_length = 3;
  cfg.window = 2;

  cfg.return_param_p = 1e-6;
  int returns = 0, advances = 0;
  for (const auto& walk : generate_walks(g, cfg).walks) {
    if (walk[0] != 0 || walk.size() < 3) continue;
    (walk[2] == 0 ? returns : advances)++;
  }
  REQUIRE(returns > 190);

  cfg.return_param_p = 1e6;
  returns = advances = 0;
  for (const auto& walk : generate_walks(g, cfg).walks) {
    if (walk[0] != 0 || walk.size() < 3) continue;
    (walk[2] == 0 ? returns : advances)++;
  }
  REQUIRE(advances > 190);
}
