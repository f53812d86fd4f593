#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "evea/errors.hpp"
#include "evea/graph.hpp"
#include "evea/rng.hpp"

namespace evea {

struct WalkConfig {
  std::uint32_t walks_per_node = 10;
  std::uint32_t walk_length = 80;
  std::uint32_t window = 5;
  std::uint32_t negatives = 5;
  std::uint32_t dims = 64;
  std::uint32_t epochs = 3;
  double learning_rate = 0.025;
  std::uint64_t rng_seed = 0;
  // Second-order walk bias; p = q = 1 is an unbiased (DeepWalk-style) walk.
  double return_param_p = 1.0;
  double inout_param_q = 1.0;

  void validate() const {
    if (walks_per_node < 1 || walk_length < 1 || window < 1 || negatives < 1 || dims < 1)
      throw ConfigError("embedding counts must be >= 1");
    if (window >= walk_length) throw ConfigError("embedding window must be < walk_length");
    if (!(learning_rate > 0.0)) throw ConfigError("embedding learning_rate must be > 0");
    if (!(return_param_p > 0.0) || !(inout_param_q > 0.0))
      throw ConfigError("embedding p/q must be > 0");
  }
};

// Per-node embedding vectors of uniform dimension.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(NodeId nodes, std::uint32_t dims, std::uint64_t trained_on = 0)
      : nodes_(nodes), dims_(dims), trained_on_(trained_on), data_(std::size_t{nodes} * dims, 0.0) {}

  NodeId node_count() const { return nodes_; }
  std::uint32_t dims() const { return dims_; }
  std::uint64_t trained_on() const { return trained_on_; }
  void set_trained_on(std::uint64_t fp) { trained_on_ = fp; }

  std::span<double> vector(NodeId v) { return {data_.data() + std::size_t{v} * dims_, dims_}; }
  std::span<const double> vector(NodeId v) const {
    if (v >= nodes_) throw std::out_of_range("embedding: node id out of range");
    return {data_.data() + std::size_t{v} * dims_, dims_};
  }

  bool covers(const Graph& g) const { return nodes_ == g.node_count() && dims_ >= 1; }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
  }

 private:
  NodeId nodes_ = 0;
  std::uint32_t dims_ = 0;
  std::uint64_t trained_on_ = 0;
  std::vector<double> data_;
};

inline double euclidean_distance(const EmbeddingTable& t, NodeId u, NodeId v) {
  const auto a = t.vector(u);
  const auto b = t.vector(v);
  double acc = 0.0;
  for (std::uint32_t d = 0; d < t.dims(); ++d) {
    const double diff = a[d] - b[d];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

struct WalkCorpus {
  NodeId node_count = 0;
  std::uint64_t graph_fingerprint = 0;
  std::vector<std::vector<NodeId>> walks;

  std::uint64_t content_hash() const {
    std::uint64_t h = mix64(node_count);
    for (const auto& w : walks) {
      h = hash_at(h, w.size());
      for (NodeId v : w) h = hash_at(h, v);
    }
    return h;
  }
};

// walks_per_node random walks of walk_length from every node, following
// out-arcs; a walk ends early at a sink. Each walk has its own derived
// sub-seed, so the corpus is a pure function of (graph, config).
inline WalkCorpus generate_walks(const Graph& g, const WalkConfig& cfg) {
  cfg.validate();
  if (g.node_count() == 0) throw std::invalid_argument("generate_walks: empty graph");

  const bool biased = cfg.return_param_p != 1.0 || cfg.inout_param_q != 1.0;
  auto has_arc = [&](NodeId from, NodeId to) {
    const auto arcs = g.out_arcs(from);
    const auto it = std::lower_bound(arcs.begin(), arcs.end(), to,
                                     [](const Arc& a, NodeId v) { return a.dst < v; });
    return it != arcs.end() && it->dst == to;
  };

  WalkCorpus corpus;
  corpus.node_count = g.node_count();
  corpus.graph_fingerprint = g.fingerprint();
  corpus.walks.reserve(std::size_t{g.node_count()} * cfg.walks_per_node);

  std::vector<double> weights;
  for (NodeId start = 0; start < g.node_count(); ++start) {
    for (std::uint32_t w = 0; w < cfg.walks_per_node; ++w) {
      Rng rng(derive_seed(derive_seed(cfg.rng_seed, start), w));
      std::vector<NodeId> walk{start};
      walk.reserve(cfg.walk_length);
      while (walk.size() < cfg.walk_length) {
        const NodeId cur = walk.back();
        const auto arcs = g.out_arcs(cur);
        if (arcs.empty()) break;
        if (!biased || walk.size() < 2) {
          walk.push_back(arcs[rng.next_below(arcs.size())].dst);
        } else {
          const NodeId prev = walk[walk.size() - 2];
          weights.clear();
          double total = 0.0;
          for (const Arc& a : arcs) {
            double wgt;
            if (a.dst == prev)
              wgt = 1.0 / cfg.return_param_p;
            else if (has_arc(prev, a.dst))
              wgt = 1.0;
            else
              wgt = 1.0 / cfg.inout_param_q;
            total += wgt;
            weights.push_back(total);
          }
          const double r = rng.next_unit() * total;
          const auto it = std::upper_bound(weights.begin(), weights.end(), r);
          const auto idx = std::min<std::size_t>(it - weights.begin(), arcs.size() - 1);
          walk.push_back(arcs[idx].dst);
        }
      }
      corpus.walks.push_back(std::move(walk));
    }
  }
  return corpus;
}

// Skip-gram with negative sampling over the walk corpus. Single-threaded
// and fully deterministic; returns the input vectors. With epochs == 0 the
// initialization vectors (uniform in [-0.5/dims, 0.5/dims]) are returned.
inline EmbeddingTable train_sgns(const WalkCorpus& corpus, const WalkConfig& cfg) {
  cfg.validate();
  if (corpus.walks.empty()) throw std::invalid_argument("train_sgns: empty corpus");
  const NodeId n = corpus.node_count;

  std::vector<std::uint64_t> counts(n, 0);
  for (const auto& walk : corpus.walks)
    for (NodeId v : walk) ++counts[v];
  for (NodeId v = 0; v < n; ++v)
    if (counts[v] == 0)
      throw std::invalid_argument("train_sgns: node absent from corpus: " + std::to_string(v));

  EmbeddingTable table(n, cfg.dims, corpus.graph_fingerprint);
  Rng init_rng(derive_seed(cfg.rng_seed, 0x1217));
  for (NodeId v = 0; v < n; ++v)
    for (double& x : table.vector(v)) x = (init_rng.next_unit() - 0.5) / cfg.dims;
  if (cfg.epochs == 0) return table;

  // Unigram^0.75 negative-sampling table (cumulative weights).
  std::vector<double> cumulative(n);
  double total_weight = 0.0;
  for (NodeId v = 0; v < n; ++v) {
    total_weight += std::pow(static_cast<double>(counts[v]), 0.75);
    cumulative[v] = total_weight;
  }
  auto draw_negative = [&](Rng& rng) {
    const double r = rng.next_unit() * total_weight;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    return static_cast<NodeId>(std::min<std::size_t>(it - cumulative.begin(), n - 1));
  };

  std::uint64_t total_pairs = 0;
  for (const auto& walk : corpus.walks) {
    const std::int64_t len = static_cast<std::int64_t>(walk.size());
    for (std::int64_t c = 0; c < len; ++c) {
      const std::int64_t lo = std::max<std::int64_t>(0, c - cfg.window);
      const std::int64_t hi = std::min<std::int64_t>(len - 1, c + cfg.window);
      total_pairs += static_cast<std::uint64_t>(hi - lo);
    }
  }
  const std::uint64_t total_updates = total_pairs * cfg.epochs;
  if (total_updates == 0) return table;

  std::vector<double> output(std::size_t{n} * cfg.dims, 0.0);
  std::vector<double> grad_in(cfg.dims);
  auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };

  Rng rng(derive_seed(cfg.rng_seed, 0x5675));
  std::uint64_t processed = 0;
  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& walk : corpus.walks) {
      const std::int64_t len = static_cast<std::int64_t>(walk.size());
      for (std::int64_t c = 0; c < len; ++c) {
        const NodeId center = walk[c];
        const std::int64_t lo = std::max<std::int64_t>(0, c - cfg.window);
        const std::int64_t hi = std::min<std::int64_t>(len - 1, c + cfg.window);
        for (std::int64_t k = lo; k <= hi; ++k) {
          if (k == c) continue;
          const NodeId context = walk[k];
          const double lr =
              cfg.learning_rate *
              std::max(1.0 - static_cast<double>(processed) / total_updates, 1e-4);
          ++processed;

          auto in = table.vector(center);
          std::fill(grad_in.begin(), grad_in.end(), 0.0);
          for (std::uint32_t t = 0; t <= cfg.negatives; ++t) {
            NodeId target;
            double label;
            if (t == 0) {
              target = context;
              label = 1.0;
            } else {
              target = draw_negative(rng);
              if (target == context) continue;
              label = 0.0;
            }
            double* out = output.data() + std::size_t{target} * cfg.dims;
            double dot = 0.0;
            for (std::uint32_t d = 0; d < cfg.dims; ++d) dot += in[d] * out[d];
            const double err = sigmoid(dot) - label;
            for (std::uint32_t d = 0; d < cfg.dims; ++d) {
              grad_in[d] += err * out[d];
              out[d] -= lr * err * in[d];
            }
          }
          for (std::uint32_t d = 0; d < cfg.dims; ++d) in[d] -= lr * grad_in[d];
        }
      }
    }
  }
  return table;
}

// word2vec text format: header "n dims", then "node_id v1 ... vdims" per
// line. Values use shortest round-trip formatting (lossless reload).
inline void save_embeddings(const EmbeddingTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << t.node_count() << ' ' << t.dims() << '\n';
  char buf[64];
  for (NodeId v = 0; v < t.node_count(); ++v) {
    out << v;
    for (double x : t.vector(v)) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
      out << ' ';
      out.write(buf, end - buf);
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

inline EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty embedding file");
  std::istringstream header(line);
  std::uint64_t n, dims;
  if (!(header >> n >> dims) || n == 0 || dims == 0)
    throw DataError(path + ":1: expected header 'n dims'");

  EmbeddingTable t(static_cast<NodeId>(n), static_cast<std::uint32_t>(dims));
  std::vector<char> seen(n, 0);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::uint64_t id;
    if (!(ss >> id)) throw DataError(path + ":" + std::to_string(lineno) + ": malformed line");
    if (id >= n)
      throw DataError(path + ":" + std::to_string(lineno) + ": node id exceeds header count");
    if (seen[id]) throw DataError(path + ":" + std::to_string(lineno) + ": duplicate node");
    seen[id] = 1;
    auto vec = t.vector(static_cast<NodeId>(id));
    for (std::uint64_t d = 0; d < dims; ++d) {
      double x;
      if (!(ss >> x))
        throw DataError(path + ":" + std::to_string(lineno) + ": dimension mismatch (expected " +
                        std::to_string(dims) + " values)");
      vec[d] = x;
    }
    double extra;
    if (ss >> extra)
      throw DataError(path + ":" + std::to_string(lineno) + ": dimension mismatch (extra values)");
  }
  for (std::uint64_t v = 0; v < n; ++v)
    if (!seen[v]) throw DataError(path + ": missing vector for node " + std::to_string(v));
  return t;
}

// Trains embeddings for a graph end to end.
inline EmbeddingTable train_embeddings(const Graph& g, const WalkConfig& cfg) {
  return train_sgns(generate_walks(g, cfg), cfg);
}

}  // namespace evea
