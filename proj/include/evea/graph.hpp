#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <deque>
#include <fstream>
#include <istream>
#include <sstream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "evea/errors.hpp"
#include "evea/rng.hpp"

namespace evea {

using NodeId = std::uint32_t;

// Directed arc with its propagation probability.
struct Arc {
  NodeId src = 0;
  NodeId dst = 0;
  double prob = 0.0;

  friend bool operator==(const Arc&, const Arc&) = default;
};

struct CostModel {
  enum class Kind { degree, unit, file };
  Kind kind = Kind::degree;
  std::string path;  // only for Kind::file

  static CostModel degree() { return {Kind::degree, {}}; }
  static CostModel unit() { return {Kind::unit, {}}; }
  static CostModel from_file(std::string p) { return {Kind::file, std::move(p)}; }

  friend bool operator==(const CostModel&, const CostModel&) = default;
};

struct ProbabilityModel {
  enum class Kind { constant, weighted_cascade };
  Kind kind = Kind::weighted_cascade;
  double p = 0.1;  // only for Kind::constant

  static ProbabilityModel constant(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("constant probability must be in [0,1]");
    return {Kind::constant, p};
  }
  static ProbabilityModel weighted_cascade() { return {Kind::weighted_cascade, 0.0}; }

  friend bool operator==(const ProbabilityModel&, const ProbabilityModel&) = default;
};

struct LoadStats {
  std::size_t self_loops_dropped = 0;
  std::size_t duplicate_arcs_collapsed = 0;
  std::size_t edge_lines = 0;
};

// Immutable directed graph with per-arc probabilities and per-node costs.
// Node ids are dense in [0, node_count); arcs are sorted by (src, dst) and
// unique, so the out-adjacency of v is the contiguous slice
// arcs[out_offsets[v], out_offsets[v+1]). Safe for concurrent reads.
class Graph {
 public:
  Graph() = default;

  // `endpoints` may be in any order and contain duplicates/self-loops; they
  // are cleaned here so every construction path shares the same rules.
  static Graph build(std::vector<std::pair<NodeId, NodeId>> endpoints,
                     NodeId node_count, bool directed,
                     const ProbabilityModel& prob_model, const CostModel& cost_model,
                     std::vector<std::int64_t> original_ids,
                     const std::vector<double>* explicit_costs = nullptr,
                     LoadStats stats = {}) {
    Graph g;
    g.directed_ = directed;
    g.node_count_ = node_count;
    g.prob_model_ = prob_model;
    g.cost_model_ = cost_model;
    g.original_ids_ = std::move(original_ids);
    if (g.original_ids_.empty()) {
      g.original_ids_.resize(node_count);
      for (NodeId v = 0; v < node_count; ++v) g.original_ids_[v] = v;
    }
    g.stats_ = stats;

    std::vector<std::pair<NodeId, NodeId>> pairs;
    pairs.reserve(directed ? endpoints.size() : 2 * endpoints.size());
    for (auto [a, b] : endpoints) {
      if (a >= node_count || b >= node_count)
        throw DataError("arc endpoint out of range");
      if (a == b) {
        ++g.stats_.self_loops_dropped;
        continue;
      }
      pairs.emplace_back(a, b);
      if (!directed) pairs.emplace_back(b, a);
    }
    std::sort(pairs.begin(), pairs.end());
    const auto before = pairs.size();
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    g.stats_.duplicate_arcs_collapsed += before - pairs.size();

    if (pairs.empty() && node_count == 0) throw DataError("empty graph: no nodes or edges");

    g.arcs_.reserve(pairs.size());
    for (auto [s, d] : pairs) g.arcs_.push_back(Arc{s, d, 0.0});
    g.build_adjacency();
    g.assign_probabilities();
    g.assign_costs(explicit_costs);
    return g;
  }

  NodeId node_count() const { return node_count_; }
  std::size_t arc_count() const { return arcs_.size(); }
  bool directed() const { return directed_; }
  std::span<const Arc> arcs() const { return arcs_; }
  const LoadStats& load_stats() const { return stats_; }
  const ProbabilityModel& prob_model() const { return prob_model_; }
  const CostModel& cost_model() const { return cost_model_; }

  std::span<const Arc> out_arcs(NodeId v) const {
    check_node(v);
    return {arcs_.data() + out_offsets_[v], arcs_.data() + out_offsets_[v + 1]};
  }

  // Indices into arcs() whose dst == v.
  std::span<const std::uint32_t> in_arc_ids(NodeId v) const {
    check_node(v);
    return {in_arc_ids_.data() + in_offsets_[v], in_arc_ids_.data() + in_offsets_[v + 1]};
  }

  NodeId out_degree(NodeId v) const {
    check_node(v);
    return static_cast<NodeId>(out_offsets_[v + 1] - out_offsets_[v]);
  }
  NodeId in_degree(NodeId v) const {
    check_node(v);
    return static_cast<NodeId>(in_offsets_[v + 1] - in_offsets_[v]);
  }

  double cost(NodeId v) const {
    check_node(v);
    return costs_[v];
  }
  std::span<const double> costs() const { return costs_; }

  std::int64_t original_id(NodeId v) const {
    check_node(v);
    return original_ids_[v];
  }
  std::span<const std::int64_t> original_ids() const { return original_ids_; }

  // Structural hash; binds embeddings and run manifests to the graph.
  std::uint64_t fingerprint() const {
    std::uint64_t h = mix64(node_count_ ^ (directed_ ? kGolden : 0));
    for (const Arc& a : arcs_) {
      h = hash_at(h, (static_cast<std::uint64_t>(a.src) << 32) | a.dst);
      h = hash_at(h, std::bit_cast<std::uint64_t>(a.prob));
    }
    for (double c : costs_) h = hash_at(h, std::bit_cast<std::uint64_t>(c));
    return h;
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.node_count_ == b.node_count_ && a.directed_ == b.directed_ &&
           a.arcs_ == b.arcs_ && a.costs_ == b.costs_ &&
           a.original_ids_ == b.original_ids_ && a.prob_model_ == b.prob_model_ &&
           a.cost_model_ == b.cost_model_;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format"] = "evea.graph";
    j["version"] = 1;
    j["directed"] = directed_;
    j["node_count"] = node_count_;
    j["prob_model"] = {{"kind", prob_model_.kind == ProbabilityModel::Kind::constant
                                    ? "constant"
                                    : "weighted_cascade"},
                       {"p", prob_model_.p}};
    j["cost_model"] = {{"kind", cost_model_.kind == CostModel::Kind::degree ? "degree"
                                : cost_model_.kind == CostModel::Kind::unit ? "unit"
                                                                            : "file"},
                       {"path", cost_model_.path}};
    j["original_ids"] = original_ids_;
    auto arcs = nlohmann::json::array();
    for (const Arc& a : arcs_) arcs.push_back({a.src, a.dst, a.prob});
    j["arcs"] = std::move(arcs);
    j["costs"] = costs_;
    return j;
  }

  static Graph from_json(const nlohmann::json& j) {
    try {
      if (j.at("format") != "evea.graph" || j.at("version") != 1)
        throw DataError("unsupported graph format/version");
      Graph g;
      g.directed_ = j.at("directed").get<bool>();
      g.node_count_ = j.at("node_count").get<NodeId>();
      const auto& pm = j.at("prob_model");
      g.prob_model_.kind = pm.at("kind") == "constant" ? ProbabilityModel::Kind::constant
                                                       : ProbabilityModel::Kind::weighted_cascade;
      g.prob_model_.p = pm.at("p").get<double>();
      const auto& cm = j.at("cost_model");
      g.cost_model_.kind = cm.at("kind") == "degree" ? CostModel::Kind::degree
                           : cm.at("kind") == "unit" ? CostModel::Kind::unit
                                                     : CostModel::Kind::file;
      g.cost_model_.path = cm.at("path").get<std::string>();
      g.original_ids_ = j.at("original_ids").get<std::vector<std::int64_t>>();
      for (const auto& e : j.at("arcs"))
        g.arcs_.push_back(Arc{e.at(0).get<NodeId>(), e.at(1).get<NodeId>(), e.at(2).get<double>()});
      g.costs_ = j.at("costs").get<std::vector<double>>();
      g.validate_loaded();
      g.build_adjacency();
      return g;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("malformed graph json: ") + e.what());
    }
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << to_json().dump(1) << '\n';
  }

  static Graph load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ": " + e.what());
    }
    return from_json(j);
  }

 private:
  void check_node(NodeId v) const {
    if (v >= node_count_) throw std::out_of_range("node id out of range: " + std::to_string(v));
  }

  void build_adjacency() {
    out_offsets_.assign(node_count_ + 1, 0);
    in_offsets_.assign(node_count_ + 1, 0);
    for (const Arc& a : arcs_) {
      ++out_offsets_[a.src + 1];
      ++in_offsets_[a.dst + 1];
    }
    for (NodeId v = 0; v < node_count_; ++v) {
      out_offsets_[v + 1] += out_offsets_[v];
      in_offsets_[v + 1] += in_offsets_[v];
    }
    in_arc_ids_.resize(arcs_.size());
    std::vector<std::uint32_t> cursor(in_offsets_.begin(), in_offsets_.end() - 1);
    for (std::uint32_t i = 0; i < arcs_.size(); ++i)
      in_arc_ids_[cursor[arcs_[i].dst]++] = i;
  }

  void assign_probabilities() {
    if (prob_model_.kind == ProbabilityModel::Kind::constant) {
      for (Arc& a : arcs_) a.prob = prob_model_.p;
    } else {
      for (Arc& a : arcs_) a.prob = 1.0 / static_cast<double>(in_degree(a.dst));
    }
  }

  void assign_costs(const std::vector<double>* explicit_costs) {
    costs_.assign(node_count_, 0.0);
    switch (cost_model_.kind) {
      case CostModel::Kind::unit:
        std::fill(costs_.begin(), costs_.end(), 1.0);
        break;
      case CostModel::Kind::degree:
        // Undirected inputs count each neighbor once; after symmetrization
        // out-degree equals the neighbor count.
        for (NodeId v = 0; v < node_count_; ++v)
          costs_[v] = directed_ ? static_cast<double>(in_degree(v)) + out_degree(v)
                                : static_cast<double>(out_degree(v));
        break;
      case CostModel::Kind::file: {
        if (explicit_costs == nullptr)
          throw DataError("cost model 'file' requires a cost table");
        if (explicit_costs->size() != node_count_)
          throw DataError("cost table does not cover every node");
        costs_ = *explicit_costs;
        for (double c : costs_)
          if (!(c >= 0.0)) throw DataError("negative or non-finite node cost");
        break;
      }
    }
  }

  void validate_loaded() const {
    if (original_ids_.size() != node_count_ || costs_.size() != node_count_)
      throw DataError("graph json: per-node array size mismatch");
    for (std::size_t i = 0; i + 1 < arcs_.size(); ++i) {
      const auto a = std::make_pair(arcs_[i].src, arcs_[i].dst);
      const auto b = std::make_pair(arcs_[i + 1].src, arcs_[i + 1].dst);
      if (!(a < b)) throw DataError("graph json: arcs not sorted/unique");
    }
    for (const Arc& a : arcs_) {
      if (a.src >= node_count_ || a.dst >= node_count_ || a.src == a.dst)
        throw DataError("graph json: invalid arc");
      if (!(a.prob >= 0.0 && a.prob <= 1.0)) throw DataError("graph json: probability outside [0,1]");
    }
    for (double c : costs_)
      if (!(c >= 0.0)) throw DataError("graph json: negative cost");
  }

  NodeId node_count_ = 0;
  bool directed_ = true;
  std::vector<Arc> arcs_;
  std::vector<std::uint32_t> out_offsets_{0};
  std::vector<std::uint32_t> in_offsets_{0};
  std::vector<std::uint32_t> in_arc_ids_;
  std::vector<double> costs_;
  std::vector<std::int64_t> original_ids_;
  ProbabilityModel prob_model_;
  CostModel cost_model_;
  LoadStats stats_;
};

// (in-degree, out-degree) of v; throws std::out_of_range on a bad id.
inline std::pair<NodeId, NodeId> degree(const Graph& g, NodeId v) {
  return {g.in_degree(v), g.out_degree(v)};
}

namespace detail {

// Cost override file: "original_node_id cost" per line, '#' comments.
inline std::vector<double> read_cost_file(const std::string& path,
                                          const std::unordered_map<std::int64_t, NodeId>& remap,
                                          NodeId node_count) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open cost file: " + path);
  std::vector<double> costs(node_count, -1.0);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::int64_t id;
    double c;
    if (!(ss >> id >> c))
      throw DataError(path + ":" + std::to_string(lineno) + ": expected 'node_id cost'");
    std::string extra;
    if (ss >> extra)
      throw DataError(path + ":" + std::to_string(lineno) + ": trailing tokens");
    if (!(c >= 0.0))
      throw DataError(path + ":" + std::to_string(lineno) + ": cost must be >= 0");
    auto it = remap.find(id);
    if (it == remap.end()) continue;  // cost for a node absent from the edge list
    costs[it->second] = c;
  }
  for (NodeId v = 0; v < node_count; ++v)
    if (costs[v] < 0.0) throw DataError(path + ": no cost for node (dense id " + std::to_string(v) + ")");
  return costs;
}

}  // namespace detail

// SNAP-style edge list: whitespace-separated "src dst" pairs, '#' comments.
// Original ids are remapped to dense [0, n) in order of first appearance.
inline Graph load_edge_list_stream(std::istream& in, const std::string& name, bool directed,
                                   const ProbabilityModel& prob_model, const CostModel& cost_model) {
  std::unordered_map<std::int64_t, NodeId> remap;
  std::vector<std::int64_t> original_ids;
  std::vector<std::pair<NodeId, NodeId>> endpoints;
  LoadStats stats;

  auto intern = [&](std::int64_t id) {
    auto [it, inserted] = remap.try_emplace(id, static_cast<NodeId>(original_ids.size()));
    if (inserted) original_ids.push_back(id);
    return it->second;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ss(line);
    std::int64_t a, b;
    if (!(ss >> a >> b))
      throw DataError(name + ":" + std::to_string(lineno) + ": expected 'src dst' integer pair");
    std::string extra;
    if (ss >> extra)
      throw DataError(name + ":" + std::to_string(lineno) + ": trailing tokens after edge");
    if (a < 0 || b < 0)
      throw DataError(name + ":" + std::to_string(lineno) + ": negative node id");
    ++stats.edge_lines;
    const NodeId src = intern(a);  // sequenced: interning order defines the id remap
    const NodeId dst = intern(b);
    endpoints.emplace_back(src, dst);
  }
  if (endpoints.empty()) throw DataError(name + ": empty graph (no edges)");

  const auto node_count = static_cast<NodeId>(original_ids.size());
  std::vector<double> file_costs;
  const std::vector<double>* costs_ptr = nullptr;
  if (cost_model.kind == CostModel::Kind::file) {
    file_costs = detail::read_cost_file(cost_model.path, remap, node_count);
    costs_ptr = &file_costs;
  }
  return Graph::build(std::move(endpoints), node_count, directed, prob_model, cost_model,
                      std::move(original_ids), costs_ptr, stats);
}

inline Graph load_edge_list(const std::string& path, bool directed,
                            const ProbabilityModel& prob_model, const CostModel& cost_model) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  return load_edge_list_stream(in, path, directed, prob_model, cost_model);
}

// BFS sample of n nodes (undirected view, random roots), induced arcs,
// dense remap; probabilities and costs recomputed under the source models.
// File costs carry over by node identity.
inline Graph induced_subgraph(const Graph& g, NodeId n, std::uint64_t rng_seed) {
  if (n == 0) throw std::invalid_argument("induced_subgraph: n must be >= 1");
  if (n > g.node_count()) throw std::invalid_argument("induced_subgraph: n exceeds node count");

  Rng rng(rng_seed);
  std::vector<char> selected(g.node_count(), 0);
  NodeId taken = 0;
  std::deque<NodeId> queue;
  auto take = [&](NodeId v) {
    selected[v] = 1;
    ++taken;
    queue.push_back(v);
  };

  while (taken < n) {
    if (queue.empty()) {
      std::vector<NodeId> unvisited;
      for (NodeId v = 0; v < g.node_count(); ++v)
        if (!selected[v]) unvisited.push_back(v);
      take(unvisited[rng.next_below(unvisited.size())]);
      if (taken == n) break;
    }
    const NodeId u = queue.front();
    queue.pop_front();
    for (const Arc& a : g.out_arcs(u)) {
      if (taken == n) break;
      if (!selected[a.dst]) take(a.dst);
    }
    for (std::uint32_t id : g.in_arc_ids(u)) {
      if (taken == n) break;
      const NodeId w = g.arcs()[id].src;
      if (!selected[w]) take(w);
    }
  }

  std::vector<NodeId> remap(g.node_count(), 0);
  std::vector<std::int64_t> original_ids;
  original_ids.reserve(n);
  NodeId next = 0;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (selected[v]) {
      remap[v] = next++;
      original_ids.push_back(g.original_id(v));
    }
  }

  std::vector<std::pair<NodeId, NodeId>> endpoints;
  for (const Arc& a : g.arcs())
    if (selected[a.src] && selected[a.dst]) endpoints.emplace_back(remap[a.src], remap[a.dst]);

  std::vector<double> file_costs;
  const std::vector<double>* costs_ptr = nullptr;
  if (g.cost_model().kind == CostModel::Kind::file) {
    file_costs.reserve(n);
    for (NodeId v = 0; v < g.node_count(); ++v)
      if (selected[v]) file_costs.push_back(g.cost(v));
    costs_ptr = &file_costs;
  }
  return Graph::build(std::move(endpoints), n, g.directed(), g.prob_model(), g.cost_model(),
                      std::move(original_ids), costs_ptr);
}

}  // namespace evea
