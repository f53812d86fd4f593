#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "evea/config.hpp"
#include "evea/evolution.hpp"
#include "evea/io.hpp"
#include "evea/metrics.hpp"

namespace evea {

namespace fs = std::filesystem;

struct CellOutcome {
  std::string network;
  std::string algorithm;
  std::uint32_t rep = 0;
  std::uint64_t run_seed = 0;
  std::uint64_t eval_seed = 0;
  std::vector<ObjectiveVector> final_front;
  double hv = 0.0;  // under the experiment's frozen bounds
  bool resumed = false;
};

struct AlgoSummary {
  std::string algorithm;
  std::vector<double> hvs;  // by repetition
  double mean_hv = 0.0;
  double std_hv = 0.0;
  double p_vs_evea = std::numeric_limits<double>::quiet_NaN();
  bool significant = false;
};

struct NetworkReport {
  std::string network;
  NormalizationBounds bounds;
  std::vector<CellOutcome> cells;
  std::vector<AlgoSummary> summaries;
};

struct ExperimentReport {
  std::uint64_t config_hash = 0;
  fs::path output_dir;
  std::vector<NetworkReport> networks;
};

namespace detail {

inline nlohmann::json bounds_to_json(const NormalizationBounds& b) {
  return {{"lo", b.lo}, {"hi", b.hi}};
}

inline std::vector<TraceRow> trace_rows(const RunResult& run) {
  std::vector<TraceRow> rows;
  rows.reserve(run.generations.size());
  for (std::uint32_t t = 0; t < run.generations.size(); ++t) {
    const auto& rec = run.generations[t];
    TraceRow row;
    row.generation = t;
    row.hypervolume = rec.hypervolume;
    row.best_influence = 0.0;
    row.best_cost = std::numeric_limits<double>::infinity();
    row.best_time = std::numeric_limits<double>::infinity();
    for (const auto& p : rec.front) {
      row.best_influence = std::max(row.best_influence, p.spread());
      row.best_cost = std::min(row.best_cost, p.cost());
      row.best_time = std::min(row.best_time, p.time());
    }
    rows.push_back(row);
  }
  return rows;
}

inline void write_run_outputs(const fs::path& dir, const RunResult& run,
                              const std::string& provenance, double total_wall_ms) {
  const auto& final_rec = run.final_record();
  atomic_write(dir / "front.csv",
               front_csv(final_rec.front, run.generations_executed, final_rec.hypervolume,
                         provenance));
  atomic_write(dir / "trace.csv", trace_csv(trace_rows(run), provenance));

  nlohmann::json j;
  j["provenance"] = provenance;
  j["algo"] = cfg::algo_to_json(run.algo);
  j["eval"] = cfg::eval_to_json(run.eval);
  j["graph_fingerprint"] = hex64(run.graph_fingerprint);
  j["embedding_fingerprint"] = hex64(run.embedding_fingerprint);
  j["trace_bounds"] = bounds_to_json(run.trace_bounds);
  j["generations_executed"] = run.generations_executed;
  j["warnings"] = run.warnings;
  j["total_wall_ms"] = total_wall_ms;
  auto front = nlohmann::json::array();
  for (const auto& p : final_rec.front)
    front.push_back({p.spread(), p.cost(), p.time()});
  j["final_front"] = std::move(front);
  auto seeds = nlohmann::json::array();
  for (const auto& ind : run.final_population) {
    if (ind.rank != 0) continue;
    auto arr = nlohmann::json::array();
    for (NodeId v : ind.seeds) arr.push_back(v);
    seeds.push_back(std::move(arr));
  }
  j["final_front_seed_sets"] = std::move(seeds);
  atomic_write(dir / "run.json", j.dump(1) + "\n");
}

// Embedding cache: embeddings.txt plus a sidecar binding it to the graph
// fingerprint and walk configuration.
inline EmbeddingTable network_embeddings(const Graph& g, const ExperimentSpec& spec,
                                         std::size_t net_idx, const fs::path& net_dir,
                                         std::vector<std::string>* notes) {
  if (!spec.embedding.file.empty()) {
    EmbeddingTable t = load_embeddings(spec.embedding.file);
    if (!t.covers(g))
      throw DataError("embedding file does not cover the network: " + spec.embedding.file);
    return t;  // external provenance unknown; trained_on stays 0
  }

  WalkConfig walks = spec.embedding.walks;
  walks.rng_seed = derive_seed(derive_seed(derive_seed(spec.master_seed, 0xE3B),
                                           static_cast<std::uint64_t>(net_idx)),
                               spec.embedding.walks.rng_seed);

  const fs::path emb_path = net_dir / "embeddings.txt";
  const fs::path meta_path = net_dir / "embeddings.meta.json";
  const std::uint64_t graph_fp = g.fingerprint();
  const std::uint64_t walks_fp = [&] {
    const auto dump = cfg::walks_to_json(walks, "").dump();
    std::uint64_t h = mix64(dump.size());
    for (unsigned char c : dump) h = hash_at(h, c);
    return h;
  }();

  if (fs::exists(emb_path) && fs::exists(meta_path)) {
    try {
      const auto meta = nlohmann::json::parse(read_file(meta_path));
      if (meta.at("graph_fingerprint") == hex64(graph_fp) &&
          meta.at("walks_fingerprint") == hex64(walks_fp)) {
        EmbeddingTable t = load_embeddings(emb_path.string());
        if (t.covers(g)) {
          t.set_trained_on(graph_fp);
          if (notes) notes->push_back("reused cached embeddings: " + emb_path.string());
          return t;
        }
      }
    } catch (const std::exception&) {
      // fall through to retraining
    }
  }

  EmbeddingTable t = train_embeddings(g, walks);
  fs::create_directories(net_dir);
  save_embeddings(t, (net_dir / "embeddings.txt.tmp").string());
  fs::rename(net_dir / "embeddings.txt.tmp", emb_path);
  nlohmann::json meta;
  meta["graph_fingerprint"] = hex64(graph_fp);
  meta["walks_fingerprint"] = hex64(walks_fp);
  atomic_write(meta_path, meta.dump(1) + "\n");
  return t;
}

inline bool needs_embeddings(const ExperimentSpec& spec) {
  return std::any_of(spec.algorithms.begin(), spec.algorithms.end(),
                     [](const AlgoConfig& a) { return variant_needs_embeddings(a.variant); });
}

}  // namespace detail

// Executes the (network x algorithm x repetition) grid, then aggregates:
// per network the final fronts of all runs freeze the normalization bounds,
// hypervolume statistics are computed under them and EVEA is compared to
// each baseline with a paired Wilcoxon signed-rank test. Completed cells
// are detected on disk and reused, so interrupted grids resume.
// Results are independent of the thread count.
inline ExperimentReport run_experiment(const ExperimentSpec& spec, unsigned threads = 1,
                                       std::ostream* log = nullptr) {
  spec.validate();
  for (const auto& net : spec.networks) {
    if (!fs::exists(net.path)) throw DataError("dataset file missing: " + net.path);
    if (net.cost_model.kind == CostModel::Kind::file && !fs::exists(net.cost_model.path))
      throw DataError("cost file missing: " + net.cost_model.path);
  }
  if (!spec.embedding.file.empty() && !fs::exists(spec.embedding.file))
    throw DataError("embedding file missing: " + spec.embedding.file);

  const std::uint64_t hash = config_hash(spec);
  ExperimentReport report;
  report.config_hash = hash;
  report.output_dir = spec.output_dir;

  nlohmann::json manifest = experiment_to_json(spec);
  manifest["config_hash"] = hex64(hash);
  atomic_write(fs::path(spec.output_dir) / "manifest.json", manifest.dump(1) + "\n");

  std::mutex log_mutex;
  auto say = [&](const std::string& msg) {
    if (!log) return;
    std::lock_guard lock(log_mutex);
    (*log) << msg << '\n' << std::flush;
  };

  for (std::size_t net_idx = 0; net_idx < spec.networks.size(); ++net_idx) {
    const auto& net_spec = spec.networks[net_idx];
    const fs::path net_dir = fs::path(spec.output_dir) / net_spec.name;
    say("network " + net_spec.name + ": loading " + net_spec.path);
    const Graph g = net_spec.load();

    std::optional<EmbeddingTable> embeddings;
    if (detail::needs_embeddings(spec)) {
      std::vector<std::string> notes;
      embeddings = detail::network_embeddings(g, spec, net_idx, net_dir, &notes);
      for (const auto& n : notes) say(n);
    }

    NetworkReport net_report;
    net_report.network = net_spec.name;

    struct Cell {
      std::size_t algo_idx;
      std::uint32_t rep;
    };
    std::vector<Cell> cells;
    for (std::size_t a = 0; a < spec.algorithms.size(); ++a)
      for (std::uint32_t r = 0; r < spec.repetitions; ++r) cells.push_back({a, r});
    std::vector<CellOutcome> outcomes(cells.size());

    auto run_cell = [&](std::size_t idx) {
      const auto [algo_idx, rep] = cells[idx];
      AlgoConfig algo = spec.algorithms[algo_idx];
      EvalConfig eval = spec.eval;
      const std::uint64_t run_seed = derive_seed(
          derive_seed(derive_seed(derive_seed(spec.master_seed, 0xA160),
                                  static_cast<std::uint64_t>(net_idx)),
                      static_cast<std::uint64_t>(algo_idx)),
          rep);
      // Evaluation seeds are shared across algorithms for the same rep:
      // common random numbers make the per-rep pairing fair.
      const std::uint64_t eval_seed = derive_seed(
          derive_seed(derive_seed(spec.master_seed, 0xE7A1), static_cast<std::uint64_t>(net_idx)),
          rep);
      algo.rng_seed = run_seed;
      eval.base_seed = eval_seed;

      const fs::path cell_dir =
          net_dir / variant_name(algo.variant) / ("rep" + std::to_string(rep));
      CellOutcome& outcome = outcomes[idx];
      outcome.network = net_spec.name;
      outcome.algorithm = variant_name(algo.variant);
      outcome.rep = rep;
      outcome.run_seed = run_seed;
      outcome.eval_seed = eval_seed;

      const bool complete = fs::exists(cell_dir / "front.csv") &&
                            fs::exists(cell_dir / "trace.csv") && fs::exists(cell_dir / "run.json");
      if (!complete) {
        say("run " + net_spec.name + "/" + outcome.algorithm + "/rep" + std::to_string(rep));
        const auto start = std::chrono::steady_clock::now();
        const RunResult result = run(g, embeddings ? &*embeddings : nullptr, algo, eval);
        const double wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        const std::string provenance = "config=" + hex64(hash) + " run_seed=" +
                                       std::to_string(run_seed) + " eval_seed=" +
                                       std::to_string(eval_seed) + " graph=" +
                                       hex64(result.graph_fingerprint);
        detail::write_run_outputs(cell_dir, result, provenance, wall_ms);
      } else {
        outcome.resumed = true;
      }
      outcome.final_front = read_front_csv(cell_dir / "front.csv");
    };

    if (threads <= 1 || cells.size() < 2) {
      for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> workers;
      const unsigned n = std::min<unsigned>(threads, static_cast<unsigned>(cells.size()));
      for (unsigned t = 0; t < n; ++t)
        workers.emplace_back([&] {
          for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) run_cell(i);
        });
      for (auto& w : workers) w.join();
    }

    // Freeze bounds over the union of all final fronts, then score.
    std::vector<ObjectiveVector> all_points;
    for (const auto& outcome : outcomes)
      all_points.insert(all_points.end(), outcome.final_front.begin(), outcome.final_front.end());
    net_report.bounds = NormalizationBounds::from_points(all_points);
    for (auto& outcome : outcomes) {
      const auto front = extract_pareto_front(outcome.final_front);
      outcome.hv = hypervolume_3d(normalize(front, net_report.bounds));
    }
    net_report.cells = std::move(outcomes);

    for (std::size_t a = 0; a < spec.algorithms.size(); ++a) {
      AlgoSummary summary;
      summary.algorithm = variant_name(spec.algorithms[a].variant);
      summary.hvs.resize(spec.repetitions, 0.0);
      for (const auto& cell : net_report.cells)
        if (cell.algorithm == summary.algorithm) summary.hvs[cell.rep] = cell.hv;
      double sum = 0.0;
      for (double v : summary.hvs) sum += v;
      summary.mean_hv = sum / static_cast<double>(summary.hvs.size());
      if (summary.hvs.size() > 1) {
        double acc = 0.0;
        for (double v : summary.hvs) acc += (v - summary.mean_hv) * (v - summary.mean_hv);
        summary.std_hv = std::sqrt(acc / static_cast<double>(summary.hvs.size() - 1));
      }
      net_report.summaries.push_back(std::move(summary));
    }

    const auto evea_it =
        std::find_if(net_report.summaries.begin(), net_report.summaries.end(),
                     [](const AlgoSummary& s) { return s.algorithm == "EVEA"; });
    if (evea_it != net_report.summaries.end()) {
      for (auto& summary : net_report.summaries) {
        if (summary.algorithm == "EVEA") continue;
        try {
          const auto test = wilcoxon_signed_rank(evea_it->hvs, summary.hvs);
          summary.p_vs_evea = test.p_value;
          summary.significant = test.p_value < 0.05;
        } catch (const std::invalid_argument&) {
          // too few usable pairs; leave NaN
        }
      }
    }

    const std::string agg_provenance = "config=" + hex64(hash);
    std::string hv_rows = "# " + agg_provenance + "\nnetwork,algorithm,rep,hv,run_seed\n";
    for (const auto& cell : net_report.cells)
      hv_rows += cell.network + ',' + cell.algorithm + ',' + std::to_string(cell.rep) + ',' +
                 format_double(cell.hv) + ',' + std::to_string(cell.run_seed) + '\n';
    atomic_write(net_dir / "hv.csv", hv_rows);

    std::string summary_rows =
        "# " + agg_provenance + "\nnetwork,algorithm,mean_hv,std_hv,p_vs_evea,significant\n";
    for (const auto& s : net_report.summaries) {
      summary_rows += net_report.network + ',' + s.algorithm + ',' + format_double(s.mean_hv) +
                      ',' + format_double(s.std_hv) + ',';
      summary_rows += std::isnan(s.p_vs_evea) ? "na" : format_double(s.p_vs_evea);
      summary_rows += ',';
      summary_rows += s.significant ? "yes" : "no";
      summary_rows += '\n';
    }
    atomic_write(net_dir / "summary.csv", summary_rows);

    nlohmann::json bounds_json;
    bounds_json["provenance"] = agg_provenance;
    bounds_json["bounds"] = detail::bounds_to_json(net_report.bounds);
    atomic_write(net_dir / "bounds.json", bounds_json.dump(1) + "\n");

    report.networks.push_back(std::move(net_report));
  }
  return report;
}

}  // namespace evea
