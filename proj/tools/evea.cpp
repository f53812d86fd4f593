// Command-line front end: dataset inspection and sampling, embedding
// training, single solver runs, benchmark grids, hypervolume recomputation
// and the bundled ten-node fixture.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 runtime error.

#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evea/bench.hpp"
#include "evea/config.hpp"
#include "evea/diffusion.hpp"
#include "evea/embedding.hpp"
#include "evea/evolution.hpp"
#include "evea/fixtures.hpp"
#include "evea/graph.hpp"
#include "evea/io.hpp"
#include "evea/metrics.hpp"

namespace {

namespace fs = std::filesystem;

struct GraphOptions {
  std::string path;
  bool directed = false;
  std::string prob_kind = "weighted_cascade";
  double prob_p = 0.1;
  std::string cost_kind = "degree";
  std::string cost_file;

  void attach(CLI::App* cmd, bool positional = true) {
    if (positional)
      cmd->add_option("graph", path, "edge list file ('src dst' pairs, '#' comments)")
          ->required();
    cmd->add_flag("--directed", directed, "treat the edge list as directed");
    cmd->add_option("--prob", prob_kind, "arc probability model: weighted_cascade|constant")
        ->check(CLI::IsMember({"weighted_cascade", "constant"}));
    cmd->add_option("--p", prob_p, "probability for --prob constant");
    cmd->add_option("--cost", cost_kind, "node cost model: degree|unit|file")
        ->check(CLI::IsMember({"degree", "unit", "file"}));
    cmd->add_option("--cost-file", cost_file, "cost override file for --cost file");
  }

  evea::ProbabilityModel prob_model() const {
    return prob_kind == "constant" ? evea::ProbabilityModel::constant(prob_p)
                                   : evea::ProbabilityModel::weighted_cascade();
  }
  evea::CostModel cost_model() const {
    if (cost_kind == "unit") return evea::CostModel::unit();
    if (cost_kind == "file") {
      if (cost_file.empty()) throw evea::ConfigError("--cost file requires --cost-file");
      return evea::CostModel::from_file(cost_file);
    }
    return evea::CostModel::degree();
  }
  evea::Graph load() const {
    return evea::load_edge_list(path, directed, prob_model(), cost_model());
  }
};

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
    return;
  }
  evea::atomic_write(out_path, content);
}

std::string graph_as_edge_list(const evea::Graph& g, const std::string& header) {
  std::string out = header;
  for (const evea::Arc& a : g.arcs()) {
    if (!g.directed() && g.original_id(a.src) > g.original_id(a.dst)) continue;
    out += std::to_string(g.original_id(a.src)) + ' ' + std::to_string(g.original_id(a.dst)) + '\n';
  }
  return out;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"tri-objective influence maximization (influence / cost / time)"};
  app.require_subcommand(1);

  unsigned threads = 1;
  app.add_option("--threads", threads, "worker threads for grids and evaluation")
      ->capture_default_str();

  // graph info / graph sample
  auto* graph_cmd = app.add_subcommand("graph", "inspect or sample edge-list graphs");
  graph_cmd->require_subcommand(1);
  auto* info_cmd = graph_cmd->add_subcommand("info", "load a graph and print its statistics");
  GraphOptions info_opts;
  info_opts.attach(info_cmd);
  auto* sample_cmd =
      graph_cmd->add_subcommand("sample", "BFS-sample an induced subgraph, emit an edge list");
  GraphOptions sample_opts;
  sample_opts.attach(sample_cmd);
  std::uint32_t sample_n = 500;
  std::uint64_t sample_seed = 0;
  std::string sample_out;
  sample_cmd->add_option("--n", sample_n, "number of nodes to keep")->capture_default_str();
  sample_cmd->add_option("--seed", sample_seed, "sampling seed")->capture_default_str();
  sample_cmd->add_option("--output,-o", sample_out, "output path (default stdout)");

  // embed train / embed inspect
  auto* embed_cmd = app.add_subcommand("embed", "train or inspect node embeddings");
  embed_cmd->require_subcommand(1);
  auto* train_cmd = embed_cmd->add_subcommand("train", "random walks + skip-gram training");
  GraphOptions train_opts;
  train_opts.attach(train_cmd);
  evea::WalkConfig walk_cfg;
  std::string train_out;
  std::uint64_t embed_seed = 0;
  train_cmd->add_option("--dims", walk_cfg.dims)->capture_default_str();
  train_cmd->add_option("--walks-per-node", walk_cfg.walks_per_node)->capture_default_str();
  train_cmd->add_option("--walk-length", walk_cfg.walk_length)->capture_default_str();
  train_cmd->add_option("--window", walk_cfg.window)->capture_default_str();
  train_cmd->add_option("--negatives", walk_cfg.negatives)->capture_default_str();
  train_cmd->add_option("--epochs", walk_cfg.epochs)->capture_default_str();
  train_cmd->add_option("--learning-rate", walk_cfg.learning_rate)->capture_default_str();
  train_cmd->add_option("--return-p", walk_cfg.return_param_p, "second-order walk return bias")
      ->capture_default_str();
  train_cmd->add_option("--inout-q", walk_cfg.inout_param_q, "second-order walk in-out bias")
      ->capture_default_str();
  train_cmd->add_option("--seed", embed_seed, "walk/training seed")->capture_default_str();
  train_cmd->add_option("--output,-o", train_out, "embedding output file")->required();

  auto* inspect_cmd = embed_cmd->add_subcommand("inspect", "summarize an embedding file");
  std::string inspect_path;
  std::int64_t inspect_node = -1;
  inspect_cmd->add_option("file", inspect_path, "embedding file")->required();
  inspect_cmd->add_option("--node", inspect_node, "print the vector of one node");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "single evolutionary run on one network");
  GraphOptions solve_opts;
  solve_opts.attach(solve_cmd);
  evea::AlgoConfig algo_cfg;
  std::string solve_variant = "EVEA";
  evea::EvalConfig eval_cfg;
  std::string delay_kind = "unit";
  double delay_q = 0.5;
  std::string eval_mode = "per_generation";
  std::string solve_embeddings;
  std::string solve_out = "run_out";
  std::uint64_t solve_seed = 0;
  std::uint64_t solve_eval_seed = 0;
  solve_cmd->add_option("--variant", solve_variant, "EVEA|NSGA2|NSGA2+VC|NSGA2+VM")
      ->capture_default_str();
  solve_cmd->add_option("--population", algo_cfg.population_size)->capture_default_str();
  solve_cmd->add_option("--generations", algo_cfg.max_generations)->capture_default_str();
  solve_cmd->add_option("--crossover-rate", algo_cfg.crossover_rate)->capture_default_str();
  solve_cmd->add_option("--mutation-rate", algo_cfg.mutation_rate)->capture_default_str();
  solve_cmd->add_option("--tournament", algo_cfg.tournament_size)->capture_default_str();
  solve_cmd->add_option("--init-min", algo_cfg.init_size_min)->capture_default_str();
  solve_cmd->add_option("--init-max", algo_cfg.init_size_max)->capture_default_str();
  solve_cmd->add_option("--max-seeds", algo_cfg.max_seeds)->capture_default_str();
  solve_cmd->add_option("--seed", solve_seed, "run seed")->capture_default_str();
  solve_cmd->add_option("--mc-samples", eval_cfg.mc_samples)->capture_default_str();
  solve_cmd->add_option("--delay", delay_kind, "unit|geometric")
      ->check(CLI::IsMember({"unit", "geometric"}));
  solve_cmd->add_option("--delay-q", delay_q, "geometric delay parameter");
  solve_cmd->add_option("--eval-mode", eval_mode, "per_generation|once")
      ->check(CLI::IsMember({"per_generation", "once"}));
  solve_cmd->add_option("--eval-seed", solve_eval_seed)->capture_default_str();
  solve_cmd->add_option("--embeddings", solve_embeddings,
                        "precomputed embedding file (skips training)");
  solve_cmd->add_option("--dims", walk_cfg.dims, "embedding dims when training here");
  solve_cmd->add_option("--output,-o", solve_out, "output directory")->capture_default_str();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "run an experiment grid from a config file");
  std::string bench_config;
  std::string bench_out_override;
  bench_cmd->add_option("--config", bench_config, "experiment config JSON (or manifest.json)")
      ->required();
  bench_cmd->add_option("--output,-o", bench_out_override, "override output_dir");

  // hv
  auto* hv_cmd = app.add_subcommand("hv", "recompute hypervolume from a front CSV");
  std::string hv_file;
  std::string hv_bounds;
  std::vector<double> hv_ref{1.1, 1.1, 1.1};
  hv_cmd->add_option("front", hv_file, "front CSV file")->required();
  hv_cmd->add_option("--bounds", hv_bounds,
                     "bounds.json; rows are raw (influence,cost,time) to normalize. "
                     "Without it rows are already-normalized minimization points");
  hv_cmd->add_option("--ref", hv_ref, "reference point (3 values)")->expected(3);

  // fixture
  auto* fixture_cmd = app.add_subcommand("fixture", "emit bundled test graphs");
  auto* figure1_cmd = fixture_cmd->add_subcommand("figure1", "ten-node promotion scenario");
  std::string fixture_out;
  figure1_cmd->add_option("--output,-o", fixture_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (info_cmd->parsed()) {
    const evea::Graph g = info_opts.load();
    std::uint64_t isolated = 0;
    std::uint64_t max_deg = 0;
    for (evea::NodeId v = 0; v < g.node_count(); ++v) {
      const auto d = g.in_degree(v) + g.out_degree(v);
      if (d == 0) ++isolated;
      max_deg = std::max<std::uint64_t>(max_deg, d);
    }
    double cost_sum = 0.0;
    for (double c : g.costs()) cost_sum += c;
    std::cout << "path: " << info_opts.path << '\n'
              << "directed: " << (g.directed() ? "yes" : "no") << '\n'
              << "nodes: " << g.node_count() << '\n'
              << "arcs: " << g.arc_count() << '\n'
              << "edge lines read: " << g.load_stats().edge_lines << '\n'
              << "self loops dropped: " << g.load_stats().self_loops_dropped << '\n'
              << "duplicate arcs collapsed: " << g.load_stats().duplicate_arcs_collapsed << '\n'
              << "max total degree: " << max_deg << '\n'
              << "isolated nodes: " << isolated << '\n'
              << "total cost: " << evea::format_double(cost_sum) << '\n'
              << "fingerprint: " << evea::hex64(g.fingerprint()) << '\n';
    return 0;
  }

  if (sample_cmd->parsed()) {
    const evea::Graph g = sample_opts.load();
    const evea::Graph sub = evea::induced_subgraph(g, sample_n, sample_seed);
    std::ostringstream header;
    header << "# sampled subgraph: n=" << sub.node_count() << " arcs=" << sub.arc_count()
           << " seed=" << sample_seed << " source=" << sample_opts.path << '\n'
           << "# node ids are original ids from the source file\n";
    write_output(sample_out, graph_as_edge_list(sub, header.str()));
    return 0;
  }

  if (train_cmd->parsed()) {
    walk_cfg.rng_seed = embed_seed;
    const evea::Graph g = train_opts.load();
    const evea::EmbeddingTable table = evea::train_embeddings(g, walk_cfg);
    evea::save_embeddings(table, train_out);
    std::cout << "trained " << table.node_count() << " vectors of dim " << table.dims() << " -> "
              << train_out << '\n';
    return 0;
  }

  if (inspect_cmd->parsed()) {
    const evea::EmbeddingTable table = evea::load_embeddings(inspect_path);
    double min_norm = std::numeric_limits<double>::infinity();
    double max_norm = 0.0;
    double sum_norm = 0.0;
    for (evea::NodeId v = 0; v < table.node_count(); ++v) {
      double acc = 0.0;
      for (double x : table.vector(v)) acc += x * x;
      const double norm = std::sqrt(acc);
      min_norm = std::min(min_norm, norm);
      max_norm = std::max(max_norm, norm);
      sum_norm += norm;
    }
    std::cout << "nodes: " << table.node_count() << '\n'
              << "dims: " << table.dims() << '\n'
              << "all finite: " << (table.all_finite() ? "yes" : "no") << '\n'
              << "norm min/mean/max: " << evea::format_double(min_norm) << ' '
              << evea::format_double(sum_norm / table.node_count()) << ' '
              << evea::format_double(max_norm) << '\n';
    if (inspect_node >= 0) {
      const auto vec = table.vector(static_cast<evea::NodeId>(inspect_node));
      std::cout << "node " << inspect_node << ':';
      for (double x : vec) std::cout << ' ' << evea::format_double(x);
      std::cout << '\n';
    }
    return 0;
  }

  if (solve_cmd->parsed()) {
    algo_cfg.variant = evea::variant_from_name(solve_variant);
    algo_cfg.rng_seed = solve_seed;
    eval_cfg.delay = delay_kind == "unit" ? evea::DelayDistribution::unit()
                                          : evea::DelayDistribution::geometric(delay_q);
    eval_cfg.mode = eval_mode == "once" ? evea::EvalConfig::Mode::once
                                        : evea::EvalConfig::Mode::per_generation;
    eval_cfg.base_seed = solve_eval_seed;

    const evea::Graph g = solve_opts.load();
    std::optional<evea::EmbeddingTable> embeddings;
    if (evea::variant_needs_embeddings(algo_cfg.variant)) {
      if (!solve_embeddings.empty()) {
        embeddings = evea::load_embeddings(solve_embeddings);
        if (!embeddings->covers(g))
          throw evea::DataError("embedding file does not cover the graph: " + solve_embeddings);
      } else {
        walk_cfg.rng_seed = evea::derive_seed(solve_seed, 0xE3B);
        std::cout << "training embeddings (dims " << walk_cfg.dims << ")...\n";
        embeddings = evea::train_embeddings(g, walk_cfg);
      }
    }

    const auto start = std::chrono::steady_clock::now();
    const evea::RunResult result =
        evea::run(g, embeddings ? &*embeddings : nullptr, algo_cfg, eval_cfg, threads);
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    const std::string provenance = "run_seed=" + std::to_string(solve_seed) +
                                   " eval_seed=" + std::to_string(eval_cfg.base_seed) +
                                   " graph=" + evea::hex64(result.graph_fingerprint);
    evea::detail::write_run_outputs(solve_out, result, provenance, wall_ms);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "final front size: " << result.final_record().front.size() << '\n'
              << "final front hv (run-local bounds): "
              << evea::format_double(result.final_record().hypervolume) << '\n'
              << "outputs: " << solve_out << "/{front.csv,trace.csv,run.json}\n";
    return 0;
  }

  if (bench_cmd->parsed()) {
    evea::ExperimentSpec spec = evea::load_experiment(bench_config);
    if (!bench_out_override.empty()) spec.output_dir = bench_out_override;
    const evea::ExperimentReport report = evea::run_experiment(spec, threads, &std::cout);
    for (const auto& net : report.networks) {
      std::cout << '\n' << net.network << " (config " << evea::hex64(report.config_hash) << ")\n";
      for (const auto& s : net.summaries) {
        std::cout << "  " << s.algorithm << ": hv " << evea::format_double(s.mean_hv) << " +- "
                  << evea::format_double(s.std_hv);
        if (!std::isnan(s.p_vs_evea))
          std::cout << "  (p vs EVEA " << evea::format_double(s.p_vs_evea)
                    << (s.significant ? ", significant)" : ")");
        std::cout << '\n';
      }
    }
    return 0;
  }

  if (hv_cmd->parsed()) {
    const std::array<double, 3> ref{hv_ref[0], hv_ref[1], hv_ref[2]};
    double volume = 0.0;
    if (!hv_bounds.empty()) {
      const auto rows = evea::read_front_csv(hv_file);
      const auto bounds_json = nlohmann::json::parse(evea::read_file(hv_bounds));
      evea::NormalizationBounds bounds;
      const auto& b = bounds_json.at("bounds");
      bounds.lo = b.at("lo").get<std::array<double, 3>>();
      bounds.hi = b.at("hi").get<std::array<double, 3>>();
      const auto front = evea::extract_pareto_front(rows);
      volume = evea::hypervolume_3d(evea::normalize(front, bounds), ref);
    } else {
      // Rows are already-normalized minimization triples.
      std::ifstream in(hv_file);
      if (!in) throw evea::DataError("cannot open: " + hv_file);
      std::vector<std::array<double, 3>> points;
      std::string line;
      bool header_seen = false;
      while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
          header_seen = true;
          continue;
        }
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
        if (values.size() < 4) throw evea::DataError(hv_file + ": expected 5-column front rows");
        points.push_back({values[1], values[2], values[3]});
      }
      volume = evea::hypervolume_3d(points, ref);
    }
    std::cout << evea::format_double(volume) << '\n';
    return 0;
  }

  if (figure1_cmd->parsed()) {
    write_output(fixture_out, evea::figure1_edge_list());
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const evea::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
