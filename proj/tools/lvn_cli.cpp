#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lvn/error.hpp"
#include "lvn/experiment.hpp"
#include "lvn/format.hpp"
#include "plot.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace lvn;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Options {
  std::optional<fs::path> config;
  fs::path output_dir = "lvn_out";
  std::optional<std::size_t> jobs;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::optional<fs::path> from;
};

/// Files are staged in memory and written only once the command succeeded,
/// so a failing run leaves the output directory untouched.
struct Outputs {
  std::map<std::string, std::string> files;

  void add(const std::string& name, std::string content) { files[name] = std::move(content); }
  void add_json(const std::string& name, const json& doc) { add(name, doc.dump(2) + "\n"); }

  void flush(const fs::path& dir) const {
    for (const auto& [name, content] : files) {
      const fs::path p = dir / name;
      fs::create_directories(p.parent_path());
      std::ofstream os(p, std::ios::binary);
      if (!os) throw DataError("cannot write " + p.string());
      os << content;
    }
  }
};

void log(const std::string& msg) { std::cerr << "[lvn] " << msg << '\n'; }

ExperimentConfig resolve_config(const Options& o, Task default_task = Task::GraphClassification) {
  std::vector<std::string> overrides = o.overrides;
  if (o.jobs) overrides.push_back("jobs=" + std::to_string(*o.jobs));
  if (o.seed) overrides.push_back("base_seed=" + std::to_string(*o.seed));
  return load_config(o.config, overrides, default_task);
}

json manifest(const std::string& cmd, const ExperimentConfig& cfg, const json& extra = json::object()) {
  json m = {{"format", kManifestFormat},
            {"tool", "lvn"},
            {"version", kVersion},
            {"subcommand", cmd},
            {"config", cfg.to_json()},
            {"seeds", {{"base_seed", cfg.base_seed}}}};
  for (const auto& [k, v] : extra.items()) m[k] = v;
  return m;
}

Graph load_single_graph(const ExperimentConfig& cfg) {
  if (!cfg.graph.empty()) {
    std::ifstream is(cfg.graph);
    if (!is) throw DataError("cannot read graph file " + cfg.graph);
    const json doc = json::parse(is, nullptr, false);
    if (doc.is_discarded()) throw DataError(cfg.graph + ": not valid JSON");
    return graph_from_json(doc, cfg.graph);
  }
  if (cfg.task == Task::NodeClassification && !cfg.dataset.empty()) return load_node_dataset(cfg.dataset);
  throw ConfigError("config key 'graph' is required");
}

bool single_graph_mode(const ExperimentConfig& cfg) {
  return !cfg.graph.empty() || cfg.task == Task::NodeClassification;
}

std::string sweep_csv(const ResistanceSweep& sw) {
  std::ostringstream os;
  write_sweep_csv(os, sw);
  return os.str();
}

std::string path_csv(const PathDeltaCurve& c) {
  std::ostringstream os;
  write_path_csv(os, c);
  return os.str();
}

json sweep_json(const ResistanceSweep& sw) {
  json pts = json::array();
  for (const auto& p : sw.points) {
    json j = {{"n_s", p.n_s}, {"total", p.total ? json(*p.total) : json(nullptr)}};
    if (!p.error.empty()) j["error"] = p.error;
    pts.push_back(std::move(j));
  }
  return {{"baseline", sw.baseline}, {"subset_size", sw.subset.size()}, {"points", std::move(pts)}};
}

json tensor_json(const Tensor2& t) {
  return {{"format", "lvn-embedding-1"}, {"rows", t.rows()}, {"cols", t.cols()}, {"values", t.data()}};
}

Tensor2 tensor_from_file(const fs::path& p) {
  std::ifstream is(p);
  const json doc = json::parse(is, nullptr, false);
  try {
    if (doc.is_discarded() || doc.at("format") != "lvn-embedding-1") throw DataError(p.string() + ": not an embedding file");
    return Tensor2(doc.at("rows").get<std::size_t>(), doc.at("cols").get<std::size_t>(), doc.at("values").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw DataError(p.string() + ": " + e.what());
  } catch (const ShapeError& e) {
    throw DataError(p.string() + ": " + e.what());
  }
}

std::string split_name(std::size_t k) { return "split_" + std::to_string(k) + ".json"; }

json cmd_augment(const Options& o, Outputs& out) {
  const ExperimentConfig cfg = resolve_config(o);
  const Graph g = load_single_graph(cfg);
  AugmentedGraph aug;
  if (cfg.n_s == 0) {
    aug = identity_augmentation(g);
  } else {
    const auto scores = compute_centrality(g, cfg.centrality, cfg.base_seed);
    aug = lvn_augment(g, select_central(scores, g, cfg.n_s), cfg.n_c, cfg.edge_mode);
  }
  out.add_json("augmented.json", augmented_to_json(aug));
  out.add_json("manifest.json", manifest("augment", cfg));
  return {{"num_nodes", aug.graph.num_nodes()},
          {"num_edges", aug.graph.num_edges()},
          {"num_virtual", aug.registry.size()},
          {"isolated_groups", aug.isolated_groups}};
}

json cmd_resistance(const Options& o, Outputs& out) {
  const ExperimentConfig cfg = resolve_config(o);
  if (single_graph_mode(cfg)) {
    const Graph g = symmetrize(load_single_graph(cfg));
    const auto scores = compute_centrality(g, cfg.centrality, cfg.base_seed);
    const std::optional<NodeSubset> subset = cfg.subset == "all" ? std::optional(NodeSubset::all(g.num_nodes())) : std::nullopt;
    const auto sw = resistance_sweep(g, scores, cfg.ns_values, cfg.n_c, cfg.edge_mode, subset);
    out.add("resistance.csv", sweep_csv(sw));
    out.add_json("manifest.json", manifest("analyze-resistance", cfg));
    return sweep_json(sw);
  }
  const GraphDataset ds = load_graph_dataset(cfg);
  log("resistance sweep over " + ds.name);
  const auto res = run_connectivity_suite(ds.graphs, cfg);
  std::ostringstream csv;
  csv << "n_s,total_resistance,baseline\n";
  for (std::size_t j = 0; j < res.ns_values.size(); ++j) {
    csv << res.ns_values[j] << ',' << format_metric(res.mean_totals[j]) << ',' << format_metric(res.mean_baseline) << '\n';
  }
  out.add("resistance.csv", csv.str());
  json per_graph = json::array();
  for (std::size_t k = 0; k < res.sweeps.size(); ++k) {
    json j = sweep_json(res.sweeps[k]);
    j["graph"] = res.graph_indices[k];
    per_graph.push_back(std::move(j));
  }
  out.add_json("resistance_graphs.json", per_graph);
  out.add_json("manifest.json", manifest("analyze-resistance", cfg, {{"graph_indices", res.graph_indices}}));
  return {{"graphs", res.graph_indices.size()}, {"mean_baseline", res.mean_baseline}, {"mean_totals", res.mean_totals}};
}

json cmd_paths(const Options& o, Outputs& out) {
  const ExperimentConfig cfg = resolve_config(o);
  PathDeltaCurve curve;
  json extra = json::object();
  if (single_graph_mode(cfg)) {
    const Graph g = load_single_graph(cfg);
    const std::size_t ns = cfg.n_s > 0 ? cfg.n_s : 1;
    const auto scores = compute_centrality(g, cfg.centrality, cfg.base_seed);
    const auto sel = select_central(scores, g, ns);
    const auto aug = lvn_augment(g, sel, cfg.n_c, cfg.edge_mode);
    const auto subset = cfg.subset == "all" ? NodeSubset::all(g.num_nodes()) : NodeSubset::complement(g.num_nodes(), sel.members, "C");
    curve = path_count_delta(g, aug, subset, cfg.r_max);
  } else {
    const GraphDataset ds = load_graph_dataset(cfg);
    log("walk counts over " + ds.name);
    const auto res = run_connectivity_suite(ds.graphs, cfg);
    curve = res.mean_path_delta;
    extra["graph_indices"] = res.graph_indices;
  }
  if (curve.precision_warning) log("walk counts exceed 2^53; values are approximate");
  out.add("paths.csv", path_csv(curve));
  extra["pairs"] = {{"ordered", true}, {"diagonal", true}};
  out.add_json("manifest.json", manifest("analyze-paths", cfg, extra));
  return {{"r", curve.r_values}, {"delta", curve.deltas}, {"precision_warning", curve.precision_warning}};
}

void stage_run(Outputs& out, const std::string& prefix, const RunResult& r) {
  for (auto& [name, content] : run_output_files(r)) out.add(prefix + name, std::move(content));
  for (std::size_t k = 0; k < r.splits.size(); ++k) {
    out.add(prefix + "splits/" + split_name(k), split_to_json(r.splits[k]).dump() + "\n");
    if (!r.outcomes[k].final_embedding_table.empty()) {
      out.add(prefix + "embeddings/" + split_name(k), tensor_json(r.outcomes[k].final_embedding_table).dump() + "\n");
    }
  }
}

json run_json(const RunResult& r) {
  return {{"mean", r.mean}, {"ci95_halfwidth", r.ci95_halfwidth}, {"mean_val", r.mean_val}, {"test_accuracies", r.test_accuracies}};
}

json cmd_train(const Options& o, Outputs& out) {
  const ExperimentConfig cfg = resolve_config(o);
  std::vector<std::uint64_t> seeds;
  for (std::size_t s = 0; s < cfg.num_splits; ++s) seeds.push_back(split_seed(cfg.base_seed, s));
  if (cfg.grid.empty()) {
    log("training " + std::string(to_string(cfg.task)) + " task on " + cfg.dataset);
    const RunResult r = run_training(cfg);
    stage_run(out, "", r);
    out.add_json("manifest.json", manifest("train", cfg, {{"seeds", {{"base_seed", cfg.base_seed}, {"split_seeds", seeds}}}, {"shift_operator", {{"self_loops", true}}}}));
    return run_json(r);
  }
  if (cfg.task != Task::GraphClassification) throw ConfigError("grid search is only supported for the graph task");
  const GraphDataset ds = load_graph_dataset(cfg);
  const auto configs = expand_grid(cfg);
  log("grid of " + std::to_string(configs.size()) + " configurations on " + ds.name);
  GridResult grid = run_grid(cfg, ds);
  json runs = json::array();
  std::ostringstream csv;
  csv << "run,mean_val,mean_test,ci95\n";
  for (std::size_t i = 0; i < grid.runs.size(); ++i) {
    const RunResult& r = grid.runs[i];
    stage_run(out, "runs/run_" + std::to_string(i) + "/", r);
    json j = run_json(r);
    j["config"] = r.config.to_json();
    runs.push_back(std::move(j));
    csv << i << ',' << format_real(r.mean_val) << ',' << format_real(r.mean) << ',' << format_real(r.ci95_halfwidth) << '\n';
  }
  stage_run(out, "", grid.runs[grid.best]);
  out.add("grid.csv", csv.str());
  out.add_json("grid.json", {{"best", grid.best}, {"runs", runs}});
  out.add_json("manifest.json", manifest("train", cfg, {{"seeds", {{"base_seed", cfg.base_seed}, {"split_seeds", seeds}}}, {"shift_operator", {{"self_loops", true}}}}));
  json summary = run_json(grid.runs[grid.best]);
  summary["best_run"] = grid.best;
  summary["best_config"] = grid.runs[grid.best].config.to_json();
  return summary;
}

json cmd_probe(const Options& o, Outputs& out) {
  if (!o.from) throw ConfigError("probe needs --from <train output directory>");
  Options eff = o;
  if (!eff.config) eff.config = *o.from / "manifest.json";
  ExperimentConfig cfg = resolve_config(eff);
  if (cfg.task != Task::GraphClassification) throw ConfigError("the probe runs on the graph task only");
  if (cfg.n_s == 0) throw ConfigError("the probe needs n_s > 0");
  const GraphDataset ds = load_graph_dataset(cfg);
  std::vector<SplitSpec> splits;
  std::vector<std::optional<Tensor2>> tables;
  for (std::size_t k = 0; k < cfg.num_splits; ++k) {
    const fs::path sp = *o.from / "splits" / split_name(k);
    if (!fs::exists(sp)) throw DataError("missing cached split " + sp.string());
    splits.push_back(load_split(sp));
    const fs::path ep = *o.from / "embeddings" / split_name(k);
    tables.push_back(fs::exists(ep) ? std::optional(tensor_from_file(ep)) : std::nullopt);
  }
  log("probing " + std::to_string(splits.size()) + " cached splits");
  const ProbeResult r = run_mlp_probe(ds, cfg, splits, tables);
  std::ostringstream csv;
  csv << "split,raw_accuracy,embedded_accuracy\n";
  std::size_t a = 0;
  for (std::size_t k = 0; k < splits.size(); ++k) {
    if (std::find(r.skipped_splits.begin(), r.skipped_splits.end(), k) != r.skipped_splits.end()) continue;
    csv << k << ',' << format_real(r.raw_accuracies[a]) << ',' << format_real(r.embedded_accuracies[a]) << '\n';
    ++a;
  }
  out.add("probe.csv", csv.str());
  const json summary = {{"raw_mean", r.raw_mean},
                        {"raw_ci95", r.raw_ci95},
                        {"embedded_mean", r.embedded_mean},
                        {"embedded_ci95", r.embedded_ci95},
                        {"skipped_splits", r.skipped_splits}};
  out.add_json("probe.json", summary);
  out.add_json("manifest.json", manifest("probe", cfg, {{"source", o.from->string()}}));
  return summary;
}

json cmd_report(const Options& o, Outputs& out) {
  const fs::path src = o.from ? *o.from : o.output_dir;
  using report::read_csv;
  using report::series_from_csv;
  json made = json::array();
  auto emit = [&](const std::string& name, const std::string& svg) {
    out.add(name, svg);
    made.push_back(name);
  };
  if (fs::exists(src / "resistance.csv")) {
    const auto csv = read_csv(src / "resistance.csv");
    auto series = series_from_csv(csv, "n_s", "total_resistance");
    const auto base = series_from_csv(csv, "n_s", "baseline");
    series.insert(series.end(), base.begin(), base.end());
    emit("resistance.svg", report::line_plot_svg("Total resistance over S", "n_s", "total resistance", series));
  }
  if (fs::exists(src / "paths.csv")) {
    emit("paths.svg", report::line_plot_svg("Walk-count gain", "r", "delta", series_from_csv(read_csv(src / "paths.csv"), "r", "delta")));
  }
  if (fs::exists(src / "drift.csv")) {
    emit("drift.svg", report::line_plot_svg("Embedding drift", "epoch", "L2 distance from init",
                                            series_from_csv(read_csv(src / "drift.csv"), "epoch", "distance", "slot")));
  }
  if (fs::exists(src / "accuracies.csv")) {
    emit("accuracies.svg", report::line_plot_svg("Test accuracy per split", "split", "accuracy",
                                                 series_from_csv(read_csv(src / "accuracies.csv"), "split", "test_accuracy")));
  }
  if (fs::exists(src / "probe.csv")) {
    const auto csv = read_csv(src / "probe.csv");
    auto series = series_from_csv(csv, "split", "raw_accuracy");
    const auto emb = series_from_csv(csv, "split", "embedded_accuracy");
    series.insert(series.end(), emb.begin(), emb.end());
    emit("probe.svg", report::line_plot_svg("MLP probe accuracy", "split", "accuracy", series));
  }
  if (made.empty()) throw DataError("no result CSVs found in " + src.string());
  return {{"plots", made}};
}

int fail(int code, const char* kind, const std::string& msg) {
  std::string line = msg;
  std::replace(line.begin(), line.end(), '\n', ' ');
  std::cerr << "error: " << kind << ": " << line << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local virtual node augmentation, connectivity analyses and GCN training"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Options opt;
  std::string config_path, from_path;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file (or a run manifest)");
    sub->add_option("--output-dir", opt.output_dir, "Directory for result files")->capture_default_str();
    sub->add_option("--jobs", opt.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", opt.seed, "Base seed");
    sub->add_option("--set", opt.overrides, "Config override key=value (repeatable)");
  };
  struct Cmd {
    const char* name;
    const char* help;
    json (*fn)(const Options&, Outputs&);
  };
  const std::vector<Cmd> cmds{
      {"augment", "Replace central nodes by local virtual node groups", cmd_augment},
      {"analyze-resistance", "Total effective resistance sweep over n_s", cmd_resistance},
      {"analyze-paths", "Walk-count gain between non-central nodes", cmd_paths},
      {"train", "Train and evaluate a GCN over seeded splits", cmd_train},
      {"probe", "Two-layer MLP probe on cached splits and embeddings", cmd_probe},
      {"report", "Render result CSVs as SVG plots", cmd_report},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : cmds) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    if (std::string(c.name) == "probe" || std::string(c.name) == "report") {
      sub->add_option("--from", from_path, std::string(c.name) == "probe" ? "Output directory of a train run" : "Directory holding result CSVs");
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(1, "config", e.what());
  }
  if (!config_path.empty()) opt.config = config_path;
  if (!from_path.empty()) opt.from = from_path;

  for (std::size_t i = 0; i < cmds.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      Outputs out;
      json summary = cmds[i].fn(opt, out);
      out.flush(opt.output_dir);
      summary["subcommand"] = cmds[i].name;
      summary["output_dir"] = opt.output_dir.string();
      std::cout << summary.dump() << '\n';
      return 0;
    } catch (const NumericalError& e) {
      return fail(3, "numerical", e.what());
    } catch (const DataError& e) {
      return fail(2, "data", e.what());
    } catch (const ConfigError& e) {
      return fail(1, "config", e.what());
    } catch (const nlohmann::json::exception& e) {
      return fail(2, "data", e.what());
    } catch (const std::filesystem::filesystem_error& e) {
      return fail(2, "data", e.what());
    }
  }
  return fail(1, "config", "no subcommand given");
}
