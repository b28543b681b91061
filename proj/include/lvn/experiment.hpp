#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lvn/augment.hpp"
#include "lvn/centrality.hpp"
#include "lvn/datasets.hpp"
#include "lvn/gnn.hpp"
#include "lvn/spectral.hpp"

namespace lvn {

enum class Task { GraphClassification, NodeClassification };
enum class Pooling { Mean, Sum };

std::string_view to_string(Task t);
std::string_view to_string(Pooling p);

/// Every tunable of a run. Also the schema of the CLI config file: keys are
/// the field names below and unknown keys are rejected.
struct ExperimentConfig {
  Task task = Task::GraphClassification;
  std::string dataset;  // TUDataset directory or node-dataset JSON file
  std::size_t n_s = 0;  // 0 trains on the plain graph
  std::size_t n_c = 1;
  CentralityMethod centrality = CentralityMethod::Degree;
  EdgeMode edge_mode = EdgeMode::Undirected;
  EmbedMode embed_mode = EmbedMode::Replace;
  std::size_t hidden_dim = 64;
  std::size_t num_layers = 4;
  double dropout = 0.5;
  double lr = 1e-3;
  std::size_t patience = 100;
  std::size_t max_epochs = 1000;
  std::size_t num_splits = 10;
  std::uint64_t base_seed = 0;
  std::size_t batch_size = 64;
  Pooling pooling = Pooling::Mean;
  std::size_t jobs = 1;

  // connectivity analyses
  std::string graph;  // single-graph JSON input for augment / analyze-*
  std::vector<std::size_t> ns_values{1, 2, 3, 5, 7, 10, 12, 15};
  std::size_t r_max = 8;
  std::string subset = "noncentral";  // "all" or "noncentral"
  std::size_t min_nodes = 0;          // graphs below this size are skipped by sweeps
  std::size_t max_graphs = 0;         // 0 = no limit

  // hyperparameter grid: {"key": [values...]} expanded as a Cartesian product
  nlohmann::json grid = nlohmann::json::object();

  static ExperimentConfig defaults(Task task);
  nlohmann::json to_json() const;
  /// Applies the keys of `doc` on top of this config. Throws ConfigError on
  /// unknown keys or ill-typed values.
  void apply_json(const nlohmann::json& doc);
  /// `key=value`, with value parsed as JSON when possible and as a string otherwise.
  void apply_override(const std::string& assignment);
  void validate() const;
};

inline constexpr const char* kManifestFormat = "lvn-manifest-1";

/// Loads the config file (if any), applies overrides in order, validates. A
/// run manifest is accepted in place of a config file.
ExperimentConfig load_config(const std::optional<std::filesystem::path>& path, const std::vector<std::string>& overrides,
                             Task default_task = Task::GraphClassification);

std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& base);

/// Per-split seed.
std::uint64_t split_seed(std::uint64_t base_seed, std::size_t split);

struct SplitOutcome {
  double test_accuracy = 0.0;
  double val_accuracy = 0.0;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  std::vector<double> val_history;  // per epoch, entry 0 is the untrained model
  Tensor2 final_embedding_table;
};

struct RunResult {
  ExperimentConfig config;
  std::vector<SplitSpec> splits;
  std::vector<SplitOutcome> outcomes;
  std::vector<double> test_accuracies;
  double mean = 0.0;
  double ci95_halfwidth = 0.0;
  double mean_val = 0.0;
  std::vector<std::vector<double>> embedding_drift;  // split 0: [epoch][slot]
  Tensor2 final_embedding_table;                    // split 0
};

/// mean and 1.96 * sample std / sqrt(n)
std::pair<double, double> mean_ci95(const std::vector<double>& xs);

/// Graph-classification samples prepared once per configuration.
struct PreparedGraph {
  AugmentedGraph aug;
  ShiftOperator shift;
  FeatureInput input;
  int label = 0;
};

std::vector<PreparedGraph> prepare_graph_dataset(const GraphDataset& ds, const ExperimentConfig& config);

GraphDataset load_graph_dataset(const ExperimentConfig& config);

RunResult run_training(const ExperimentConfig& config);
RunResult run_training(const ExperimentConfig& config, const GraphDataset& ds);
RunResult run_training(const ExperimentConfig& config, const Graph& node_graph);

struct GridResult {
  std::vector<RunResult> runs;
  std::size_t best = 0;  // highest mean validation accuracy, earliest on ties
};

GridResult run_grid(const ExperimentConfig& base, const GraphDataset& ds);

/// Per-epoch L2 distance of every table row from its epoch-0 value.
std::vector<std::vector<double>> track_embedding_drift(const std::vector<Tensor2>& snapshots);

/// Cosine similarity between rows; NaN where a row has zero norm.
Tensor2 embedding_similarity(const Tensor2& table);

struct ProbeResult {
  std::vector<double> raw_accuracies;
  std::vector<double> embedded_accuracies;
  double raw_mean = 0.0, raw_ci95 = 0.0;
  double embedded_mean = 0.0, embedded_ci95 = 0.0;
  std::vector<SplitSpec> splits;
  std::vector<std::size_t> skipped_splits;
};

/// Two-layer MLP probes per cached split: raw node features against the
/// augmented graph whose rows are [features | embedding part]. Original rows
/// carry zeros in the embedding part; virtual rows carry their slot's
/// pretrained embedding. Splits without an embedding table are skipped.
ProbeResult run_mlp_probe(const GraphDataset& ds, const ExperimentConfig& config, const std::vector<SplitSpec>& splits,
                          const std::vector<std::optional<Tensor2>>& embeddings);

struct ConnectivityResult {
  std::vector<std::size_t> ns_values;
  std::vector<double> mean_totals;  // per n_s, over graphs with every point available
  double mean_baseline = 0.0;
  std::vector<ResistanceSweep> sweeps;
  std::vector<std::size_t> graph_indices;
  PathDeltaCurve mean_path_delta;
};

/// Resistance sweep and walk-count deltas averaged over the selected graphs.
ConnectivityResult run_connectivity_suite(const std::vector<Graph>& graphs, const ExperimentConfig& config);

/// File name -> content for results.json, accuracies.csv, drift.csv and
/// similarity.csv.
std::map<std::string, std::string> run_output_files(const RunResult& result);
void write_run_outputs(const std::filesystem::path& dir, const RunResult& result);
nlohmann::json run_summary_json(const RunResult& result);

}  // namespace lvn
