#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lvn/graph.hpp"

namespace lvn {

/// Graph-classification dataset: graphs with one dense 0-based label each.
struct GraphDataset {
  std::string name;
  std::vector<Graph> graphs;
  std::vector<int> labels;
  std::size_t num_classes = 0;
  std::size_t feature_dim = 0;

  std::size_t size() const { return graphs.size(); }
  /// Checks the label range, feature width and length invariants.
  void validate() const;
};

/// Reads a TUDataset directory (`<DS>_A.txt`, `<DS>_graph_indicator.txt`,
/// `<DS>_graph_labels.txt`, optional `<DS>_node_labels.txt`). The dataset name
/// is taken from the directory name. Node labels become one-hot features.
GraphDataset load_tudataset(const std::filesystem::path& dir);

/// Adds a single all-ones feature to a featureless dataset.
GraphDataset inject_constant_feature(GraphDataset ds);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

inline constexpr SplitFractions kGraphTaskSplit{0.8, 0.1, 0.1};
inline constexpr SplitFractions kNodeTaskSplit{0.6, 0.2, 0.2};

struct SplitSpec {
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> val_idx;
  std::vector<std::size_t> test_idx;
  std::uint64_t seed = 0;

  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

/// Seeded shuffle; test and val take round(frac * n) items, train the rest.
SplitSpec make_splits(std::size_t n_items, SplitFractions fractions, std::uint64_t seed);

/// Graph JSON: `{"num_nodes", "edges", "directed"?, "features"?, "labels"?}`
/// with 0-based indices. Throws DataError naming `origin` on malformed input.
Graph graph_from_json(const nlohmann::json& doc, const std::string& origin = "graph");
nlohmann::json graph_to_json(const Graph& g);

/// Single-graph node dataset from the JSON layout
/// `{"num_nodes", "edges", "features", "labels"}` with 0-based indices.
Graph load_node_dataset(const std::filesystem::path& path);

/// Split cache file: `{"seed": int, "train": [...], "val": [...], "test": [...]}`.
nlohmann::json split_to_json(const SplitSpec& split);
void save_split(const std::filesystem::path& path, const SplitSpec& split);
SplitSpec load_split(const std::filesystem::path& path);

}  // namespace lvn
