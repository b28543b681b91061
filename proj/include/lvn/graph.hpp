#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lvn/tensor.hpp"

namespace lvn {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Immutable unweighted graph in CSR form.
///
/// Rows hold out-neighbors sorted ascending without duplicates or self-loops.
/// Undirected graphs store both directions of every edge. Optional node
/// features (num_nodes x F), node labels and a graph label travel with the
/// structure.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from an edge list. Duplicate pairs are merged; for
  /// undirected graphs (i,j) and (j,i) describe the same edge. Throws
  /// DataError on out-of-range endpoints or self-loops.
  static Graph build(std::size_t num_nodes, std::span<const Edge> edges, bool directed,
                     std::optional<Tensor2> features = std::nullopt);

  std::size_t num_nodes() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  /// Number of stored (directed) adjacency entries.
  std::size_t num_arcs() const { return targets_.size(); }
  /// Undirected: number of edges {i,j}. Directed: number of arcs.
  std::size_t num_edges() const { return directed_ ? targets_.size() : targets_.size() / 2; }
  bool directed() const { return directed_; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {targets_.data() + offsets_[static_cast<std::size_t>(v)],
            targets_.data() + offsets_[static_cast<std::size_t>(v) + 1]};
  }
  std::size_t degree(NodeId v) const {
    return offsets_[static_cast<std::size_t>(v) + 1] - offsets_[static_cast<std::size_t>(v)];
  }
  bool has_edge(NodeId u, NodeId v) const;

  std::vector<std::size_t> out_degrees() const;
  std::vector<std::size_t> in_degrees() const;

  const std::vector<std::size_t>& csr_offsets() const { return offsets_; }
  const std::vector<NodeId>& csr_targets() const { return targets_; }

  /// Canonical edge list: every arc for directed graphs, pairs with src < dst
  /// for undirected graphs. Sorted.
  std::vector<Edge> edges() const;

  const std::optional<Tensor2>& features() const { return features_; }
  std::size_t feature_dim() const { return features_ ? features_->cols() : 0; }
  const std::optional<std::vector<int>>& node_labels() const { return node_labels_; }
  std::optional<int> graph_label() const { return graph_label_; }

  Graph with_features(Tensor2 features) const;
  Graph with_node_labels(std::vector<int> labels) const;
  Graph with_graph_label(int label) const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> targets_;
  bool directed_ = false;
  std::optional<Tensor2> features_;
  std::optional<std::vector<int>> node_labels_;
  std::optional<int> graph_label_;
};

/// Sorted set of node ids, optionally tagged with the set it complements.
struct NodeSubset {
  std::vector<NodeId> members;
  std::optional<std::string> complement_of;

  /// Validates strict ordering and range. Throws ConfigError.
  static NodeSubset make(std::vector<NodeId> members, std::size_t num_nodes,
                         std::optional<std::string> complement_of = std::nullopt);
  static NodeSubset all(std::size_t num_nodes);
  /// All nodes of a graph with `num_nodes` nodes except `excluded`.
  static NodeSubset complement(std::size_t num_nodes, std::span<const NodeId> excluded, std::string tag);

  std::size_t size() const { return members.size(); }
  bool contains(NodeId v) const;
};

struct InducedSubgraph {
  Graph graph;
  /// old id -> new id, kNoNode for dropped nodes.
  std::vector<NodeId> old_to_new;
};

/// Subgraph on `keep` with every edge whose endpoints are both kept. Node ids
/// are relabeled in ascending original order; features and labels follow.
InducedSubgraph induced_subgraph(const Graph& g, const NodeSubset& keep);

/// Weakly connected component id per node, numbered in order of the smallest
/// member.
std::vector<int> connected_components(const Graph& g);
std::size_t count_components(std::span<const int> components);

/// Undirected graph with edge {i,j} whenever (i,j) or (j,i) is present.
Graph symmetrize(const Graph& g);

}  // namespace lvn
