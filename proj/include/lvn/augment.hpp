#pragma once

#include <map>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lvn/centrality.hpp"
#include "lvn/graph.hpp"

namespace lvn {

enum class EdgeMode { Undirected, Directed };

std::string_view to_string(EdgeMode m);
EdgeMode parse_edge_mode(std::string_view name);

/// One local virtual node: slot `slot` of the group standing in for central
/// node `origin_node` (an id of the input graph).
struct VirtualNodeRecord {
  int group = 0;
  int slot = 0;
  NodeId origin_node = kNoNode;
  std::vector<double> origin_features;
};

/// Graph with its central nodes replaced by LVN groups.
///
/// Surviving original nodes keep ascending order and occupy ids
/// [0, num_original()); the LVN for (group g, slot m) has id
/// num_original() + g * n_c + m and is described by registry[g * n_c + m].
struct AugmentedGraph {
  Graph graph;
  std::vector<VirtualNodeRecord> registry;
  std::size_t n_c = 0;
  std::size_t n_s = 0;
  EdgeMode edge_mode = EdgeMode::Undirected;
  /// Input node id -> augmented id; kNoNode for removed central nodes.
  std::vector<NodeId> old_to_new;
  /// Groups whose LVNs ended up without any edge.
  std::vector<int> isolated_groups;

  std::size_t num_original() const { return graph.num_nodes() - registry.size(); }
  NodeId virtual_id(std::size_t group, std::size_t slot) const {
    return static_cast<NodeId>(num_original() + group * n_c + slot);
  }
  bool is_virtual(NodeId v) const { return static_cast<std::size_t>(v) >= num_original(); }
};

/// Replaces every central node of `selection` by n_c virtual nodes wired to
/// its neighborhood, links the groups of adjacent central nodes completely,
/// then removes the central nodes. In Directed mode each LVN receives from all
/// surviving neighbors but sends to a round-robin share of them.
AugmentedGraph lvn_augment(const Graph& g, const CentralSelection& selection, std::size_t n_c, EdgeMode mode);

/// Plain graph wrapped as an augmentation with no virtual nodes (n_s = 0).
AugmentedGraph identity_augmentation(const Graph& g);

/// Adds k global virtual nodes, each joined to every original node.
Graph gvn_augment(const Graph& g, std::size_t k);

/// Group index -> LVN ids ordered by slot.
std::map<int, std::vector<NodeId>> readout_groups(const AugmentedGraph& aug);

/// JSON document with nodes, edges (with a `directed` flag) and the registry.
nlohmann::json augmented_to_json(const AugmentedGraph& aug);

}  // namespace lvn
