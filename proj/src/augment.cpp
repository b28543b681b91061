#include "lvn/augment.hpp"

#include <algorithm>

#include "lvn/error.hpp"

namespace lvn {

using json = nlohmann::json;

std::string_view to_string(EdgeMode m) { return m == EdgeMode::Directed ? "directed" : "undirected"; }

EdgeMode parse_edge_mode(std::string_view name) {
  if (name == "undirected") return EdgeMode::Undirected;
  if (name == "directed") return EdgeMode::Directed;
  throw ConfigError("unknown edge mode '" + std::string(name) + "' (expected undirected or directed)");
}

AugmentedGraph lvn_augment(const Graph& g, const CentralSelection& selection, std::size_t n_c, EdgeMode mode) {
  if (n_c == 0) throw ConfigError("lvn_augment: n_c must be at least 1");
  if (g.directed()) throw ConfigError("lvn_augment: input graph must be undirected");
  const std::size_t n = g.num_nodes();
  const std::size_t n_s = selection.n_s();
  if (n_s == 0 || n_s > n) throw ConfigError("lvn_augment: selection size out of range");

  std::vector<int> group(n, -1);
  for (std::size_t k = 0; k < n_s; ++k) {
    const NodeId v = selection.ranked[k];
    if (v < 0 || static_cast<std::size_t>(v) >= n) throw ConfigError("lvn_augment: central node out of range");
    if (group[static_cast<std::size_t>(v)] != -1) throw ConfigError("lvn_augment: duplicate central node");
    group[static_cast<std::size_t>(v)] = static_cast<int>(k);
  }

  AugmentedGraph aug;
  aug.n_c = n_c;
  aug.n_s = n_s;
  aug.edge_mode = mode;
  aug.old_to_new.assign(n, kNoNode);
  NodeId next = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (group[v] == -1) aug.old_to_new[v] = next++;
  }
  const auto base = static_cast<std::size_t>(next);
  const auto lvn_id = [&](std::size_t grp, std::size_t slot) { return static_cast<NodeId>(base + grp * n_c + slot); };

  std::vector<Edge> arcs;
  for (std::size_t u = 0; u < n; ++u) {
    if (group[u] != -1) continue;
    for (NodeId v : g.neighbors(static_cast<NodeId>(u))) {
      if (group[static_cast<std::size_t>(v)] == -1) arcs.push_back({aug.old_to_new[u], aug.old_to_new[static_cast<std::size_t>(v)]});
    }
  }

  for (std::size_t k = 0; k < n_s; ++k) {
    const NodeId center = selection.ranked[k];
    std::size_t position = 0;  // round-robin counter over surviving neighbors
    for (NodeId j : g.neighbors(center)) {
      const int other = group[static_cast<std::size_t>(j)];
      if (other != -1) {
        // adjacent central nodes: complete bipartite link between the groups,
        // emitted once from the lower group index
        if (static_cast<std::size_t>(other) > k) {
          for (std::size_t y = 0; y < n_c; ++y) {
            for (std::size_t z = 0; z < n_c; ++z) {
              arcs.push_back({lvn_id(k, y), lvn_id(static_cast<std::size_t>(other), z)});
              arcs.push_back({lvn_id(static_cast<std::size_t>(other), z), lvn_id(k, y)});
            }
          }
        }
        continue;
      }
      const NodeId nj = aug.old_to_new[static_cast<std::size_t>(j)];
      for (std::size_t m = 0; m < n_c; ++m) {
        arcs.push_back({nj, lvn_id(k, m)});
        if (mode == EdgeMode::Undirected) arcs.push_back({lvn_id(k, m), nj});
      }
      if (mode == EdgeMode::Directed) arcs.push_back({lvn_id(k, position % n_c), nj});
      ++position;
    }
  }

  const std::size_t total = base + n_s * n_c;
  std::optional<Tensor2> features;
  const std::size_t f = g.feature_dim();
  if (g.features()) {
    Tensor2 x(total, f);
    for (std::size_t v = 0; v < n; ++v) {
      if (group[v] != -1) continue;
      const auto src = g.features()->row(v);
      std::copy(src.begin(), src.end(), x.row(static_cast<std::size_t>(aug.old_to_new[v])).begin());
    }
    for (std::size_t k = 0; k < n_s; ++k) {
      const auto src = g.features()->row(static_cast<std::size_t>(selection.ranked[k]));
      for (std::size_t m = 0; m < n_c; ++m) std::copy(src.begin(), src.end(), x.row(static_cast<std::size_t>(lvn_id(k, m))).begin());
    }
    features = std::move(x);
  }
  aug.graph = Graph::build(total, arcs, mode == EdgeMode::Directed, std::move(features));

  if (g.node_labels()) {
    std::vector<int> labels(total);
    for (std::size_t v = 0; v < n; ++v) {
      if (group[v] == -1) labels[static_cast<std::size_t>(aug.old_to_new[v])] = (*g.node_labels())[v];
    }
    for (std::size_t k = 0; k < n_s; ++k) {
      for (std::size_t m = 0; m < n_c; ++m) {
        labels[static_cast<std::size_t>(lvn_id(k, m))] = (*g.node_labels())[static_cast<std::size_t>(selection.ranked[k])];
      }
    }
    aug.graph = aug.graph.with_node_labels(std::move(labels));
  }
  if (g.graph_label()) aug.graph = aug.graph.with_graph_label(*g.graph_label());

  const auto in_deg = aug.graph.in_degrees();
  aug.registry.reserve(n_s * n_c);
  for (std::size_t k = 0; k < n_s; ++k) {
    const NodeId center = selection.ranked[k];
    std::vector<double> origin;
    if (g.features()) {
      const auto r = g.features()->row(static_cast<std::size_t>(center));
      origin.assign(r.begin(), r.end());
    }
    bool isolated = true;
    for (std::size_t m = 0; m < n_c; ++m) {
      const NodeId id = lvn_id(k, m);
      if (aug.graph.degree(id) > 0 || in_deg[static_cast<std::size_t>(id)] > 0) isolated = false;
      aug.registry.push_back({static_cast<int>(k), static_cast<int>(m), center, origin});
    }
    if (isolated) aug.isolated_groups.push_back(static_cast<int>(k));
  }
  return aug;
}

AugmentedGraph identity_augmentation(const Graph& g) {
  AugmentedGraph aug;
  aug.graph = g;
  aug.old_to_new.resize(g.num_nodes());
  for (std::size_t v = 0; v < g.num_nodes(); ++v) aug.old_to_new[v] = static_cast<NodeId>(v);
  return aug;
}

Graph gvn_augment(const Graph& g, std::size_t k) {
  if (k == 0) throw ConfigError("gvn_augment: k must be at least 1");
  const std::size_t n = g.num_nodes();
  std::vector<Edge> arcs = g.edges();
  for (std::size_t m = 0; m < k; ++m) {
    const auto gvn = static_cast<NodeId>(n + m);
    for (std::size_t j = 0; j < n; ++j) {
      arcs.push_back({static_cast<NodeId>(j), gvn});
      if (g.directed()) arcs.push_back({gvn, static_cast<NodeId>(j)});
    }
  }
  std::optional<Tensor2> features;
  if (g.features()) {
    Tensor2 x(n + k, g.feature_dim());
    std::copy(g.features()->values().begin(), g.features()->values().end(), x.values().begin());
    features = std::move(x);
  }
  Graph out = Graph::build(n + k, arcs, g.directed(), std::move(features));
  if (g.graph_label()) out = out.with_graph_label(*g.graph_label());
  return out;
}

std::map<int, std::vector<NodeId>> readout_groups(const AugmentedGraph& aug) {
  std::map<int, std::vector<NodeId>> groups;
  for (std::size_t r = 0; r < aug.registry.size(); ++r) {
    const auto& rec = aug.registry[r];
    auto& ids = groups[rec.group];
    if (ids.size() <= static_cast<std::size_t>(rec.slot)) ids.resize(static_cast<std::size_t>(rec.slot) + 1, kNoNode);
    ids[static_cast<std::size_t>(rec.slot)] = static_cast<NodeId>(aug.num_original() + r);
  }
  return groups;
}

json augmented_to_json(const AugmentedGraph& aug) {
  const Graph& g = aug.graph;
  json doc;
  doc["num_nodes"] = g.num_nodes();
  doc["num_original"] = aug.num_original();
  doc["edge_mode"] = std::string(to_string(aug.edge_mode));
  doc["n_s"] = aug.n_s;
  doc["n_c"] = aug.n_c;

  // symmetric pairs are emitted once as undirected edges
  json edges = json::array();
  std::size_t count = 0;
  for (std::size_t u = 0; u < g.num_nodes(); ++u) {
    for (NodeId v : g.neighbors(static_cast<NodeId>(u))) {
      const auto su = static_cast<NodeId>(u);
      const bool mutual = !g.directed() || g.has_edge(v, su);
      if (mutual && v < su) continue;
      edges.push_back({{"src", su}, {"dst", v}, {"directed", !mutual}});
      ++count;
    }
  }
  doc["num_edges"] = count;
  doc["edges"] = std::move(edges);

  json registry = json::array();
  for (std::size_t r = 0; r < aug.registry.size(); ++r) {
    const auto& rec = aug.registry[r];
    registry.push_back({{"id", aug.num_original() + r},
                        {"group", rec.group},
                        {"slot", rec.slot},
                        {"origin_node", rec.origin_node},
                        {"origin_features", rec.origin_features}});
  }
  doc["registry"] = std::move(registry);
  doc["old_to_new"] = aug.old_to_new;
  doc["isolated_groups"] = aug.isolated_groups;
  return doc;
}

}  // namespace lvn
