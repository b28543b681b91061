#include "lvn/graph.hpp"

#include <algorithm>
#include <numeric>

#include "lvn/error.hpp"

namespace lvn {

namespace {

std::string pair_string(NodeId a, NodeId b) {
  return "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

}  // namespace

Graph Graph::build(std::size_t num_nodes, std::span<const Edge> edges, bool directed,
                   std::optional<Tensor2> features) {
  const auto n = static_cast<long long>(num_nodes);
  std::vector<Edge> arcs;
  arcs.reserve(directed ? edges.size() : 2 * edges.size());
  for (const Edge& e : edges) {
    if (e.src < 0 || e.dst < 0 || e.src >= n || e.dst >= n) {
      throw DataError("build_graph: endpoint out of range in edge " + pair_string(e.src, e.dst) +
                      " for " + std::to_string(num_nodes) + " nodes");
    }
    if (e.src == e.dst) throw DataError("build_graph: self-loop " + pair_string(e.src, e.dst));
    arcs.push_back(e);
    if (!directed) arcs.push_back({e.dst, e.src});
  }
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());

  if (features && features->rows() != num_nodes) {
    throw DataError("build_graph: feature matrix has " + std::to_string(features->rows()) + " rows for " +
                    std::to_string(num_nodes) + " nodes");
  }

  Graph g;
  g.directed_ = directed;
  g.offsets_.assign(num_nodes + 1, 0);
  g.targets_.reserve(arcs.size());
  for (const Edge& e : arcs) {
    ++g.offsets_[static_cast<std::size_t>(e.src) + 1];
    g.targets_.push_back(e.dst);
  }
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
  g.features_ = std::move(features);
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  const auto row = neighbors(u);
  return std::binary_search(row.begin(), row.end(), v);
}

std::vector<std::size_t> Graph::out_degrees() const {
  std::vector<std::size_t> d(num_nodes());
  for (std::size_t v = 0; v < d.size(); ++v) d[v] = offsets_[v + 1] - offsets_[v];
  return d;
}

std::vector<std::size_t> Graph::in_degrees() const {
  std::vector<std::size_t> d(num_nodes(), 0);
  for (NodeId t : targets_) ++d[static_cast<std::size_t>(t)];
  return d;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (std::size_t u = 0; u < num_nodes(); ++u) {
    for (NodeId v : neighbors(static_cast<NodeId>(u))) {
      if (directed_ || static_cast<NodeId>(u) < v) out.push_back({static_cast<NodeId>(u), v});
    }
  }
  return out;
}

Graph Graph::with_features(Tensor2 features) const {
  if (features.rows() != num_nodes()) {
    throw DataError("with_features: " + std::to_string(features.rows()) + " rows for " +
                    std::to_string(num_nodes()) + " nodes");
  }
  Graph g = *this;
  g.features_ = std::move(features);
  return g;
}

Graph Graph::with_node_labels(std::vector<int> labels) const {
  if (labels.size() != num_nodes()) throw DataError("with_node_labels: label count does not match node count");
  Graph g = *this;
  g.node_labels_ = std::move(labels);
  return g;
}

Graph Graph::with_graph_label(int label) const {
  Graph g = *this;
  g.graph_label_ = label;
  return g;
}

NodeSubset NodeSubset::make(std::vector<NodeId> members, std::size_t num_nodes,
                            std::optional<std::string> complement_of) {
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i] < 0 || static_cast<std::size_t>(members[i]) >= num_nodes) {
      throw ConfigError("NodeSubset: member " + std::to_string(members[i]) + " out of range");
    }
    if (i > 0 && members[i] <= members[i - 1]) throw ConfigError("NodeSubset: members must be strictly increasing");
  }
  return NodeSubset{std::move(members), std::move(complement_of)};
}

NodeSubset NodeSubset::all(std::size_t num_nodes) {
  std::vector<NodeId> m(num_nodes);
  std::iota(m.begin(), m.end(), NodeId{0});
  return NodeSubset{std::move(m), std::nullopt};
}

NodeSubset NodeSubset::complement(std::size_t num_nodes, std::span<const NodeId> excluded, std::string tag) {
  std::vector<bool> drop(num_nodes, false);
  for (NodeId v : excluded) {
    if (v < 0 || static_cast<std::size_t>(v) >= num_nodes) throw ConfigError("NodeSubset: excluded node out of range");
    drop[static_cast<std::size_t>(v)] = true;
  }
  std::vector<NodeId> m;
  for (std::size_t v = 0; v < num_nodes; ++v) {
    if (!drop[v]) m.push_back(static_cast<NodeId>(v));
  }
  return NodeSubset{std::move(m), std::move(tag)};
}

bool NodeSubset::contains(NodeId v) const { return std::binary_search(members.begin(), members.end(), v); }

InducedSubgraph induced_subgraph(const Graph& g, const NodeSubset& keep) {
  if (keep.members.empty()) throw ConfigError("induced_subgraph: empty keep set");
  const std::size_t n = g.num_nodes();
  std::vector<NodeId> old_to_new(n, kNoNode);
  for (std::size_t i = 0; i < keep.members.size(); ++i) {
    const NodeId v = keep.members[i];
    if (v < 0 || static_cast<std::size_t>(v) >= n) throw ConfigError("induced_subgraph: keep set out of range");
    old_to_new[static_cast<std::size_t>(v)] = static_cast<NodeId>(i);
  }

  std::vector<Edge> edges;
  for (NodeId u : keep.members) {
    for (NodeId v : g.neighbors(u)) {
      const NodeId nv = old_to_new[static_cast<std::size_t>(v)];
      if (nv != kNoNode) edges.push_back({old_to_new[static_cast<std::size_t>(u)], nv});
    }
  }

  std::optional<Tensor2> features;
  if (g.features()) {
    const Tensor2& src = *g.features();
    Tensor2 f(keep.size(), src.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      auto from = src.row(static_cast<std::size_t>(keep.members[i]));
      std::copy(from.begin(), from.end(), f.row(i).begin());
    }
    features = std::move(f);
  }
  // both directions are already present for undirected inputs; build merges them
  Graph sub = Graph::build(keep.size(), edges, g.directed(), std::move(features));
  if (g.node_labels()) {
    std::vector<int> labels(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) labels[i] = (*g.node_labels())[static_cast<std::size_t>(keep.members[i])];
    sub = sub.with_node_labels(std::move(labels));
  }
  if (g.graph_label()) sub = sub.with_graph_label(*g.graph_label());
  return {std::move(sub), std::move(old_to_new)};
}

std::vector<int> connected_components(const Graph& g) {
  Graph symmetric;
  if (g.directed()) symmetric = symmetrize(g);
  const Graph& und = g.directed() ? symmetric : g;
  const std::size_t n = und.num_nodes();
  std::vector<int> comp(n, -1);
  std::vector<NodeId> stack;
  int next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] != -1) continue;
    comp[s] = next;
    stack.push_back(static_cast<NodeId>(s));
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      for (NodeId v : und.neighbors(u)) {
        if (comp[static_cast<std::size_t>(v)] == -1) {
          comp[static_cast<std::size_t>(v)] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  return comp;
}

std::size_t count_components(std::span<const int> components) {
  int max_id = -1;
  for (int c : components) max_id = std::max(max_id, c);
  return static_cast<std::size_t>(max_id + 1);
}

Graph symmetrize(const Graph& g) {
  if (!g.directed()) return g;
  const auto arcs = g.edges();
  Graph out = Graph::build(g.num_nodes(), arcs, /*directed=*/false, g.features());
  if (g.node_labels()) out = out.with_node_labels(*g.node_labels());
  if (g.graph_label()) out = out.with_graph_label(*g.graph_label());
  return out;
}

}  // namespace lvn
