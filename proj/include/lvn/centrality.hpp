#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lvn/graph.hpp"

namespace lvn {

enum class CentralityMethod { Degree, PageRank, LabelPropOutDegree };

std::string_view to_string(CentralityMethod m);
/// Accepts "degree", "pagerank", "labelprop". Throws ConfigError.
CentralityMethod parse_centrality(std::string_view name);

struct CentralityScores {
  CentralityMethod method = CentralityMethod::Degree;
  std::vector<double> scores;
  /// Community id per node; set only by label propagation.
  std::optional<std::vector<int>> communities;
  /// False when PageRank stopped at max_iter before reaching tol.
  bool converged = true;
  std::size_t iterations = 0;
};

struct PageRankOptions {
  double damping = 0.85;
  double tol = 1e-8;
  std::size_t max_iter = 200;
};

struct LabelPropOptions {
  std::uint64_t seed = 0;
  std::size_t max_sweeps = 100;
};

/// score(v) = |N(v)| (out-degree for directed graphs).
CentralityScores degree_centrality(const Graph& g);

/// Power iteration with uniform teleport; dangling mass is spread uniformly.
CentralityScores pagerank(const Graph& g, PageRankOptions opts = {});

/// Asynchronous label propagation, then score(v) = number of neighbors in a
/// different community.
CentralityScores labelprop_select(const Graph& g, LabelPropOptions opts = {});

/// The set C of central nodes. `ranked[k]` is the node whose LVN group has
/// index k; `members` holds the same nodes sorted ascending.
struct CentralSelection {
  std::vector<NodeId> members;
  std::vector<NodeId> ranked;

  std::size_t n_s() const { return ranked.size(); }
  bool contains(NodeId v) const;
  /// Group index c(v), or -1 when v is not central.
  int group_of(NodeId v) const;
};

/// Full central-node ranking; select_central returns its prefixes. Degree and
/// PageRank rank globally by score; label-propagation mode ranks one winner
/// per community first, then the remaining nodes by score. Ties go to the
/// smaller node id.
std::vector<NodeId> rank_central(const CentralityScores& scores, const Graph& g);

/// Top n_s of rank_central. Throws ConfigError unless 1 <= n_s <= num_nodes.
CentralSelection select_central(const CentralityScores& scores, const Graph& g, std::size_t n_s);

/// Convenience wrapper dispatching on the method name.
CentralityScores compute_centrality(const Graph& g, CentralityMethod method, std::uint64_t seed = 0);

}  // namespace lvn
