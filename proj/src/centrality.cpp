#include "lvn/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lvn/error.hpp"
#include "lvn/rng.hpp"

namespace lvn {

std::string_view to_string(CentralityMethod m) {
  switch (m) {
    case CentralityMethod::Degree: return "degree";
    case CentralityMethod::PageRank: return "pagerank";
    case CentralityMethod::LabelPropOutDegree: return "labelprop";
  }
  return "unknown";
}

CentralityMethod parse_centrality(std::string_view name) {
  if (name == "degree") return CentralityMethod::Degree;
  if (name == "pagerank") return CentralityMethod::PageRank;
  if (name == "labelprop") return CentralityMethod::LabelPropOutDegree;
  throw ConfigError("unknown centrality '" + std::string(name) + "' (expected degree, pagerank or labelprop)");
}

CentralityScores degree_centrality(const Graph& g) {
  CentralityScores out;
  out.method = CentralityMethod::Degree;
  out.scores.resize(g.num_nodes());
  for (std::size_t v = 0; v < g.num_nodes(); ++v) out.scores[v] = static_cast<double>(g.degree(static_cast<NodeId>(v)));
  return out;
}

CentralityScores pagerank(const Graph& g, PageRankOptions opts) {
  if (!(opts.damping > 0.0 && opts.damping < 1.0)) throw ConfigError("pagerank: damping must lie in (0, 1)");
  const std::size_t n = g.num_nodes();
  CentralityScores out;
  out.method = CentralityMethod::PageRank;
  if (n == 0) return out;

  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> x(n, inv_n), next(n);
  out.converged = false;
  for (std::size_t it = 0; it < opts.max_iter; ++it) {
    double dangling = 0.0;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t u = 0; u < n; ++u) {
      const auto nbrs = g.neighbors(static_cast<NodeId>(u));
      if (nbrs.empty()) {
        dangling += x[u];
        continue;
      }
      const double share = x[u] / static_cast<double>(nbrs.size());
      for (NodeId v : nbrs) next[static_cast<std::size_t>(v)] += share;
    }
    const double base = (1.0 - opts.damping) * inv_n + opts.damping * dangling * inv_n;
    double delta = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      next[v] = opts.damping * next[v] + base;
      delta += std::abs(next[v] - x[v]);
    }
    x.swap(next);
    out.iterations = it + 1;
    if (delta < opts.tol) {
      out.converged = true;
      break;
    }
  }
  out.scores = std::move(x);
  return out;
}

CentralityScores labelprop_select(const Graph& g, LabelPropOptions opts) {
  const std::size_t n = g.num_nodes();
  std::vector<int> label(n);
  std::iota(label.begin(), label.end(), 0);
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  // dense counter indexed by label; touched entries are reset after use
  std::vector<int> votes(n, 0);
  std::vector<int> touched;
  Rng rng(opts.seed);

  std::size_t sweeps = 0;
  for (; sweeps < opts.max_sweeps; ++sweeps) {
    rng.shuffle(std::span<NodeId>(order));
    bool changed = false;
    for (NodeId v : order) {
      const auto nbrs = g.neighbors(v);
      if (nbrs.empty()) continue;
      int best = -1, best_votes = 0;
      for (NodeId u : nbrs) {
        const int l = label[static_cast<std::size_t>(u)];
        if (votes[static_cast<std::size_t>(l)]++ == 0) touched.push_back(l);
      }
      for (int l : touched) {
        const int c = votes[static_cast<std::size_t>(l)];
        if (c > best_votes || (c == best_votes && l < best)) {
          best = l;
          best_votes = c;
        }
        votes[static_cast<std::size_t>(l)] = 0;
      }
      touched.clear();
      if (best != label[static_cast<std::size_t>(v)]) {
        label[static_cast<std::size_t>(v)] = best;
        changed = true;
      }
    }
    if (!changed) {
      ++sweeps;
      break;
    }
  }

  // renumber communities by smallest member
  std::vector<int> remap(n, -1);
  int next = 0;
  std::vector<int> community(n);
  for (std::size_t v = 0; v < n; ++v) {
    int& r = remap[static_cast<std::size_t>(label[v])];
    if (r == -1) r = next++;
    community[v] = r;
  }

  CentralityScores out;
  out.method = CentralityMethod::LabelPropOutDegree;
  out.iterations = sweeps;
  out.scores.assign(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    for (NodeId u : g.neighbors(static_cast<NodeId>(v))) {
      if (community[static_cast<std::size_t>(u)] != community[v]) out.scores[v] += 1.0;
    }
  }
  out.communities = std::move(community);
  return out;
}

bool CentralSelection::contains(NodeId v) const { return std::binary_search(members.begin(), members.end(), v); }

int CentralSelection::group_of(NodeId v) const {
  const auto it = std::find(ranked.begin(), ranked.end(), v);
  return it == ranked.end() ? -1 : static_cast<int>(it - ranked.begin());
}

std::vector<NodeId> rank_central(const CentralityScores& scores, const Graph& g) {
  const std::size_t n = g.num_nodes();
  if (scores.scores.size() != n) throw ConfigError("rank_central: score count does not match node count");
  for (double s : scores.scores) {
    if (!std::isfinite(s)) throw NumericalError("rank_central: non-finite centrality score");
  }
  const auto before = [&](NodeId a, NodeId b) {
    const double sa = scores.scores[static_cast<std::size_t>(a)], sb = scores.scores[static_cast<std::size_t>(b)];
    return sa != sb ? sa > sb : a < b;
  };
  std::vector<NodeId> global(n);
  std::iota(global.begin(), global.end(), NodeId{0});
  std::sort(global.begin(), global.end(), before);
  if (scores.method != CentralityMethod::LabelPropOutDegree) return global;

  if (!scores.communities || scores.communities->size() != n) {
    throw ConfigError("rank_central: label-propagation scores carry no communities");
  }
  const auto& comm = *scores.communities;
  // global order visits each community's best node first
  std::vector<bool> seen(count_components(comm), false);
  std::vector<NodeId> winners, rest;
  for (NodeId v : global) {
    auto c = static_cast<std::size_t>(comm[static_cast<std::size_t>(v)]);
    if (!seen[c]) {
      seen[c] = true;
      winners.push_back(v);
    } else {
      rest.push_back(v);
    }
  }
  winners.insert(winners.end(), rest.begin(), rest.end());
  return winners;
}

CentralSelection select_central(const CentralityScores& scores, const Graph& g, std::size_t n_s) {
  if (n_s < 1 || n_s > g.num_nodes()) {
    throw ConfigError("select_central: n_s=" + std::to_string(n_s) + " must lie in [1, " +
                      std::to_string(g.num_nodes()) + "]");
  }
  auto ranking = rank_central(scores, g);
  CentralSelection sel;
  sel.ranked.assign(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(n_s));
  sel.members = sel.ranked;
  std::sort(sel.members.begin(), sel.members.end());
  return sel;
}

CentralityScores compute_centrality(const Graph& g, CentralityMethod method, std::uint64_t seed) {
  switch (method) {
    case CentralityMethod::Degree: return degree_centrality(g);
    case CentralityMethod::PageRank: return pagerank(g);
    case CentralityMethod::LabelPropOutDegree: return labelprop_select(g, {.seed = seed});
  }
  throw ConfigError("compute_centrality: unknown method");
}

}  // namespace lvn
