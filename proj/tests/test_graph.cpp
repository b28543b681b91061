#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "lvn/datasets.hpp"
#include "lvn/error.hpp"
#include "lvn/graph.hpp"
#include "oracles.hpp"

using namespace lvn;
namespace fs = std::filesystem;

namespace {

std::vector<std::size_t> degrees(const Graph& g) {
  std::vector<std::size_t> d;
  for (std::size_t v = 0; v < g.num_nodes(); ++v) d.push_back(g.degree(static_cast<NodeId>(v)));
  return d;
}

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("lvn_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  os << text;
}

}  // namespace

TEST_CASE("build: path, singleton, star") {
  const std::vector<Edge> path{{0, 1}, {1, 2}};
  const Graph p = Graph::build(3, path, false);
  CHECK(degrees(p) == std::vector<std::size_t>{1, 2, 1});
  CHECK(p.num_edges() == 2);

  const Graph single = Graph::build(1, {}, false);
  CHECK(single.num_nodes() == 1);
  CHECK(single.num_edges() == 0);

  const std::vector<Edge> star{{0, 1}, {0, 2}, {0, 3}};
  CHECK(Graph::build(4, star, false).degree(0) == 3);
}

TEST_CASE("build: errors name the offending pair") {
  const std::vector<Edge> loop{{1, 1}};
  CHECK_THROWS_AS(Graph::build(3, loop, false), DataError);
  try {
    Graph::build(3, loop, false);
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("(1,1)") != std::string::npos);
  }
  const std::vector<Edge> out{{0, 3}};
  CHECK_THROWS_AS(Graph::build(3, out, false), DataError);
}

TEST_CASE("build: duplicates and both directions merge") {
  const std::vector<Edge> e{{0, 1}, {1, 0}, {0, 1}, {2, 1}};
  const Graph g = Graph::build(3, e, false);
  CHECK(g.num_edges() == 2);
  CHECK(g.has_edge(1, 0));
  CHECK(g.has_edge(1, 2));
  const Graph d = Graph::build(3, e, true);
  CHECK(d.num_edges() == 3);
  CHECK_FALSE(d.has_edge(1, 2));
}

TEST_CASE("property: edge list round trip and CSR invariants") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(64);
    std::set<std::pair<NodeId, NodeId>> canon;
    std::vector<Edge> raw;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        if (u == v || rng.uniform01() > 0.08) continue;
        raw.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
        canon.insert({static_cast<NodeId>(std::min(u, v)), static_cast<NodeId>(std::max(u, v))});
      }
    }
    const Graph g = Graph::build(n, raw, false);
    std::set<std::pair<NodeId, NodeId>> got;
    for (const Edge& e : g.edges()) got.insert({e.src, e.dst});
    CHECK(got == canon);

    const auto& off = g.csr_offsets();
    CHECK(off.back() == g.csr_targets().size());
    std::size_t deg_sum = 0;
    for (std::size_t v = 0; v < n; ++v) {
      CHECK(off[v] <= off[v + 1]);
      const auto nb = g.neighbors(static_cast<NodeId>(v));
      for (std::size_t k = 0; k < nb.size(); ++k) {
        CHECK(nb[k] != static_cast<NodeId>(v));
        if (k > 0) CHECK(nb[k - 1] < nb[k]);
        CHECK(g.has_edge(nb[k], static_cast<NodeId>(v)));
      }
      deg_sum += nb.size();
    }
    CHECK(deg_sum == 2 * g.num_edges());
  }
}

TEST_CASE("induced_subgraph") {
  const Graph tri = oracle::complete_graph(3);
  const auto sub = induced_subgraph(tri, NodeSubset::make({0, 1}, 3));
  CHECK(sub.graph.num_nodes() == 2);
  CHECK(sub.graph.num_edges() == 1);

  const auto same = induced_subgraph(tri, NodeSubset::all(3));
  CHECK(same.graph == tri);
  CHECK(same.old_to_new == std::vector<NodeId>{0, 1, 2});

  const Graph star = oracle::star_graph(4);
  const auto leaves = induced_subgraph(star, NodeSubset::make({1, 2, 3}, 4));
  CHECK(leaves.graph.num_nodes() == 3);
  CHECK(leaves.graph.num_edges() == 0);
  CHECK(leaves.old_to_new == std::vector<NodeId>{kNoNode, 0, 1, 2});

  CHECK_THROWS_AS(induced_subgraph(star, NodeSubset::make({}, 4)), ConfigError);
}

TEST_CASE("induced_subgraph filters features and labels") {
  const std::vector<Edge> e{{0, 1}, {1, 2}};
  Graph g = Graph::build(3, e, false, Tensor2(3, 1, std::vector<double>{10, 20, 30}));
  g = g.with_node_labels({0, 1, 2}).with_graph_label(1);
  const auto sub = induced_subgraph(g, NodeSubset::make({0, 2}, 3));
  CHECK(sub.graph.features()->data() == std::vector<double>{10, 30});
  CHECK(*sub.graph.node_labels() == std::vector<int>{0, 2});
  CHECK(sub.graph.graph_label() == 1);
}

TEST_CASE("NodeSubset validation") {
  CHECK_THROWS_AS(NodeSubset::make({2, 1}, 3), ConfigError);
  CHECK_THROWS_AS(NodeSubset::make({1, 1}, 3), ConfigError);
  CHECK_THROWS_AS(NodeSubset::make({3}, 3), ConfigError);
  const std::vector<NodeId> ex{1, 3};
  const auto c = NodeSubset::complement(5, ex, "C");
  CHECK(c.members == std::vector<NodeId>{0, 2, 4});
  CHECK(c.complement_of == "C");
  CHECK(c.contains(2));
  CHECK_FALSE(c.contains(3));
}

TEST_CASE("connected_components") {
  CHECK(connected_components(oracle::path_graph(3)) == std::vector<int>{0, 0, 0});
  const std::vector<Edge> two{{0, 1}, {2, 3}};
  CHECK(connected_components(Graph::build(4, two, false)) == std::vector<int>{0, 0, 1, 1});
  CHECK(connected_components(Graph::build(3, {}, false)) == std::vector<int>{0, 1, 2});
  const std::vector<Edge> arc{{2, 0}};
  CHECK(connected_components(Graph::build(3, arc, true)) == std::vector<int>{0, 1, 0});
}

TEST_CASE("symmetrize") {
  const Graph u = oracle::path_graph(4);
  CHECK(symmetrize(u) == u);
  const std::vector<Edge> one{{0, 1}};
  const Graph s = symmetrize(Graph::build(2, one, true));
  CHECK_FALSE(s.directed());
  CHECK(s.num_edges() == 1);
  const std::vector<Edge> cyc{{0, 1}, {1, 0}};
  CHECK(symmetrize(Graph::build(2, cyc, true)).num_edges() == 1);

  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    std::vector<Edge> arcs;
    for (int k = 0; k < 30; ++k) {
      const auto a = static_cast<NodeId>(rng.below(12)), b = static_cast<NodeId>(rng.below(12));
      if (a != b) arcs.push_back({a, b});
    }
    const Graph once = symmetrize(Graph::build(12, arcs, true));
    CHECK(symmetrize(once) == once);
  }
}

TEST_CASE("load_tudataset: MUTAG statistics") {
  const GraphDataset ds = load_tudataset(fs::path(LVN_DATA_DIR) / "MUTAG");
  CHECK(ds.name == "MUTAG");
  CHECK(ds.size() == 188);
  CHECK(ds.num_classes == 2);
  CHECK(ds.feature_dim == 7);
  double nodes = 0, edges = 0;
  for (const Graph& g : ds.graphs) {
    nodes += static_cast<double>(g.num_nodes());
    edges += static_cast<double>(g.num_edges());
  }
  CHECK(nodes / 188.0 == doctest::Approx(17.93).epsilon(0.001));
  // the reference statistic counts stored arcs
  CHECK(2.0 * edges / 188.0 == doctest::Approx(39.59).epsilon(0.001));
  ds.validate();
  for (const Graph& g : ds.graphs) {
    for (std::size_t v = 0; v < g.num_nodes(); ++v) {
      double s = 0;
      for (double x : g.features()->row(v)) s += x;
      CHECK(s == 1.0);
    }
  }
}

TEST_CASE("load_tudataset is order-stable") {
  const auto dir = fs::path(LVN_DATA_DIR) / "MUTAG";
  const GraphDataset a = load_tudataset(dir), b = load_tudataset(dir);
  CHECK(a.graphs == b.graphs);
  CHECK(a.labels == b.labels);
}

TEST_CASE("load_tudataset: synthetic triangle and format errors") {
  const fs::path dir = temp_dir("tu") / "TRI";
  fs::create_directories(dir);
  write_file(dir / "TRI_A.txt", "1, 2\n2, 3\n3, 1\n2, 1\n");
  write_file(dir / "TRI_graph_indicator.txt", "1\n1\n1\n");
  write_file(dir / "TRI_graph_labels.txt", "-1\n");
  {
    const GraphDataset ds = load_tudataset(dir);
    CHECK(ds.size() == 1);
    CHECK(ds.graphs[0].num_nodes() == 3);
    CHECK(ds.graphs[0].num_edges() == 3);
    CHECK(ds.labels[0] == 0);
    CHECK(ds.feature_dim == 0);
    const GraphDataset injected = inject_constant_feature(ds);
    CHECK(injected.feature_dim == 1);
    CHECK(injected.graphs[0].features()->data() == std::vector<double>{1, 1, 1});
    CHECK_THROWS_AS(inject_constant_feature(injected), ConfigError);
  }

  write_file(dir / "TRI_graph_indicator.txt", "1\n1\n2\n");
  write_file(dir / "TRI_graph_labels.txt", "1\n2\n");
  CHECK_THROWS_AS(load_tudataset(dir), DataError);  // edge crosses graphs

  write_file(dir / "TRI_graph_indicator.txt", "2\n1\n1\n");
  CHECK_THROWS_AS(load_tudataset(dir), DataError);  // not monotone

  fs::remove(dir / "TRI_A.txt");
  CHECK_THROWS_AS(load_tudataset(dir), DataError);
}

TEST_CASE("inject_constant_feature on a one-node graph") {
  GraphDataset ds;
  ds.name = "one";
  ds.graphs.push_back(Graph::build(1, {}, false));
  ds.labels = {0};
  ds.num_classes = 1;
  const auto out = inject_constant_feature(ds);
  CHECK(out.graphs[0].features()->data() == std::vector<double>{1.0});
}

TEST_CASE("make_splits sizes and determinism") {
  const auto s = make_splits(188, kGraphTaskSplit, 3);
  CHECK(s.train_idx.size() == 150);
  CHECK(s.val_idx.size() == 19);
  CHECK(s.test_idx.size() == 19);
  const auto t = make_splits(10, kGraphTaskSplit, 3);
  CHECK(t.train_idx.size() == 8);
  CHECK(t.val_idx.size() == 1);
  CHECK(t.test_idx.size() == 1);
  CHECK(make_splits(188, kGraphTaskSplit, 3) == s);
  CHECK_FALSE(make_splits(188, kGraphTaskSplit, 4) == s);
  CHECK_THROWS_AS(make_splits(2, kGraphTaskSplit, 0), ConfigError);
  CHECK_THROWS_AS(make_splits(10, SplitFractions{0.5, 0.1, 0.1}, 0), ConfigError);
}

TEST_CASE("property: splits partition the items") {
  Rng rng(99);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 3 + rng.below(998);
    for (const auto& f : {kGraphTaskSplit, kNodeTaskSplit}) {
      const auto s = make_splits(n, f, rng.next());
      std::vector<int> seen(n, 0);
      for (auto i : s.train_idx) ++seen[i];
      for (auto i : s.val_idx) ++seen[i];
      for (auto i : s.test_idx) ++seen[i];
      CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    }
  }
}

TEST_CASE("split cache round trip") {
  const fs::path dir = temp_dir("splits");
  const auto s = make_splits(50, kNodeTaskSplit, 17);
  save_split(dir / "nested" / "split_0.json", s);
  CHECK(load_split(dir / "nested" / "split_0.json") == s);
  write_file(dir / "bad.json", "{\"seed\": 1}");
  CHECK_THROWS_AS(load_split(dir / "bad.json"), DataError);
}

TEST_CASE("load_node_dataset") {
  const fs::path dir = temp_dir("node");
  write_file(dir / "toy.json", R"({"num_nodes": 2, "edges": [[0, 1]], "features": [[1.0], [0.0]], "labels": [0, 1]})");
  const Graph g = load_node_dataset(dir / "toy.json");
  CHECK(g.num_edges() == 1);
  CHECK_FALSE(g.directed());
  CHECK(*g.node_labels() == std::vector<int>{0, 1});

  write_file(dir / "loop.json", R"({"num_nodes": 2, "edges": [[1, 1]], "features": [[1], [0]], "labels": [0, 1]})");
  CHECK_THROWS_AS(load_node_dataset(dir / "loop.json"), DataError);
  write_file(dir / "nolabels.json", R"({"num_nodes": 2, "edges": [[0, 1]], "features": [[1], [0]]})");
  CHECK_THROWS_AS(load_node_dataset(dir / "nolabels.json"), DataError);
  write_file(dir / "broken.json", R"({"num_nodes": 2, "edges": [[0]]})");
  CHECK_THROWS_AS(load_node_dataset(dir / "broken.json"), DataError);

  const Graph sbm = load_node_dataset(fs::path(LVN_DATA_DIR) / "fixtures" / "sbm_node.json");
  CHECK(sbm.num_nodes() == 60);
  CHECK(graph_from_json(graph_to_json(sbm)) == sbm);
}
