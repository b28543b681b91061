#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "lvn/error.hpp"
#include "lvn/experiment.hpp"
#include "oracles.hpp"

using namespace lvn;
namespace fs = std::filesystem;

namespace {

Graph cycle(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t v = 0; v < n; ++v) e.push_back({static_cast<NodeId>(v), static_cast<NodeId>((v + 1) % n)});
  return Graph::build(n, e, false);
}

/// Cycles (label 0) against stars (label 1); features are (1, degree).
GraphDataset cycles_and_stars(std::size_t count) {
  GraphDataset ds;
  ds.name = "shapes";
  ds.num_classes = 2;
  ds.feature_dim = 2;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t n = 6 + i % 5;
    const int label = static_cast<int>(i % 2);
    Graph g = label == 0 ? cycle(n) : oracle::star_graph(n);
    Tensor2 x(n, 2, 1.0);
    for (std::size_t v = 0; v < n; ++v) x(v, 1) = static_cast<double>(g.degree(static_cast<NodeId>(v)));
    ds.graphs.push_back(g.with_features(std::move(x)).with_graph_label(label));
    ds.labels.push_back(label);
  }
  return ds;
}

ExperimentConfig quick_graph_config() {
  ExperimentConfig c = ExperimentConfig::defaults(Task::GraphClassification);
  c.hidden_dim = 16;
  c.num_layers = 2;
  c.dropout = 0.0;
  c.lr = 0.01;
  c.max_epochs = 100;
  c.patience = 100;
  c.num_splits = 2;
  return c;
}

Graph sbm() { return load_node_dataset(fs::path(LVN_DATA_DIR) / "fixtures" / "sbm_node.json"); }

}  // namespace

TEST_CASE("config: defaults, overrides, unknown keys") {
  const auto node = ExperimentConfig::defaults(Task::NodeClassification);
  CHECK(node.hidden_dim == 128);
  CHECK(node.num_layers == 3);
  const auto graph = ExperimentConfig::defaults(Task::GraphClassification);
  CHECK(graph.hidden_dim == 64);
  CHECK(graph.num_layers == 4);
  CHECK(graph.lr == 1e-3);
  CHECK(graph.dropout == 0.5);

  ExperimentConfig c = graph;
  c.apply_override("n_s=3");
  c.apply_override("edge_mode=directed");
  c.apply_override("centrality=\"pagerank\"");
  c.apply_override("ns_values=[1,2]");
  CHECK(c.n_s == 3);
  CHECK(c.edge_mode == EdgeMode::Directed);
  CHECK(c.centrality == CentralityMethod::PageRank);
  CHECK(c.ns_values == std::vector<std::size_t>{1, 2});

  CHECK_THROWS_AS(c.apply_override("n_z=3"), ConfigError);
  CHECK_THROWS_AS(c.apply_override("n_s"), ConfigError);
  CHECK_THROWS_AS(c.apply_override("n_s=-1"), ConfigError);
  CHECK_THROWS_AS(c.apply_override("edge_mode=sideways"), ConfigError);
  CHECK_THROWS_AS(c.apply_json({{"hidden", 3}}), ConfigError);

  ExperimentConfig back = ExperimentConfig::defaults(Task::GraphClassification);
  back.apply_json(c.to_json());
  CHECK(back.to_json() == c.to_json());

  ExperimentConfig bad = graph;
  bad.n_c = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = graph;
  bad.dropout = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("config file loading") {
  const fs::path p = fs::temp_directory_path() / "lvn_test_cfg.json";
  {
    std::ofstream os(p);
    os << R"({"task": "node", "n_s": 2, "n_c": 3})";
  }
  const auto c = load_config(p, {"n_c=4"});
  CHECK(c.task == Task::NodeClassification);
  CHECK(c.hidden_dim == 128);
  CHECK(c.n_c == 4);
  {
    std::ofstream os(p);
    os << "{not json";
  }
  CHECK_THROWS_AS(load_config(p, {}), ConfigError);
  fs::remove(p);
  CHECK_THROWS_AS(load_config(fs::path("/nonexistent/cfg.json"), {}), ConfigError);
}

TEST_CASE("grid expansion") {
  ExperimentConfig c = quick_graph_config();
  c.grid = {{"n_s", {1, 2}}, {"n_c", {1, 2, 3}}};
  const auto all = expand_grid(c);
  CHECK(all.size() == 6);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& x : all) seen.insert({x.n_s, x.n_c});
  CHECK(seen.size() == 6);
  c.grid = nlohmann::json::object();
  CHECK(expand_grid(c).size() == 1);
}

TEST_CASE("mean and confidence interval") {
  const auto [m, ci] = mean_ci95({1, 2, 3, 4});
  CHECK(m == doctest::Approx(2.5));
  // sample std of 1..4 is sqrt(5/3)
  CHECK(ci == doctest::Approx(1.96 * std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(mean_ci95({0.7}).second == 0.0);
}

TEST_CASE("split seeds are distinct and stable") {
  CHECK(split_seed(0, 0) == split_seed(0, 0));
  CHECK(split_seed(0, 0) != split_seed(0, 1));
  CHECK(split_seed(0, 0) != split_seed(1, 0));
}

TEST_CASE("embedding drift and similarity") {
  const Tensor2 a(2, 2, std::vector<double>{1, 0, 0, 1});
  const Tensor2 b(2, 2, std::vector<double>{4, 4, 0, 1});
  const auto drift = track_embedding_drift({a, b});
  REQUIRE(drift.size() == 2);
  CHECK(drift[0] == std::vector<double>{0, 0});
  CHECK(drift[1][0] == doctest::Approx(5.0));
  CHECK(drift[1][1] == 0.0);

  const Tensor2 s = embedding_similarity(Tensor2(3, 2, std::vector<double>{1, 0, 0, 2, 0, 0}));
  CHECK(s(0, 0) == doctest::Approx(1.0));
  CHECK(s(0, 1) == doctest::Approx(0.0));
  CHECK(std::isnan(s(2, 0)));
  CHECK(std::isnan(s(2, 2)));
}

TEST_CASE("graph training learns a separable task and is deterministic") {
  const GraphDataset ds = cycles_and_stars(40);
  const ExperimentConfig c = quick_graph_config();
  const RunResult a = run_training(c, ds);
  const RunResult b = run_training(c, ds);
  REQUIRE(a.test_accuracies.size() == 2);
  CHECK(a.test_accuracies == b.test_accuracies);
  CHECK(a.splits == b.splits);
  CHECK(a.mean >= 0.75);
  for (const auto& o : a.outcomes) {
    CHECK(o.val_history.size() == o.epochs_run + 1);
    CHECK(o.best_epoch <= o.epochs_run);
  }

  ExperimentConfig par = c;
  par.jobs = 2;
  CHECK(run_training(par, ds).test_accuracies == a.test_accuracies);
}

TEST_CASE("zero epochs evaluates the initial model") {
  const GraphDataset ds = cycles_and_stars(40);
  ExperimentConfig c = quick_graph_config();
  c.max_epochs = 0;
  const RunResult r = run_training(c, ds);
  for (const auto& o : r.outcomes) {
    CHECK(o.epochs_run == 0);
    CHECK(o.best_epoch == 0);
    CHECK(o.val_history.size() == 1);
  }
}

TEST_CASE("graph training with local virtual nodes records embedding drift") {
  const GraphDataset ds = cycles_and_stars(30);
  ExperimentConfig c = quick_graph_config();
  c.n_s = 1;
  c.n_c = 2;
  c.edge_mode = EdgeMode::Directed;
  c.max_epochs = 10;
  c.num_splits = 1;
  const RunResult r = run_training(c, ds);
  CHECK(r.final_embedding_table.rows() == 2);
  CHECK(r.final_embedding_table.cols() == 16);
  REQUIRE(r.embedding_drift.size() >= 2);
  CHECK(r.embedding_drift.front() == std::vector<double>{0, 0});
  CHECK(r.embedding_drift.back()[0] > 0.0);

  const fs::path dir = fs::temp_directory_path() / "lvn_test_run";
  fs::remove_all(dir);
  write_run_outputs(dir, r);
  for (const char* f : {"results.json", "accuracies.csv", "drift.csv", "similarity.csv"}) CHECK(fs::exists(dir / f));
  std::ifstream is(dir / "results.json");
  const auto doc = nlohmann::json::parse(is);
  CHECK(doc.contains("mean"));
  fs::remove_all(dir);
}

TEST_CASE("grid picks the best validation run") {
  const GraphDataset ds = cycles_and_stars(20);
  ExperimentConfig c = quick_graph_config();
  c.max_epochs = 5;
  c.num_splits = 1;
  c.grid = {{"lr", {1e-3, 1e-2}}};
  const GridResult g = run_grid(c, ds);
  REQUIRE(g.runs.size() == 2);
  for (const auto& r : g.runs) CHECK(r.mean_val <= g.runs[g.best].mean_val);
}

TEST_CASE("node classification on a planted partition") {
  ExperimentConfig c = ExperimentConfig::defaults(Task::NodeClassification);
  c.hidden_dim = 16;
  c.num_layers = 2;
  c.lr = 0.01;
  c.max_epochs = 100;
  c.patience = 50;
  c.num_splits = 2;
  const Graph g = sbm();
  const RunResult plain = run_training(c, g);
  CHECK(plain.mean > 0.6);

  c.n_s = 2;
  c.n_c = 2;
  const RunResult lvn = run_training(c, g);
  CHECK(lvn.mean > 0.6);
  CHECK(lvn.final_embedding_table.rows() == 2);

  CHECK_THROWS_AS(run_training(c, cycles_and_stars(4)), ConfigError);
}

TEST_CASE("mlp probe reuses the given splits") {
  GraphDataset ds = cycles_and_stars(30);
  ExperimentConfig c = quick_graph_config();
  c.n_s = 1;
  c.n_c = 2;
  c.max_epochs = 5;
  std::vector<SplitSpec> splits{make_splits(ds.size(), {}, 5), make_splits(ds.size(), {}, 6)};
  Rng rng(1);
  Tensor2 table(2, 16);
  for (double& v : table.values()) v = rng.uniform(-1, 1);
  const ProbeResult r = run_mlp_probe(ds, c, splits, {table, std::nullopt});
  CHECK(r.splits == splits);
  CHECK(r.skipped_splits == std::vector<std::size_t>{1});
  CHECK(r.raw_accuracies.size() == 1);
  CHECK(r.embedded_accuracies.size() == 1);

  CHECK_THROWS_AS(run_mlp_probe(ds, c, splits, {table}), ConfigError);
  CHECK_THROWS_AS(run_mlp_probe(ds, c, splits, {Tensor2(3, 16), std::nullopt}), ConfigError);
  c.n_s = 0;
  CHECK_THROWS_AS(run_mlp_probe(ds, c, splits, {table, std::nullopt}), ConfigError);
}

TEST_CASE("connectivity suite") {
  std::vector<Graph> graphs{oracle::star_graph(16), oracle::path_graph(3), oracle::star_graph(12)};
  ExperimentConfig c = ExperimentConfig::defaults(Task::GraphClassification);
  c.ns_values = {1, 2};
  c.n_c = 2;
  c.r_max = 4;
  c.min_nodes = 5;
  const ConnectivityResult r = run_connectivity_suite(graphs, c);
  CHECK(r.graph_indices == std::vector<std::size_t>{0, 2});
  REQUIRE(r.mean_totals.size() == 2);
  CHECK(r.mean_totals[0] < r.mean_baseline);
  CHECK(r.mean_path_delta.r_values.size() == 4);
  CHECK(r.mean_path_delta.deltas[1] > 0.0);

  c.max_graphs = 1;
  CHECK(run_connectivity_suite(graphs, c).graph_indices == std::vector<std::size_t>{0});
  c.min_nodes = 100;
  CHECK_THROWS_AS(run_connectivity_suite(graphs, c), ConfigError);
}
