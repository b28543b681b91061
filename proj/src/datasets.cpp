#include "lvn/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "lvn/error.hpp"
#include "lvn/rng.hpp"

namespace lvn {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Reads every integer field of a comma/whitespace separated file, one vector
// per non-empty line.
std::vector<std::vector<long long>> read_int_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::vector<long long>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::vector<long long> row;
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stoll(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": not an integer: '" + tok + "'");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<long long> read_int_column(const fs::path& path) {
  std::vector<long long> col;
  for (const auto& row : read_int_rows(path)) {
    if (row.size() != 1) throw DataError(path.string() + ": expected one value per line");
    col.push_back(row[0]);
  }
  return col;
}

fs::path require_file(const fs::path& dir, const std::string& name) {
  const fs::path p = dir / name;
  if (!fs::exists(p)) throw DataError("missing dataset file " + p.string());
  return p;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
}

}  // namespace

void GraphDataset::validate() const {
  if (graphs.size() != labels.size()) throw DataError(name + ": graph and label counts differ");
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
      throw DataError(name + ": label out of range for graph " + std::to_string(i));
    }
    if (graphs[i].feature_dim() != feature_dim) {
      throw DataError(name + ": graph " + std::to_string(i) + " has feature width " +
                      std::to_string(graphs[i].feature_dim()) + ", expected " + std::to_string(feature_dim));
    }
  }
}

GraphDataset load_tudataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a dataset directory: " + dir.string());
  const std::string ds = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();

  const auto indicator = read_int_column(require_file(dir, ds + "_graph_indicator.txt"));
  const auto raw_labels = read_int_column(require_file(dir, ds + "_graph_labels.txt"));
  const auto edge_rows = read_int_rows(require_file(dir, ds + "_A.txt"));
  std::vector<long long> node_labels;
  const fs::path node_label_path = dir / (ds + "_node_labels.txt");
  if (fs::exists(node_label_path)) {
    node_labels = read_int_column(node_label_path);
    if (node_labels.size() != indicator.size()) throw DataError(ds + ": node label count does not match node count");
  }

  const std::size_t num_graphs = raw_labels.size();
  // graph ids are 1-based and non-decreasing over node ids
  std::vector<std::size_t> local_id(indicator.size());
  std::vector<std::size_t> count(num_graphs, 0);
  for (std::size_t i = 0; i < indicator.size(); ++i) {
    const long long gid = indicator[i];
    if (gid < 1 || static_cast<std::size_t>(gid) > num_graphs) {
      throw DataError(ds + ": graph indicator out of range at node " + std::to_string(i + 1));
    }
    if (i > 0 && gid < indicator[i - 1]) {
      throw DataError(ds + ": graph indicator not monotone at node " + std::to_string(i + 1));
    }
    local_id[i] = count[static_cast<std::size_t>(gid - 1)]++;
  }

  std::vector<std::vector<Edge>> edges(num_graphs);
  for (const auto& row : edge_rows) {
    if (row.size() != 2) throw DataError(ds + "_A.txt: expected two node ids per line");
    const long long a = row[0], b = row[1];
    if (a < 1 || b < 1 || static_cast<std::size_t>(a) > indicator.size() ||
        static_cast<std::size_t>(b) > indicator.size()) {
      throw DataError(ds + "_A.txt: node id out of range in pair (" + std::to_string(a) + "," + std::to_string(b) + ")");
    }
    const long long ga = indicator[static_cast<std::size_t>(a - 1)];
    const long long gb = indicator[static_cast<std::size_t>(b - 1)];
    if (ga != gb) {
      throw DataError(ds + "_A.txt: edge (" + std::to_string(a) + "," + std::to_string(b) + ") crosses graphs " +
                      std::to_string(ga) + " and " + std::to_string(gb));
    }
    if (a == b) continue;  // loop-free by assumption; drop stray self pairs
    edges[static_cast<std::size_t>(ga - 1)].push_back({static_cast<NodeId>(local_id[static_cast<std::size_t>(a - 1)]),
                                                       static_cast<NodeId>(local_id[static_cast<std::size_t>(b - 1)])});
  }

  // dense remaps
  std::map<long long, int> label_map;
  for (long long l : raw_labels) label_map.emplace(l, 0);
  int next = 0;
  for (auto& [raw, dense] : label_map) dense = next++;
  std::map<long long, std::size_t> node_label_map;
  for (long long l : node_labels) node_label_map.emplace(l, 0);
  std::size_t next_col = 0;
  for (auto& [raw, col] : node_label_map) col = next_col++;

  GraphDataset out;
  out.name = ds;
  out.num_classes = label_map.size();
  out.feature_dim = node_label_map.size();
  std::size_t node_base = 0;
  for (std::size_t g = 0; g < num_graphs; ++g) {
    const std::size_t n = count[g];
    std::optional<Tensor2> features;
    std::vector<int> labels_local;
    if (!node_labels.empty()) {
      Tensor2 f(n, node_label_map.size());
      labels_local.resize(n);
      for (std::size_t v = 0; v < n; ++v) {
        const std::size_t col = node_label_map.at(node_labels[node_base + v]);
        f(v, col) = 1.0;
        labels_local[v] = static_cast<int>(col);
      }
      features = std::move(f);
    }
    Graph graph = Graph::build(n, edges[g], /*directed=*/false, std::move(features));
    const int label = label_map.at(raw_labels[g]);
    graph = graph.with_graph_label(label);
    if (!labels_local.empty()) graph = graph.with_node_labels(std::move(labels_local));
    out.graphs.push_back(std::move(graph));
    out.labels.push_back(label);
    node_base += n;
  }
  out.validate();
  return out;
}

GraphDataset inject_constant_feature(GraphDataset ds) {
  if (ds.feature_dim != 0) throw ConfigError("inject_constant_feature: dataset " + ds.name + " already has features");
  for (Graph& g : ds.graphs) g = g.with_features(Tensor2(g.num_nodes(), 1, 1.0));
  ds.feature_dim = 1;
  return ds;
}

SplitSpec make_splits(std::size_t n_items, SplitFractions fractions, std::uint64_t seed) {
  if (n_items < 3) throw ConfigError("make_splits: need at least 3 items");
  if (fractions.train < 0 || fractions.val < 0 || fractions.test < 0 ||
      std::abs(fractions.train + fractions.val + fractions.test - 1.0) > 1e-9) {
    throw ConfigError("make_splits: fractions must be non-negative and sum to 1");
  }
  std::vector<std::size_t> order(n_items);
  for (std::size_t i = 0; i < n_items; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  const auto n = static_cast<double>(n_items);
  const auto n_test = static_cast<std::size_t>(std::llround(fractions.test * n));
  const auto n_val = static_cast<std::size_t>(std::llround(fractions.val * n));
  if (n_test + n_val > n_items) throw ConfigError("make_splits: evaluation sets exceed item count");

  SplitSpec s;
  s.seed = seed;
  s.test_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.val_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test),
                   order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
  s.train_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), order.end());
  return s;
}

Graph graph_from_json(const json& doc, const std::string& origin) {
  try {
    const auto n = doc.at("num_nodes").get<long long>();
    if (n < 1) throw DataError(origin + ": num_nodes must be positive");
    const bool directed = doc.value("directed", false);
    std::vector<Edge> edges;
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw DataError(origin + ": every edge must be a pair");
      const auto a = e[0].get<long long>(), b = e[1].get<long long>();
      if (a < 0 || b < 0 || a >= n || b >= n) {
        throw DataError(origin + ": edge endpoint out of range (" + std::to_string(a) + "," + std::to_string(b) + ")");
      }
      if (a == b) throw DataError(origin + ": self-loop (" + std::to_string(a) + "," + std::to_string(b) + ")");
      edges.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b)});
    }
    std::optional<Tensor2> features;
    if (doc.contains("features")) {
      const auto& rows = doc.at("features");
      if (rows.size() != static_cast<std::size_t>(n)) throw DataError(origin + ": feature row count != num_nodes");
      const std::size_t f = rows.empty() ? 0 : rows[0].size();
      Tensor2 x(static_cast<std::size_t>(n), f);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != f) throw DataError(origin + ": ragged feature rows");
        for (std::size_t j = 0; j < f; ++j) x(i, j) = rows[i][j].get<double>();
      }
      features = std::move(x);
    }
    Graph g = Graph::build(static_cast<std::size_t>(n), edges, directed, std::move(features));
    if (doc.contains("labels")) {
      auto labels = doc.at("labels").get<std::vector<int>>();
      if (labels.size() != static_cast<std::size_t>(n)) throw DataError(origin + ": label count != num_nodes");
      for (int l : labels) {
        if (l < 0) throw DataError(origin + ": labels must be non-negative");
      }
      g = g.with_node_labels(std::move(labels));
    }
    return g;
  } catch (const json::exception& e) {
    throw DataError(origin + ": malformed graph document: " + e.what());
  }
}

json graph_to_json(const Graph& g) {
  json doc;
  doc["num_nodes"] = g.num_nodes();
  doc["directed"] = g.directed();
  json edges = json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.src, e.dst});
  doc["edges"] = std::move(edges);
  if (g.features()) {
    json rows = json::array();
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      const auto r = g.features()->row(i);
      rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    doc["features"] = std::move(rows);
  }
  if (g.node_labels()) doc["labels"] = *g.node_labels();
  return doc;
}

Graph load_node_dataset(const fs::path& path) {
  Graph g = graph_from_json(read_json(path), path.string());
  if (g.directed()) g = symmetrize(g);
  if (!g.features()) throw DataError(path.string() + ": node dataset needs a feature matrix");
  if (!g.node_labels()) throw DataError(path.string() + ": node dataset needs labels");
  return g;
}

json split_to_json(const SplitSpec& split) {
  json doc;
  doc["seed"] = split.seed;
  doc["train"] = split.train_idx;
  doc["val"] = split.val_idx;
  doc["test"] = split.test_idx;
  return doc;
}

void save_split(const fs::path& path, const SplitSpec& split) {
  const json doc = split_to_json(split);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << doc.dump() << '\n';
}

SplitSpec load_split(const fs::path& path) {
  const json doc = read_json(path);
  try {
    SplitSpec s;
    s.seed = doc.at("seed").get<std::uint64_t>();
    s.train_idx = doc.at("train").get<std::vector<std::size_t>>();
    s.val_idx = doc.at("val").get<std::vector<std::size_t>>();
    s.test_idx = doc.at("test").get<std::vector<std::size_t>>();
    return s;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed split file: " + e.what());
  }
}

}  // namespace lvn
