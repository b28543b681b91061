#include "lvn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "lvn/error.hpp"
#include "lvn/format.hpp"
#include "lvn/rng.hpp"

namespace lvn {

using json = nlohmann::json;

std::string_view to_string(Task t) { return t == Task::NodeClassification ? "node" : "graph"; }
std::string_view to_string(Pooling p) { return p == Pooling::Sum ? "sum" : "mean"; }

namespace {

Task parse_task(std::string_view s) {
  if (s == "graph") return Task::GraphClassification;
  if (s == "node") return Task::NodeClassification;
  throw ConfigError("unknown task '" + std::string(s) + "' (expected graph or node)");
}

Pooling parse_pooling(std::string_view s) {
  if (s == "mean") return Pooling::Mean;
  if (s == "sum") return Pooling::Sum;
  throw ConfigError("unknown pooling '" + std::string(s) + "' (expected mean or sum)");
}

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' has invalid value " + v.dump());
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults(Task task) {
  ExperimentConfig c;
  c.task = task;
  if (task == Task::NodeClassification) {
    c.hidden_dim = 128;
    c.num_layers = 3;
  }
  return c;
}

json ExperimentConfig::to_json() const {
  return {{"task", to_string(task)},
          {"dataset", dataset},
          {"n_s", n_s},
          {"n_c", n_c},
          {"centrality", to_string(centrality)},
          {"edge_mode", to_string(edge_mode)},
          {"embed_mode", to_string(embed_mode)},
          {"hidden_dim", hidden_dim},
          {"num_layers", num_layers},
          {"dropout", dropout},
          {"lr", lr},
          {"patience", patience},
          {"max_epochs", max_epochs},
          {"num_splits", num_splits},
          {"base_seed", base_seed},
          {"batch_size", batch_size},
          {"pooling", to_string(pooling)},
          {"jobs", jobs},
          {"graph", graph},
          {"ns_values", ns_values},
          {"r_max", r_max},
          {"subset", subset},
          {"min_nodes", min_nodes},
          {"max_graphs", max_graphs},
          {"grid", grid}};
}

void ExperimentConfig::apply_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, v] : doc.items()) {
    if (key == "task") task = parse_task(get_as<std::string>(v, key));
    else if (key == "dataset") dataset = get_as<std::string>(v, key);
    else if (key == "n_s") n_s = get_as<std::size_t>(v, key);
    else if (key == "n_c") n_c = get_as<std::size_t>(v, key);
    else if (key == "centrality") centrality = parse_centrality(get_as<std::string>(v, key));
    else if (key == "edge_mode") edge_mode = parse_edge_mode(get_as<std::string>(v, key));
    else if (key == "embed_mode") embed_mode = parse_embed_mode(get_as<std::string>(v, key));
    else if (key == "hidden_dim") hidden_dim = get_as<std::size_t>(v, key);
    else if (key == "num_layers") num_layers = get_as<std::size_t>(v, key);
    else if (key == "dropout") dropout = get_as<double>(v, key);
    else if (key == "lr") lr = get_as<double>(v, key);
    else if (key == "patience") patience = get_as<std::size_t>(v, key);
    else if (key == "max_epochs") max_epochs = get_as<std::size_t>(v, key);
    else if (key == "num_splits") num_splits = get_as<std::size_t>(v, key);
    else if (key == "base_seed") base_seed = get_as<std::uint64_t>(v, key);
    else if (key == "batch_size") batch_size = get_as<std::size_t>(v, key);
    else if (key == "pooling") pooling = parse_pooling(get_as<std::string>(v, key));
    else if (key == "jobs") jobs = get_as<std::size_t>(v, key);
    else if (key == "graph") graph = get_as<std::string>(v, key);
    else if (key == "ns_values") {
      if (!v.is_array()) throw ConfigError("config key 'ns_values' must be an array");
      ns_values.clear();
      for (const auto& x : v) ns_values.push_back(get_as<std::size_t>(x, key));
    } else if (key == "r_max") r_max = get_as<std::size_t>(v, key);
    else if (key == "subset") subset = get_as<std::string>(v, key);
    else if (key == "min_nodes") min_nodes = get_as<std::size_t>(v, key);
    else if (key == "max_graphs") max_graphs = get_as<std::size_t>(v, key);
    else if (key == "grid") {
      if (!v.is_object()) throw ConfigError("config key 'grid' must be an object of value lists");
      grid = v;
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

void ExperimentConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  apply_json(json{{key, value}});
}

void ExperimentConfig::validate() const {
  if (n_c < 1) throw ConfigError("n_c must be at least 1");
  if (hidden_dim < 1) throw ConfigError("hidden_dim must be at least 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (num_splits < 1) throw ConfigError("num_splits must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  if (r_max < 1) throw ConfigError("r_max must be at least 1");
  if (subset != "all" && subset != "noncentral") throw ConfigError("subset must be 'all' or 'noncentral'");
  if (ns_values.empty()) throw ConfigError("ns_values must not be empty");
  for (std::size_t v : ns_values) {
    if (v == 0) throw ConfigError("ns_values entries must be positive");
  }
  for (const auto& [key, vals] : grid.items()) {
    if (!vals.is_array() || vals.empty()) throw ConfigError("grid entry '" + key + "' must be a non-empty array");
  }
}

ExperimentConfig load_config(const std::optional<std::filesystem::path>& path, const std::vector<std::string>& overrides,
                             Task default_task) {
  json merged = json::object();
  if (path) {
    std::ifstream is(*path);
    if (!is) throw ConfigError("cannot read config file " + path->string());
    json doc = json::parse(is, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw ConfigError("config file " + path->string() + " is not a JSON object");
    // a run manifest carries its full config under "config"
    if (doc.contains("format") && doc["format"] == kManifestFormat) doc = doc.at("config");
    merged = std::move(doc);
  }
  // the task picks the defaults, so it is resolved before anything else
  Task task = default_task;
  if (merged.contains("task")) task = parse_task(get_as<std::string>(merged["task"], "task"));
  for (const auto& o : overrides) {
    if (o.starts_with("task=")) task = parse_task(o.substr(5));
  }
  ExperimentConfig cfg = ExperimentConfig::defaults(task);
  cfg.apply_json(merged);
  for (const auto& o : overrides) cfg.apply_override(o);
  cfg.validate();
  return cfg;
}

std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& base) {
  std::vector<ExperimentConfig> out{base};
  for (auto& c : out) c.grid = json::object();
  for (const auto& [key, vals] : base.grid.items()) {
    std::vector<ExperimentConfig> next;
    for (const auto& c : out) {
      for (const auto& v : vals) {
        ExperimentConfig e = c;
        e.apply_json(json{{key, v}});
        next.push_back(std::move(e));
      }
    }
    out = std::move(next);
  }
  for (const auto& c : out) c.validate();
  return out;
}

std::uint64_t split_seed(std::uint64_t base_seed, std::size_t split) { return derive_seed(base_seed, split); }

std::pair<double, double> mean_ci95(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, 1.96 * sd / std::sqrt(n)};
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

AugmentedGraph augment_for(const Graph& g, const ExperimentConfig& cfg, std::uint64_t centrality_seed) {
  if (cfg.n_s == 0 || g.num_nodes() == 0) return identity_augmentation(g);
  const std::size_t ns = std::min(cfg.n_s, g.num_nodes());
  const auto scores = compute_centrality(g, cfg.centrality, centrality_seed);
  return lvn_augment(g, select_central(scores, g, ns), cfg.n_c, cfg.edge_mode);
}

Tensor2 pool_scores(const Tensor2& logits, Pooling p) {
  Tensor2 s = readout_graph(logits);
  if (p == Pooling::Sum) {
    for (double& v : s.values()) v *= static_cast<double>(logits.rows());
  }
  return s;
}

Tensor2 pool_backward(const Tensor2& grad, std::size_t rows, Pooling p) {
  Tensor2 g = readout_graph_backward(grad, rows);
  if (p == Pooling::Sum) {
    for (double& v : g.values()) v *= static_cast<double>(rows);
  }
  return g;
}

std::size_t num_classes_of(const std::vector<int>& labels) {
  int mx = -1;
  for (int l : labels) mx = std::max(mx, l);
  return static_cast<std::size_t>(mx + 1);
}

ArchConfig arch_for(const ExperimentConfig& cfg, std::size_t in_dim, std::size_t classes) {
  return {.in_dim = in_dim,
          .hidden_dim = cfg.hidden_dim,
          .num_layers = cfg.num_layers,
          .num_classes = classes,
          .n_c = cfg.n_s > 0 ? cfg.n_c : 0};
}

/// Early-stopping driver shared by all training loops. `epoch_fn` runs one
/// epoch of updates, `val_fn` scores the current parameters.
template <typename Params, typename EpochFn, typename ValFn>
std::pair<Params, SplitOutcome> early_stopped(Params params, const ExperimentConfig& cfg, EpochFn epoch_fn, ValFn val_fn,
                                              std::vector<Tensor2>* snapshots = nullptr) {
  SplitOutcome out;
  Params best = params;
  double best_val = val_fn(params);
  out.val_history.push_back(best_val);
  std::size_t since = 0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    epoch_fn(params, epoch);
    if constexpr (std::is_same_v<Params, ModelParams>) {
      if (snapshots) snapshots->push_back(params.embedding_table);
    }
    const double val = val_fn(params);
    out.val_history.push_back(val);
    out.epochs_run = epoch;
    if (val > best_val) {
      best_val = val;
      best = params;
      out.best_epoch = epoch;
      since = 0;
    } else if (++since >= cfg.patience) {
      break;
    }
  }
  out.val_accuracy = best_val;
  return {std::move(best), std::move(out)};
}

struct GraphTaskContext {
  const std::vector<PreparedGraph>& data;
  const ExperimentConfig& cfg;
  std::size_t in_dim;
  std::size_t classes;
};

Tensor2 graph_scores(const PreparedGraph& s, const ModelParams& params, const ExperimentConfig& cfg,
                     const ForwardOptions& opts, ForwardTape* tape) {
  const Tensor2 x0 = encode_features(s.input, params);
  return pool_scores(gcn_forward(s.shift, x0, params, opts, tape), cfg.pooling);
}

double graph_accuracy(const GraphTaskContext& ctx, const ModelParams& params, const std::vector<std::size_t>& idx) {
  if (idx.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i : idx) {
    const Tensor2 s = graph_scores(ctx.data[i], params, ctx.cfg, {}, nullptr);
    if (static_cast<int>(argmax_row(s, 0)) == ctx.data[i].label) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(idx.size());
}

SplitOutcome train_graph_split(const GraphTaskContext& ctx, const SplitSpec& split, std::vector<Tensor2>* snapshots) {
  const ExperimentConfig& cfg = ctx.cfg;
  ModelParams params = ModelParams::init(arch_for(cfg, ctx.in_dim, ctx.classes), derive_seed(split.seed, 1));
  AdamState adam = AdamState::for_params(params, cfg.lr);
  Rng order_rng(derive_seed(split.seed, 2));
  std::vector<std::size_t> order = split.train_idx;
  if (snapshots) snapshots->push_back(params.embedding_table);

  auto epoch_fn = [&](ModelParams& p, std::size_t epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    ModelParams grads = p.zeros_like();
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      grads.fill(0.0);
      const double inv = 1.0 / static_cast<double>(end - start);
      for (std::size_t b = start; b < end; ++b) {
        const PreparedGraph& s = ctx.data[order[b]];
        ForwardTape tape;
        const ForwardOptions opts{cfg.dropout, derive_seed(derive_seed(split.seed, 3 + epoch), order[b]), true};
        const Tensor2 x0 = encode_features(s.input, p);
        const Tensor2 logits = gcn_forward(s.shift, x0, p, opts, &tape);
        const Tensor2 scores = pool_scores(logits, cfg.pooling);
        LossResult lr = cross_entropy(scores, {s.label});
        for (double& v : lr.grad.values()) v *= inv;
        const Tensor2 gx0 = backward(tape, p, pool_backward(lr.grad, logits.rows(), cfg.pooling), grads);
        encode_features_backward(s.input, gx0, grads);
      }
      adam_step(p, grads, adam);
    }
  };
  auto val_fn = [&](const ModelParams& p) { return graph_accuracy(ctx, p, split.val_idx); };
  auto [best, out] = early_stopped(std::move(params), cfg, epoch_fn, val_fn, snapshots);
  out.test_accuracy = graph_accuracy(ctx, best, split.test_idx);
  out.final_embedding_table = best.embedding_table;
  return out;
}

RunResult finish(const ExperimentConfig& cfg, std::vector<SplitSpec> splits, std::vector<SplitOutcome> outcomes,
                 const std::vector<Tensor2>& snapshots) {
  RunResult r;
  r.config = cfg;
  r.splits = std::move(splits);
  r.outcomes = std::move(outcomes);
  std::vector<double> vals;
  for (const auto& o : r.outcomes) {
    r.test_accuracies.push_back(o.test_accuracy);
    vals.push_back(o.val_accuracy);
  }
  std::tie(r.mean, r.ci95_halfwidth) = mean_ci95(r.test_accuracies);
  r.mean_val = mean_ci95(vals).first;
  r.embedding_drift = track_embedding_drift(snapshots);
  if (!r.outcomes.empty()) r.final_embedding_table = r.outcomes.front().final_embedding_table;
  return r;
}

}  // namespace

GraphDataset load_graph_dataset(const ExperimentConfig& config) {
  if (config.dataset.empty()) throw ConfigError("config key 'dataset' is required");
  GraphDataset ds = load_tudataset(config.dataset);
  if (ds.feature_dim == 0) ds = inject_constant_feature(std::move(ds));
  return ds;
}

std::vector<PreparedGraph> prepare_graph_dataset(const GraphDataset& ds, const ExperimentConfig& config) {
  std::vector<PreparedGraph> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    PreparedGraph p;
    try {
      p.aug = augment_for(ds.graphs[i], config, derive_seed(config.base_seed, i));
    } catch (const ConfigError& e) {
      throw ConfigError("graph " + std::to_string(i) + ": " + e.what());
    }
    p.shift = build_shift_operator(p.aug.graph);
    p.input = prepare_features(p.aug, config.embed_mode);
    p.label = ds.labels[i];
    out.push_back(std::move(p));
  }
  return out;
}

RunResult run_training(const ExperimentConfig& config, const GraphDataset& ds) {
  config.validate();
  if (config.task != Task::GraphClassification) throw ConfigError("run_training: dataset given for a node task");
  const auto data = prepare_graph_dataset(ds, config);
  const GraphTaskContext ctx{data, config, ds.feature_dim, ds.num_classes};

  std::vector<SplitSpec> splits(config.num_splits);
  for (std::size_t s = 0; s < config.num_splits; ++s) splits[s] = make_splits(ds.size(), kGraphTaskSplit, split_seed(config.base_seed, s));
  std::vector<SplitOutcome> outcomes(config.num_splits);
  std::vector<Tensor2> snapshots;
  parallel_for(config.num_splits, config.jobs,
               [&](std::size_t s) { outcomes[s] = train_graph_split(ctx, splits[s], s == 0 ? &snapshots : nullptr); });
  return finish(config, std::move(splits), std::move(outcomes), snapshots);
}

RunResult run_training(const ExperimentConfig& config, const Graph& node_graph) {
  config.validate();
  if (config.task != Task::NodeClassification) throw ConfigError("run_training: single graph given for a graph task");
  if (!node_graph.node_labels()) throw DataError("run_training: node dataset has no labels");
  const Graph g = symmetrize(node_graph);
  const AugmentedGraph aug = augment_for(g, config, config.base_seed);
  const ShiftOperator shift = build_shift_operator(aug.graph);
  const FeatureInput input = prepare_features(aug, config.embed_mode);
  const NodeReadout plan = make_node_readout(aug);
  const std::vector<int>& labels = *g.node_labels();
  const std::size_t classes = num_classes_of(labels);

  std::vector<SplitSpec> splits(config.num_splits);
  for (std::size_t s = 0; s < config.num_splits; ++s) splits[s] = make_splits(g.num_nodes(), kNodeTaskSplit, split_seed(config.base_seed, s));

  auto accuracy = [&](const ModelParams& p, const std::vector<std::size_t>& idx) {
    if (idx.empty()) return 0.0;
    const Tensor2 scores = readout_node(gcn_forward(shift, encode_features(input, p), p), plan);
    std::size_t hit = 0;
    for (std::size_t i : idx) hit += static_cast<int>(argmax_row(scores, i)) == labels[i] ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(idx.size());
  };

  std::vector<SplitOutcome> outcomes(config.num_splits);
  std::vector<Tensor2> snapshots;
  parallel_for(config.num_splits, config.jobs, [&](std::size_t s) {
    const SplitSpec& split = splits[s];
    ModelParams params = ModelParams::init(arch_for(config, g.feature_dim(), classes), derive_seed(split.seed, 1));
    AdamState adam = AdamState::for_params(params, config.lr);
    std::vector<Tensor2>* snaps = s == 0 ? &snapshots : nullptr;
    if (snaps) snaps->push_back(params.embedding_table);
    auto epoch_fn = [&](ModelParams& p, std::size_t epoch) {
      ModelParams grads = p.zeros_like();
      ForwardTape tape;
      const ForwardOptions opts{config.dropout, derive_seed(split.seed, 3 + epoch), true};
      const Tensor2 logits = gcn_forward(shift, encode_features(input, p), p, opts, &tape);
      const LossResult loss = cross_entropy(readout_node(logits, plan), labels, split.train_idx);
      encode_features_backward(input, backward(tape, p, readout_node_backward(loss.grad, plan), grads), grads);
      adam_step(p, grads, adam);
    };
    auto val_fn = [&](const ModelParams& p) { return accuracy(p, split.val_idx); };
    auto [best, out] = early_stopped(std::move(params), config, epoch_fn, val_fn, snaps);
    out.test_accuracy = accuracy(best, split.test_idx);
    out.final_embedding_table = best.embedding_table;
    outcomes[s] = std::move(out);
  });
  return finish(config, std::move(splits), std::move(outcomes), snapshots);
}

RunResult run_training(const ExperimentConfig& config) {
  if (config.task == Task::NodeClassification) {
    if (config.dataset.empty()) throw ConfigError("config key 'dataset' is required");
    return run_training(config, load_node_dataset(config.dataset));
  }
  return run_training(config, load_graph_dataset(config));
}

GridResult run_grid(const ExperimentConfig& base, const GraphDataset& ds) {
  GridResult res;
  for (const auto& cfg : expand_grid(base)) res.runs.push_back(run_training(cfg, ds));
  for (std::size_t i = 1; i < res.runs.size(); ++i) {
    if (res.runs[i].mean_val > res.runs[res.best].mean_val) res.best = i;
  }
  return res;
}

std::vector<std::vector<double>> track_embedding_drift(const std::vector<Tensor2>& snapshots) {
  std::vector<std::vector<double>> drift;
  if (snapshots.empty()) return drift;
  const Tensor2& p0 = snapshots.front();
  for (const Tensor2& t : snapshots) {
    if (t.rows() != p0.rows() || t.cols() != p0.cols()) throw ShapeError("track_embedding_drift: snapshot shapes differ");
    std::vector<double> row(t.rows());
    for (std::size_t i = 0; i < t.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < t.cols(); ++j) s += (t(i, j) - p0(i, j)) * (t(i, j) - p0(i, j));
      row[i] = std::sqrt(s);
    }
    drift.push_back(std::move(row));
  }
  return drift;
}

Tensor2 embedding_similarity(const Tensor2& table) {
  const std::size_t n = table.rows();
  std::vector<double> norm(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (double v : table.row(i)) norm[i] += v * v;
    norm[i] = std::sqrt(norm[i]);
  }
  Tensor2 sim(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (norm[i] == 0.0 || norm[j] == 0.0) {
        sim(i, j) = std::nan("");
        continue;
      }
      if (i == j) {
        sim(i, j) = 1.0;
        continue;
      }
      double dot = 0.0;
      for (std::size_t k = 0; k < table.cols(); ++k) dot += table(i, k) * table(j, k);
      sim(i, j) = dot / (norm[i] * norm[j]);
    }
  }
  return sim;
}

namespace {

double mlp_accuracy(const std::vector<Tensor2>& xs, const std::vector<int>& labels, const MlpParams& p,
                    const std::vector<std::size_t>& idx) {
  if (idx.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i : idx) hit += static_cast<int>(argmax_row(mlp_probe_forward(xs[i], p), 0)) == labels[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(idx.size());
}

double train_mlp_split(const std::vector<Tensor2>& xs, const std::vector<int>& labels, std::size_t classes,
                       const ExperimentConfig& cfg, const SplitSpec& split, std::uint64_t seed) {
  MlpParams params = MlpParams::init(xs.front().cols(), cfg.hidden_dim, classes, seed);
  MlpAdam adam;
  adam.lr = cfg.lr;
  Rng order_rng(derive_seed(seed, 2));
  std::vector<std::size_t> order = split.train_idx;
  auto epoch_fn = [&](MlpParams& p, std::size_t) {
    order_rng.shuffle(std::span<std::size_t>(order));
    MlpParams grads = p.zeros_like();
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      for (Tensor2* t : grads.tensors()) t->fill(0.0);
      const double inv = 1.0 / static_cast<double>(end - start);
      for (std::size_t b = start; b < end; ++b) {
        MlpTape tape;
        const Tensor2 scores = mlp_probe_forward(xs[order[b]], p, &tape);
        LossResult lr = cross_entropy(scores, {labels[order[b]]});
        for (double& v : lr.grad.values()) v *= inv;
        mlp_probe_backward(tape, p, lr.grad, grads);
      }
      adam_step(p, grads, adam);
    }
  };
  auto val_fn = [&](const MlpParams& p) { return mlp_accuracy(xs, labels, p, split.val_idx); };
  auto [best, out] = early_stopped(std::move(params), cfg, epoch_fn, val_fn);
  return mlp_accuracy(xs, labels, best, split.test_idx);
}

}  // namespace

ProbeResult run_mlp_probe(const GraphDataset& ds, const ExperimentConfig& config, const std::vector<SplitSpec>& splits,
                          const std::vector<std::optional<Tensor2>>& embeddings) {
  if (ds.feature_dim == 0) throw ConfigError("run_mlp_probe: dataset has no input node features");
  if (embeddings.size() != splits.size()) throw ConfigError("run_mlp_probe: one embedding slot per split is required");
  if (config.n_s == 0) throw ConfigError("run_mlp_probe: n_s must be positive");
  const std::size_t f = ds.feature_dim;

  std::vector<Tensor2> raw;
  std::vector<AugmentedGraph> augs;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    raw.push_back(*ds.graphs[i].features());
    augs.push_back(augment_for(ds.graphs[i], config, derive_seed(config.base_seed, i)));
  }

  ProbeResult res;
  res.splits = splits;
  std::vector<std::size_t> active;
  for (std::size_t s = 0; s < splits.size(); ++s) {
    if (!embeddings[s]) res.skipped_splits.push_back(s);
    else active.push_back(s);
  }
  std::vector<double> raw_acc(active.size()), emb_acc(active.size());
  parallel_for(active.size(), config.jobs, [&](std::size_t a) {
    const std::size_t s = active[a];
    const Tensor2& table = *embeddings[s];
    if (table.rows() != config.n_c) throw ConfigError("run_mlp_probe: embedding table rows do not match n_c");
    const std::size_t d = table.cols();
    std::vector<Tensor2> emb;
    emb.reserve(augs.size());
    for (const AugmentedGraph& aug : augs) {
      Tensor2 x(aug.graph.num_nodes(), f + d);
      for (std::size_t v = 0; v < aug.num_original(); ++v) {
        const auto src = aug.graph.features()->row(v);
        std::copy(src.begin(), src.end(), x.row(v).begin());
      }
      for (std::size_t r = 0; r < aug.registry.size(); ++r) {
        const auto& rec = aug.registry[r];
        auto row = x.row(aug.num_original() + r);
        if (config.embed_mode == EmbedMode::Add) std::copy(rec.origin_features.begin(), rec.origin_features.end(), row.begin());
        const auto e = table.row(static_cast<std::size_t>(rec.slot));
        std::copy(e.begin(), e.end(), row.begin() + static_cast<std::ptrdiff_t>(f));
      }
      emb.push_back(std::move(x));
    }
    const std::uint64_t seed = derive_seed(splits[s].seed, 7);
    raw_acc[a] = train_mlp_split(raw, ds.labels, ds.num_classes, config, splits[s], seed);
    emb_acc[a] = train_mlp_split(emb, ds.labels, ds.num_classes, config, splits[s], seed);
  });
  res.raw_accuracies = raw_acc;
  res.embedded_accuracies = emb_acc;
  std::tie(res.raw_mean, res.raw_ci95) = mean_ci95(raw_acc);
  std::tie(res.embedded_mean, res.embedded_ci95) = mean_ci95(emb_acc);
  return res;
}

ConnectivityResult run_connectivity_suite(const std::vector<Graph>& graphs, const ExperimentConfig& config) {
  config.validate();
  ConnectivityResult res;
  res.ns_values = config.ns_values;
  const std::size_t ns_max = *std::max_element(config.ns_values.begin(), config.ns_values.end());
  const std::size_t floor = std::max(config.min_nodes, ns_max);
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    if (graphs[i].num_nodes() < floor) continue;
    if (config.max_graphs > 0 && res.graph_indices.size() >= config.max_graphs) break;
    res.graph_indices.push_back(i);
  }
  if (res.graph_indices.empty()) throw ConfigError("run_connectivity_suite: no graph has at least " + std::to_string(floor) + " nodes");

  const std::size_t count = res.graph_indices.size();
  res.sweeps.resize(count);
  std::vector<PathDeltaCurve> curves(count);
  const std::size_t ns_path = config.n_s > 0 ? config.n_s : 1;
  parallel_for(count, config.jobs, [&](std::size_t k) {
    const std::size_t gi = res.graph_indices[k];
    const Graph g = symmetrize(graphs[gi]);
    const auto scores = compute_centrality(g, config.centrality, derive_seed(config.base_seed, gi));
    const bool all = config.subset == "all";
    res.sweeps[k] = resistance_sweep(g, scores, config.ns_values, config.n_c, config.edge_mode,
                                     all ? std::optional(NodeSubset::all(g.num_nodes())) : std::nullopt);
    const auto sel = select_central(scores, g, std::min(ns_path, g.num_nodes()));
    const auto aug = lvn_augment(g, sel, config.n_c, config.edge_mode);
    const auto subset = all ? NodeSubset::all(g.num_nodes()) : NodeSubset::complement(g.num_nodes(), sel.members, "C");
    curves[k] = path_count_delta(g, aug, subset, config.r_max);
  });

  res.mean_totals.assign(config.ns_values.size(), 0.0);
  std::size_t complete = 0;
  for (const auto& sw : res.sweeps) {
    const bool ok = std::all_of(sw.points.begin(), sw.points.end(), [](const SweepPoint& p) { return p.total.has_value(); });
    if (!ok) continue;
    ++complete;
    res.mean_baseline += sw.baseline;
    for (std::size_t j = 0; j < sw.points.size(); ++j) res.mean_totals[j] += *sw.points[j].total;
  }
  if (complete > 0) {
    res.mean_baseline /= static_cast<double>(complete);
    for (double& t : res.mean_totals) t /= static_cast<double>(complete);
  }

  PathDeltaCurve& mean = res.mean_path_delta;
  for (std::size_t r = 1; r <= config.r_max; ++r) mean.r_values.push_back(r);
  mean.deltas.assign(config.r_max, 0.0);
  mean.raw_counts.assign(config.r_max, 0.0);
  mean.aug_counts.assign(config.r_max, 0.0);
  for (const auto& c : curves) {
    for (std::size_t r = 0; r < config.r_max; ++r) {
      mean.deltas[r] += c.deltas[r] / static_cast<double>(count);
      mean.raw_counts[r] += c.raw_counts[r] / static_cast<double>(count);
      mean.aug_counts[r] += c.aug_counts[r] / static_cast<double>(count);
    }
    mean.precision_warning = mean.precision_warning || c.precision_warning;
  }
  return res;
}

json run_summary_json(const RunResult& result) {
  json splits = json::array();
  for (std::size_t s = 0; s < result.outcomes.size(); ++s) {
    const auto& o = result.outcomes[s];
    splits.push_back({{"split", s},
                      {"seed", result.splits[s].seed},
                      {"val_accuracy", o.val_accuracy},
                      {"test_accuracy", o.test_accuracy},
                      {"best_epoch", o.best_epoch},
                      {"epochs_run", o.epochs_run}});
  }
  json table = json::array();
  for (std::size_t i = 0; i < result.final_embedding_table.rows(); ++i) {
    const auto r = result.final_embedding_table.row(i);
    table.push_back(std::vector<double>(r.begin(), r.end()));
  }
  json sim = json::array();
  const Tensor2 s = embedding_similarity(result.final_embedding_table);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < s.cols(); ++j) row.push_back(std::isnan(s(i, j)) ? json(nullptr) : json(s(i, j)));
    sim.push_back(std::move(row));
  }
  return {{"config", result.config.to_json()},
          {"splits", std::move(splits)},
          {"test_accuracies", result.test_accuracies},
          {"mean", result.mean},
          {"ci95_halfwidth", result.ci95_halfwidth},
          {"mean_val", result.mean_val},
          {"embedding_drift", result.embedding_drift},
          {"final_embedding_table", std::move(table)},
          {"similarity", std::move(sim)}};
}

std::map<std::string, std::string> run_output_files(const RunResult& result) {
  std::map<std::string, std::string> files;
  files["results.json"] = run_summary_json(result).dump(2) + "\n";
  {
    std::ostringstream os;
    os << "split,seed,val_accuracy,test_accuracy,best_epoch,epochs_run\n";
    for (std::size_t s = 0; s < result.outcomes.size(); ++s) {
      const auto& o = result.outcomes[s];
      os << s << ',' << result.splits[s].seed << ',' << format_real(o.val_accuracy) << ',' << format_real(o.test_accuracy)
         << ',' << o.best_epoch << ',' << o.epochs_run << '\n';
    }
    files["accuracies.csv"] = os.str();
  }
  {
    std::ostringstream os;
    os << "epoch,slot,distance\n";
    for (std::size_t e = 0; e < result.embedding_drift.size(); ++e) {
      for (std::size_t k = 0; k < result.embedding_drift[e].size(); ++k) {
        os << e << ',' << k << ',' << format_real(result.embedding_drift[e][k]) << '\n';
      }
    }
    files["drift.csv"] = os.str();
  }
  {
    std::ostringstream os;
    os << "row,col,cosine\n";
    const Tensor2 s = embedding_similarity(result.final_embedding_table);
    for (std::size_t i = 0; i < s.rows(); ++i) {
      for (std::size_t j = 0; j < s.cols(); ++j) os << i << ',' << j << ',' << (std::isnan(s(i, j)) ? "" : format_real(s(i, j))) << '\n';
    }
    files["similarity.csv"] = os.str();
  }
  return files;
}

void write_run_outputs(const std::filesystem::path& dir, const RunResult& result) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : run_output_files(result)) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw DataError("cannot write " + (dir / name).string());
    os << content;
  }
}

}  // namespace lvn
