#include "lvn/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "lvn/error.hpp"
#include "lvn/rng.hpp"

namespace lvn {

using json = nlohmann::json;

ShiftOperator build_shift_operator(const Graph& g) {
  const std::size_t n = g.num_nodes();
  const auto out_deg = g.out_degrees();
  const auto in_deg = g.in_degrees();

  // transpose the arc list so that row i holds the senders into i
  std::vector<std::size_t> count(n + 1, 0);
  for (std::size_t u = 0; u < n; ++u) {
    for (NodeId v : g.neighbors(static_cast<NodeId>(u))) ++count[static_cast<std::size_t>(v) + 1];
  }
  for (std::size_t i = 0; i < n; ++i) count[i + 1] += count[i] + 1;  // +1 for the self-loop
  ShiftOperator s;
  s.n = n;
  s.offsets = count;
  s.cols.resize(s.offsets[n]);
  s.values.resize(s.offsets[n]);
  std::vector<std::size_t> fill(s.offsets.begin(), s.offsets.end() - 1);
  for (std::size_t u = 0; u < n; ++u) {
    for (NodeId v : g.neighbors(static_cast<NodeId>(u))) s.cols[fill[static_cast<std::size_t>(v)]++] = static_cast<NodeId>(u);
  }
  for (std::size_t i = 0; i < n; ++i) {
    s.cols[fill[i]++] = static_cast<NodeId>(i);
    std::sort(s.cols.begin() + static_cast<std::ptrdiff_t>(s.offsets[i]),
              s.cols.begin() + static_cast<std::ptrdiff_t>(s.offsets[i + 1]));
    const double din = static_cast<double>(in_deg[i]) + 1.0;
    for (std::size_t k = s.offsets[i]; k < s.offsets[i + 1]; ++k) {
      const double dout = static_cast<double>(out_deg[static_cast<std::size_t>(s.cols[k])]) + 1.0;
      s.values[k] = 1.0 / std::sqrt(dout * din);
    }
  }
  return s;
}

void shift_apply(const ShiftOperator& s, const Tensor2& x, Tensor2& out) {
  if (x.rows() != s.n) throw ShapeError("shift_apply: operator has " + std::to_string(s.n) + " rows, input " + shape_string(x));
  if (out.rows() != x.rows() || out.cols() != x.cols()) out = Tensor2(x.rows(), x.cols());
  const std::size_t d = x.cols();
  for (std::size_t i = 0; i < s.n; ++i) {
    auto orow = out.row(i);
    std::fill(orow.begin(), orow.end(), 0.0);
    for (std::size_t k = s.offsets[i]; k < s.offsets[i + 1]; ++k) {
      const double w = s.values[k];
      const double* xr = x.values().data() + static_cast<std::size_t>(s.cols[k]) * d;
      for (std::size_t j = 0; j < d; ++j) orow[j] += w * xr[j];
    }
  }
}

void shift_apply_transposed(const ShiftOperator& s, const Tensor2& x, Tensor2& out) {
  if (x.rows() != s.n) throw ShapeError("shift_apply_transposed: operator has " + std::to_string(s.n) + " rows, input " + shape_string(x));
  if (out.rows() != x.rows() || out.cols() != x.cols()) out = Tensor2(x.rows(), x.cols());
  else out.fill(0.0);
  const std::size_t d = x.cols();
  for (std::size_t i = 0; i < s.n; ++i) {
    const auto xr = x.row(i);
    for (std::size_t k = s.offsets[i]; k < s.offsets[i + 1]; ++k) {
      const double w = s.values[k];
      double* orow = out.values().data() + static_cast<std::size_t>(s.cols[k]) * d;
      for (std::size_t j = 0; j < d; ++j) orow[j] += w * xr[j];
    }
  }
}

namespace {

void fill_uniform(Tensor2& t, double a, Rng& rng) {
  for (double& x : t.values()) x = rng.uniform(-a, a);
}

Tensor2 glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  Tensor2 t(fan_in, fan_out);
  fill_uniform(t, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), rng);
  return t;
}

}  // namespace

ModelParams ModelParams::init(const ArchConfig& arch, std::uint64_t seed) {
  if (arch.in_dim == 0 || arch.hidden_dim == 0 || arch.num_classes == 0) {
    throw ConfigError("ModelParams::init: dimensions must be positive");
  }
  Rng rng(seed);
  ModelParams p;
  const std::size_t d = arch.hidden_dim;
  p.w_in = glorot(arch.in_dim, d, rng);
  p.b_in = Tensor2(1, d);
  for (std::size_t l = 0; l < arch.num_layers; ++l) {
    p.layer_weights.push_back(glorot(d, d, rng));
    p.layer_biases.emplace_back(1, d);
  }
  p.w_out = glorot(d, arch.num_classes, rng);
  p.b_out = Tensor2(1, arch.num_classes);
  p.embedding_table = Tensor2(arch.n_c, d);
  fill_uniform(p.embedding_table, std::sqrt(1.0 / static_cast<double>(d)), rng);
  return p;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  z.fill(0.0);
  return z;
}

std::vector<Tensor2*> ModelParams::tensors() {
  std::vector<Tensor2*> out{&w_in, &b_in};
  for (std::size_t l = 0; l < layer_weights.size(); ++l) {
    out.push_back(&layer_weights[l]);
    out.push_back(&layer_biases[l]);
  }
  out.push_back(&w_out);
  out.push_back(&b_out);
  out.push_back(&embedding_table);
  return out;
}

std::vector<const Tensor2*> ModelParams::tensors() const {
  auto mut = const_cast<ModelParams*>(this)->tensors();
  return {mut.begin(), mut.end()};
}

std::vector<std::string> ModelParams::tensor_names() const {
  std::vector<std::string> names{"w_in", "b_in"};
  for (std::size_t l = 0; l < layer_weights.size(); ++l) {
    names.push_back("layer" + std::to_string(l) + ".weight");
    names.push_back("layer" + std::to_string(l) + ".bias");
  }
  names.insert(names.end(), {"w_out", "b_out", "embedding_table"});
  return names;
}

void ModelParams::fill(double v) {
  for (Tensor2* t : tensors()) t->fill(v);
}

std::string_view to_string(EmbedMode m) { return m == EmbedMode::Add ? "add" : "replace"; }

EmbedMode parse_embed_mode(std::string_view name) {
  if (name == "replace") return EmbedMode::Replace;
  if (name == "add") return EmbedMode::Add;
  throw ConfigError("unknown embedding mode '" + std::string(name) + "' (expected replace or add)");
}

FeatureInput prepare_features(const AugmentedGraph& aug, EmbedMode mode) {
  const Graph& g = aug.graph;
  if (!g.features()) throw ConfigError("prepare_features: graph has no node features");
  const std::size_t n = g.num_nodes(), f = g.feature_dim(), n_orig = aug.num_original();
  FeatureInput in;
  in.x = Tensor2(n, f);
  in.bias_rows.assign(n, 1);
  in.slot.assign(n, -1);
  for (std::size_t v = 0; v < n_orig; ++v) {
    const auto src = g.features()->row(v);
    std::copy(src.begin(), src.end(), in.x.row(v).begin());
  }
  for (std::size_t r = 0; r < aug.registry.size(); ++r) {
    const auto& rec = aug.registry[r];
    const std::size_t row = n_orig + r;
    if (rec.slot < 0 || static_cast<std::size_t>(rec.slot) >= aug.n_c) throw ConfigError("prepare_features: registry slot out of range");
    in.slot[row] = rec.slot;
    if (mode == EmbedMode::Add) {
      if (rec.origin_features.size() != f) throw ConfigError("prepare_features: origin features do not match feature width");
      std::copy(rec.origin_features.begin(), rec.origin_features.end(), in.x.row(row).begin());
    } else {
      in.bias_rows[row] = 0;
    }
  }
  return in;
}

Tensor2 encode_features(const FeatureInput& in, const ModelParams& params) {
  Tensor2 x0;
  matmul(in.x, params.w_in, x0, "encode_features");
  const std::size_t d = x0.cols();
  for (std::size_t r = 0; r < x0.rows(); ++r) {
    auto row = x0.row(r);
    if (in.bias_rows[r]) {
      for (std::size_t j = 0; j < d; ++j) row[j] += params.b_in(0, j);
    }
    if (in.slot[r] >= 0) {
      const auto e = params.embedding_table.row(static_cast<std::size_t>(in.slot[r]));
      for (std::size_t j = 0; j < d; ++j) row[j] += e[j];
    }
  }
  return x0;
}

void encode_features_backward(const FeatureInput& in, const Tensor2& grad_x0, ModelParams& grads) {
  matmul_at_b_acc(in.x, grad_x0, grads.w_in, "encode_features_backward");
  const std::size_t d = grad_x0.cols();
  for (std::size_t r = 0; r < grad_x0.rows(); ++r) {
    const auto g = grad_x0.row(r);
    if (in.bias_rows[r]) {
      for (std::size_t j = 0; j < d; ++j) grads.b_in(0, j) += g[j];
    }
    if (in.slot[r] >= 0) {
      auto e = grads.embedding_table.row(static_cast<std::size_t>(in.slot[r]));
      for (std::size_t j = 0; j < d; ++j) e[j] += g[j];
    }
  }
}

Tensor2 init_features(const AugmentedGraph& aug, const ModelParams& params, EmbedMode mode) {
  return encode_features(prepare_features(aug, mode), params);
}

Tensor2 gcn_forward(const ShiftOperator& shift, const Tensor2& x0, const ModelParams& params, const ForwardOptions& opts,
                    ForwardTape* tape) {
  if (x0.cols() != params.hidden_dim()) {
    throw ShapeError("gcn_forward: input width " + std::to_string(x0.cols()) + " does not match hidden dim " +
                     std::to_string(params.hidden_dim()));
  }
  if (opts.training && (opts.dropout < 0.0 || opts.dropout >= 1.0)) throw ConfigError("gcn_forward: dropout must lie in [0, 1)");
  if (tape) {
    *tape = ForwardTape{};
    tape->shift = &shift;
  }
  const bool drop = opts.training && opts.dropout > 0.0;
  const double keep_scale = drop ? 1.0 / (1.0 - opts.dropout) : 1.0;

  Tensor2 h = x0, sh, z;
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    const Tensor2& w = params.layer_weights[l];
    if (w.rows() != h.cols()) {
      throw ShapeError("gcn_forward: layer " + std::to_string(l) + " weight " + shape_string(w) + " vs input " +
                       shape_string(h));
    }
    Tensor2 mask;
    if (drop && l > 0) {
      Rng rng(derive_seed(opts.seed, l));
      mask = Tensor2(h.rows(), h.cols());
      auto hv = h.values();
      auto mv = mask.values();
      for (std::size_t i = 0; i < hv.size(); ++i) {
        mv[i] = rng.uniform01() < opts.dropout ? 0.0 : keep_scale;
        hv[i] *= mv[i];
      }
    }
    shift_apply(shift, h, sh);
    matmul(sh, w, z, "gcn_forward layer");
    add_row_bias(z, params.layer_biases[l]);
    for (double& v : z.values()) v = v > 0.0 ? v : 0.0;
    if (tape) {
      tape->masks.push_back(std::move(mask));
      tape->shifted.push_back(sh);
      tape->outputs.push_back(z);
    }
    h = std::move(z);
    z = Tensor2();
  }
  Tensor2 logits;
  matmul(h, params.w_out, logits, "gcn_forward readout");
  add_row_bias(logits, params.b_out);
  if (tape && params.num_layers() == 0) tape->inputs.push_back(h);
  return logits;
}

Tensor2 backward(ForwardTape& tape, const ModelParams& params, const Tensor2& grad_logits, ModelParams& grads) {
  if (tape.consumed) throw ConfigError("backward: tape already consumed");
  if (!tape.shift) throw ConfigError("backward: tape was not recorded");
  tape.consumed = true;
  const std::size_t layers = params.num_layers();
  const Tensor2& last = layers > 0 ? tape.outputs.back() : tape.inputs.back();

  matmul_at_b_acc(last, grad_logits, grads.w_out, "backward w_out");
  column_sums_acc(grad_logits, grads.b_out);
  Tensor2 g;
  matmul_a_bt(grad_logits, params.w_out, g, "backward readout");

  Tensor2 gsh, gin;
  for (std::size_t l = layers; l-- > 0;) {
    const Tensor2& out = tape.outputs[l];
    auto gv = g.values();
    const auto ov = out.values();
    for (std::size_t i = 0; i < gv.size(); ++i) {
      if (ov[i] <= 0.0) gv[i] = 0.0;
    }
    matmul_at_b_acc(tape.shifted[l], g, grads.layer_weights[l], "backward layer weight");
    column_sums_acc(g, grads.layer_biases[l]);
    matmul_a_bt(g, params.layer_weights[l], gsh, "backward layer input");
    shift_apply_transposed(*tape.shift, gsh, gin);
    if (!tape.masks[l].empty()) {
      auto iv = gin.values();
      const auto mv = tape.masks[l].values();
      for (std::size_t i = 0; i < iv.size(); ++i) iv[i] *= mv[i];
    }
    std::swap(g, gin);
  }
  return g;
}

Tensor2 readout_graph(const Tensor2& logits) {
  if (logits.rows() == 0) throw ShapeError("readout_graph: no rows");
  Tensor2 out(1, logits.cols());
  column_sums_acc(logits, out);
  for (double& v : out.values()) v /= static_cast<double>(logits.rows());
  return out;
}

Tensor2 readout_graph_backward(const Tensor2& grad, std::size_t num_rows) {
  Tensor2 out(num_rows, grad.cols());
  const double inv = 1.0 / static_cast<double>(num_rows);
  for (std::size_t r = 0; r < num_rows; ++r) {
    for (std::size_t j = 0; j < grad.cols(); ++j) out(r, j) = grad(0, j) * inv;
  }
  return out;
}

NodeReadout make_node_readout(const AugmentedGraph& aug) {
  NodeReadout plan;
  plan.num_aug_rows = aug.graph.num_nodes();
  plan.sources.resize(aug.old_to_new.size());
  for (std::size_t v = 0; v < aug.old_to_new.size(); ++v) {
    if (aug.old_to_new[v] != kNoNode) plan.sources[v].push_back(aug.old_to_new[v]);
  }
  for (std::size_t r = 0; r < aug.registry.size(); ++r) {
    const NodeId origin = aug.registry[r].origin_node;
    plan.sources[static_cast<std::size_t>(origin)].push_back(static_cast<NodeId>(aug.num_original() + r));
  }
  for (std::size_t v = 0; v < plan.sources.size(); ++v) {
    if (plan.sources[v].empty()) throw ConfigError("make_node_readout: node " + std::to_string(v) + " has no source rows");
  }
  return plan;
}

Tensor2 readout_node(const Tensor2& logits, const NodeReadout& plan) {
  if (logits.rows() != plan.num_aug_rows) throw ShapeError("readout_node: logits rows do not match the augmented graph");
  Tensor2 out(plan.sources.size(), logits.cols());
  for (std::size_t v = 0; v < plan.sources.size(); ++v) {
    auto o = out.row(v);
    const double inv = 1.0 / static_cast<double>(plan.sources[v].size());
    for (NodeId src : plan.sources[v]) {
      const auto r = logits.row(static_cast<std::size_t>(src));
      for (std::size_t j = 0; j < o.size(); ++j) o[j] += r[j] * inv;
    }
  }
  return out;
}

Tensor2 readout_node(const Tensor2& logits, const AugmentedGraph& aug) { return readout_node(logits, make_node_readout(aug)); }

Tensor2 readout_node_backward(const Tensor2& grad, const NodeReadout& plan) {
  Tensor2 out(plan.num_aug_rows, grad.cols());
  for (std::size_t v = 0; v < plan.sources.size(); ++v) {
    const auto g = grad.row(v);
    const double inv = 1.0 / static_cast<double>(plan.sources[v].size());
    for (NodeId src : plan.sources[v]) {
      auto o = out.row(static_cast<std::size_t>(src));
      for (std::size_t j = 0; j < o.size(); ++j) o[j] += g[j] * inv;
    }
  }
  return out;
}

LossResult cross_entropy(const Tensor2& scores, const std::vector<int>& labels,
                         const std::optional<std::vector<std::size_t>>& mask) {
  if (labels.size() != scores.rows()) throw ShapeError("cross_entropy: label count does not match score rows");
  std::vector<std::size_t> rows;
  if (mask) {
    rows = *mask;
  } else {
    rows.resize(scores.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  }
  if (rows.empty()) throw ConfigError("cross_entropy: empty mask");
  const std::size_t k = scores.cols();
  LossResult res;
  res.grad = Tensor2(scores.rows(), k);
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (std::size_t r : rows) {
    if (r >= scores.rows()) throw ConfigError("cross_entropy: mask index out of range");
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= k) throw ConfigError("cross_entropy: label out of range");
    const auto s = scores.row(r);
    const double mx = *std::max_element(s.begin(), s.end());
    double z = 0.0;
    for (double v : s) z += std::exp(v - mx);
    const double log_z = mx + std::log(z);
    res.loss += (log_z - s[static_cast<std::size_t>(y)]) * inv;
    auto g = res.grad.row(r);
    for (std::size_t j = 0; j < k; ++j) g[j] += std::exp(s[j] - log_z) * inv;
    g[static_cast<std::size_t>(y)] -= inv;
  }
  return res;
}

std::size_t argmax_row(const Tensor2& scores, std::size_t row) {
  const auto r = scores.row(row);
  return static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
}

AdamState AdamState::for_params(const ModelParams& params, double lr) {
  AdamState s;
  s.m = params.zeros_like();
  s.v = params.zeros_like();
  s.lr = lr;
  s.frozen.assign(params.tensors().size(), false);
  return s;
}

namespace {

void adam_update(Tensor2& p, const Tensor2& g, Tensor2& m, Tensor2& v, std::size_t step, double lr, double b1, double b2,
                 double eps) {
  if (p.size() != g.size() || p.size() != m.size()) throw ShapeError("adam_step: shape mismatch " + shape_string(p) + " vs " + shape_string(g));
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
  auto pv = p.values();
  const auto gv = g.values();
  auto mv = m.values();
  auto vv = v.values();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    mv[i] = b1 * mv[i] + (1.0 - b1) * gv[i];
    vv[i] = b2 * vv[i] + (1.0 - b2) * gv[i] * gv[i];
    pv[i] -= lr * (mv[i] / c1) / (std::sqrt(vv[i] / c2) + eps);
  }
}

}  // namespace

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state) {
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  if (p.size() != g.size() || p.size() != m.size()) throw ShapeError("adam_step: parameter layout mismatch");
  ++state.step;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i < state.frozen.size() && state.frozen[i]) continue;
    adam_update(*p[i], *g[i], *m[i], *v[i], state.step, state.lr, state.beta1, state.beta2, state.eps);
  }
}

MlpParams MlpParams::init(std::size_t in_dim, std::size_t hidden, std::size_t classes, std::uint64_t seed) {
  Rng rng(seed);
  MlpParams p;
  p.w1 = glorot(in_dim, hidden, rng);
  p.b1 = Tensor2(1, hidden);
  p.w2 = glorot(hidden, classes, rng);
  p.b2 = Tensor2(1, classes);
  return p;
}

MlpParams MlpParams::zeros_like() const {
  return {Tensor2(w1.rows(), w1.cols()), Tensor2(1, b1.cols()), Tensor2(w2.rows(), w2.cols()), Tensor2(1, b2.cols())};
}

std::vector<Tensor2*> MlpParams::tensors() { return {&w1, &b1, &w2, &b2}; }
std::vector<const Tensor2*> MlpParams::tensors() const { return {&w1, &b1, &w2, &b2}; }

Tensor2 mlp_probe_forward(const Tensor2& features, const MlpParams& params, MlpTape* tape) {
  Tensor2 h;
  matmul(features, params.w1, h, "mlp_probe_forward");
  add_row_bias(h, params.b1);
  for (double& v : h.values()) v = v > 0.0 ? v : 0.0;
  // mean pooling commutes with the second affine map
  Tensor2 pooled = readout_graph(h);
  Tensor2 out;
  matmul(pooled, params.w2, out, "mlp_probe_forward output");
  add_row_bias(out, params.b2);
  if (tape) {
    tape->x = features;
    tape->hidden = std::move(h);
  }
  return out;
}

void mlp_probe_backward(const MlpTape& tape, const MlpParams& params, const Tensor2& grad_scores, MlpParams& grads) {
  const Tensor2 pooled = readout_graph(tape.hidden);
  matmul_at_b_acc(pooled, grad_scores, grads.w2, "mlp_probe_backward w2");
  column_sums_acc(grad_scores, grads.b2);
  Tensor2 gp;
  matmul_a_bt(grad_scores, params.w2, gp, "mlp_probe_backward pooled");
  Tensor2 gh = readout_graph_backward(gp, tape.hidden.rows());
  auto gv = gh.values();
  const auto hv = tape.hidden.values();
  for (std::size_t i = 0; i < gv.size(); ++i) {
    if (hv[i] <= 0.0) gv[i] = 0.0;
  }
  matmul_at_b_acc(tape.x, gh, grads.w1, "mlp_probe_backward w1");
  column_sums_acc(gh, grads.b1);
}

void adam_step(MlpParams& params, const MlpParams& grads, MlpAdam& state) {
  auto p = params.tensors();
  const auto g = grads.tensors();
  if (state.m.empty()) {
    for (const Tensor2* t : p) {
      state.m.emplace_back(t->rows(), t->cols());
      state.v.emplace_back(t->rows(), t->cols());
    }
  }
  ++state.step;
  for (std::size_t i = 0; i < p.size(); ++i) adam_update(*p[i], *g[i], state.m[i], state.v[i], state.step, state.lr, 0.9, 0.999, 1e-8);
}

json params_to_json(const ModelParams& params) {
  json tensors = json::array();
  const auto names = params.tensor_names();
  const auto ts = params.tensors();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    tensors.push_back({{"name", names[i]}, {"rows", ts[i]->rows()}, {"cols", ts[i]->cols()}, {"values", ts[i]->data()}});
  }
  return {{"format", "lvn-params-1"}, {"num_layers", params.num_layers()}, {"tensors", std::move(tensors)}};
}

ModelParams params_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "lvn-params-1") throw DataError("params_from_json: unknown format " + doc.at("format").dump());
    ModelParams p;
    const auto layers = doc.at("num_layers").get<std::size_t>();
    p.layer_weights.resize(layers);
    p.layer_biases.resize(layers);
    auto ts = p.tensors();
    const auto& arr = doc.at("tensors");
    if (arr.size() != ts.size()) throw DataError("params_from_json: expected " + std::to_string(ts.size()) + " tensors");
    const auto names = p.tensor_names();
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const auto& t = arr.at(i);
      if (t.at("name").get<std::string>() != names[i]) throw DataError("params_from_json: unexpected tensor " + t.at("name").dump());
      *ts[i] = Tensor2(t.at("rows").get<std::size_t>(), t.at("cols").get<std::size_t>(), t.at("values").get<std::vector<double>>());
    }
    return p;
  } catch (const json::exception& e) {
    throw DataError(std::string("params_from_json: ") + e.what());
  } catch (const ShapeError& e) {
    throw DataError(std::string("params_from_json: ") + e.what());
  }
}

void save_params(const std::filesystem::path& path, const ModelParams& params) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw DataError("save_params: cannot write " + path.string());
  os << params_to_json(params).dump() << '\n';
}

ModelParams load_params(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("load_params: cannot read " + path.string());
  try {
    return params_from_json(json::parse(is));
  } catch (const json::parse_error& e) {
    throw DataError("load_params: " + path.string() + ": " + e.what());
  }
}

}  // namespace lvn
