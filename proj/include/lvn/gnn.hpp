#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lvn/augment.hpp"
#include "lvn/graph.hpp"
#include "lvn/tensor.hpp"

namespace lvn {

/// Normalized adjacency with self-loops in CSR form. Row i lists the senders
/// of messages into node i.
struct ShiftOperator {
  std::size_t n = 0;
  std::vector<std::size_t> offsets;
  std::vector<NodeId> cols;
  std::vector<double> values;
  bool add_self_loops = true;
};

ShiftOperator build_shift_operator(const Graph& g);

/// out = S * x
void shift_apply(const ShiftOperator& s, const Tensor2& x, Tensor2& out);
/// out = S^T * x
void shift_apply_transposed(const ShiftOperator& s, const Tensor2& x, Tensor2& out);

struct ArchConfig {
  std::size_t in_dim = 1;
  std::size_t hidden_dim = 64;
  std::size_t num_layers = 4;
  std::size_t num_classes = 2;
  std::size_t n_c = 0;  // rows of the embedding table
};

struct ModelParams {
  Tensor2 w_in;   // F x D
  Tensor2 b_in;   // 1 x D
  std::vector<Tensor2> layer_weights;  // D x D each
  std::vector<Tensor2> layer_biases;   // 1 x D each
  Tensor2 w_out;  // D x K
  Tensor2 b_out;  // 1 x K
  Tensor2 embedding_table;  // n_c x D

  /// Glorot-uniform weights, zero biases, embeddings uniform in +-sqrt(1/D).
  static ModelParams init(const ArchConfig& arch, std::uint64_t seed);
  /// Same shapes, all zeros.
  ModelParams zeros_like() const;

  std::vector<Tensor2*> tensors();
  std::vector<const Tensor2*> tensors() const;
  std::vector<std::string> tensor_names() const;
  std::size_t hidden_dim() const { return w_in.cols(); }
  std::size_t num_layers() const { return layer_weights.size(); }
  void fill(double v);

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

enum class EmbedMode { Replace, Add };
std::string_view to_string(EmbedMode m);
EmbedMode parse_embed_mode(std::string_view name);

/// Per-graph input to the feature stage: the raw rows feeding W_in, which rows
/// receive b_in, and the embedding slot of each virtual row (-1 otherwise).
struct FeatureInput {
  Tensor2 x;
  std::vector<char> bias_rows;
  std::vector<int> slot;
};

/// Original rows take the graph's features; virtual rows take the stored
/// origin features in Add mode and nothing in Replace mode. Throws
/// ConfigError when the graph carries no features.
FeatureInput prepare_features(const AugmentedGraph& aug, EmbedMode mode);

/// X0 = x * W_in + b_in on flagged rows, plus embedding rows on virtual rows.
Tensor2 encode_features(const FeatureInput& in, const ModelParams& params);
void encode_features_backward(const FeatureInput& in, const Tensor2& grad_x0, ModelParams& grads);

/// Convenience: prepare_features followed by encode_features.
Tensor2 init_features(const AugmentedGraph& aug, const ModelParams& params, EmbedMode mode);

struct ForwardOptions {
  double dropout = 0.0;
  std::uint64_t seed = 0;
  bool training = false;
};

/// Intermediates of one gcn_forward call; consumed by backward.
struct ForwardTape {
  const ShiftOperator* shift = nullptr;
  std::vector<Tensor2> inputs;     // only for zero-layer models: the readout input
  std::vector<Tensor2> masks;      // scaled dropout mask per layer, empty when unused
  std::vector<Tensor2> shifted;    // S * input per layer
  std::vector<Tensor2> outputs;    // ReLU outputs per layer
  bool consumed = false;
};

/// H_l = ReLU(S H_{l-1} W_l + b_l), logits = H_L w_out + b_out. Dropout acts
/// on the inputs of layers 2..L during training.
Tensor2 gcn_forward(const ShiftOperator& shift, const Tensor2& x0, const ModelParams& params,
                    const ForwardOptions& opts = {}, ForwardTape* tape = nullptr);

/// Accumulates parameter gradients into `grads` and returns dLoss/dX0.
/// Throws ConfigError when the tape was already used.
Tensor2 backward(ForwardTape& tape, const ModelParams& params, const Tensor2& grad_logits, ModelParams& grads);

/// Column-wise mean over all rows (1 x K).
Tensor2 readout_graph(const Tensor2& logits);
Tensor2 readout_graph_backward(const Tensor2& grad, std::size_t num_rows);

/// Rows of the augmented graph pooled per original node: surviving nodes
/// map to their own row, removed central nodes to their LVN group.
struct NodeReadout {
  std::vector<std::vector<NodeId>> sources;  // per original node
  std::size_t num_aug_rows = 0;
};
NodeReadout make_node_readout(const AugmentedGraph& aug);
Tensor2 readout_node(const Tensor2& logits, const NodeReadout& plan);
Tensor2 readout_node(const Tensor2& logits, const AugmentedGraph& aug);
Tensor2 readout_node_backward(const Tensor2& grad, const NodeReadout& plan);

struct LossResult {
  double loss = 0.0;
  Tensor2 grad;
};

/// Mean softmax cross-entropy over the masked rows (all rows when no mask).
LossResult cross_entropy(const Tensor2& scores, const std::vector<int>& labels,
                         const std::optional<std::vector<std::size_t>>& mask = std::nullopt);

std::size_t argmax_row(const Tensor2& scores, std::size_t row);

struct AdamState {
  ModelParams m;
  ModelParams v;
  std::size_t step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<bool> frozen;  // per tensor in ModelParams::tensors() order

  static AdamState for_params(const ModelParams& params, double lr = 1e-3);
};

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state);

/// Two-layer perceptron applied per node, mean-pooled over nodes.
struct MlpParams {
  Tensor2 w1;  // F x H
  Tensor2 b1;  // 1 x H
  Tensor2 w2;  // H x K
  Tensor2 b2;  // 1 x K

  static MlpParams init(std::size_t in_dim, std::size_t hidden, std::size_t classes, std::uint64_t seed);
  MlpParams zeros_like() const;
  std::vector<Tensor2*> tensors();
  std::vector<const Tensor2*> tensors() const;
};

struct MlpTape {
  Tensor2 x;
  Tensor2 hidden;  // post-ReLU
};

Tensor2 mlp_probe_forward(const Tensor2& features, const MlpParams& params, MlpTape* tape = nullptr);
void mlp_probe_backward(const MlpTape& tape, const MlpParams& params, const Tensor2& grad_scores, MlpParams& grads);

struct MlpAdam {
  std::vector<Tensor2> m, v;
  std::size_t step = 0;
  double lr = 1e-3;
};
void adam_step(MlpParams& params, const MlpParams& grads, MlpAdam& state);

nlohmann::json params_to_json(const ModelParams& params);
ModelParams params_from_json(const nlohmann::json& doc);
void save_params(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_params(const std::filesystem::path& path);

}  // namespace lvn
