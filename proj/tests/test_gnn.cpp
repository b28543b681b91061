#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <utility>

#include "lvn/datasets.hpp"
#include "lvn/error.hpp"
#include "lvn/gnn.hpp"
#include "oracles.hpp"

using namespace lvn;

namespace {

double entry(const ShiftOperator& s, NodeId i, NodeId j) {
  for (std::size_t k = s.offsets[static_cast<std::size_t>(i)]; k < s.offsets[static_cast<std::size_t>(i) + 1]; ++k) {
    if (s.cols[k] == j) return s.values[k];
  }
  return 0.0;
}

Graph fixture(const std::string& name) {
  std::ifstream is(std::filesystem::path(LVN_DATA_DIR) / "fixtures" / name);
  return graph_from_json(nlohmann::json::parse(is), name);
}

CentralSelection select_ids(std::vector<NodeId> ids) {
  CentralSelection s;
  s.members = ids;
  std::sort(s.members.begin(), s.members.end());
  s.ranked = std::move(ids);
  return s;
}

Tensor2 random_tensor(std::size_t r, std::size_t c, Rng& rng) {
  Tensor2 t(r, c);
  for (double& v : t.values()) v = rng.uniform(-1.0, 1.0);
  return t;
}

Tensor2 identity(std::size_t n) {
  Tensor2 t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

Graph with_random_features(const Graph& g, std::size_t f, Rng& rng) {
  return g.with_features(random_tensor(g.num_nodes(), f, rng));
}

struct Problem {
  AugmentedGraph aug;
  ShiftOperator shift;
  FeatureInput input;
  int label = 0;
};

Problem make_problem(std::uint64_t seed, EdgeMode mode, EmbedMode embed) {
  Rng rng(seed);
  Graph g = with_random_features(oracle::random_connected_graph(8, 0.3, rng), 3, rng);
  const auto sel = select_central(degree_centrality(g), g, 2);
  Problem p;
  p.aug = lvn_augment(g, sel, 2, mode);
  p.shift = build_shift_operator(p.aug.graph);
  p.input = prepare_features(p.aug, embed);
  p.label = 1;
  return p;
}

double loss_of(const Problem& p, const ModelParams& params) {
  const Tensor2 x0 = encode_features(p.input, params);
  const Tensor2 logits = gcn_forward(p.shift, x0, params);
  return cross_entropy(readout_graph(logits), {p.label}).loss;
}

ModelParams analytic_grads(const Problem& p, const ModelParams& params) {
  const Tensor2 x0 = encode_features(p.input, params);
  ForwardTape tape;
  const Tensor2 logits = gcn_forward(p.shift, x0, params, {}, &tape);
  const auto ce = cross_entropy(readout_graph(logits), {p.label});
  ModelParams grads = params.zeros_like();
  const Tensor2 gx0 = backward(tape, params, readout_graph_backward(ce.grad, logits.rows()), grads);
  encode_features_backward(p.input, gx0, grads);
  return grads;
}

ArchConfig small_arch(std::size_t n_c) {
  return {.in_dim = 3, .hidden_dim = 5, .num_layers = 2, .num_classes = 3, .n_c = n_c};
}

}  // namespace

TEST_CASE("shift operator: closed forms") {
  const auto one = build_shift_operator(Graph::build(1, {}, false));
  CHECK(one.values == std::vector<double>{1.0});

  const auto edge = build_shift_operator(oracle::path_graph(2));
  for (NodeId i : {0, 1}) {
    for (NodeId j : {0, 1}) CHECK(entry(edge, i, j) == doctest::Approx(0.5).epsilon(1e-15));
  }

  const auto star = build_shift_operator(oracle::star_graph(4));
  CHECK(entry(star, 0, 1) == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-15));
  CHECK(entry(star, 1, 0) == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-15));
  CHECK(entry(star, 1, 2) == 0.0);
  CHECK(star.add_self_loops);
}

TEST_CASE("shift operator: symmetry and directed reduction") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 1 + rng.below(25);
    const Graph g = oracle::random_graph(n, 0.2, rng);
    const auto s = build_shift_operator(g);
    std::vector<Edge> arcs;
    for (const Edge& e : g.edges()) {
      arcs.push_back(e);
      arcs.push_back({e.dst, e.src});
    }
    const auto d = build_shift_operator(Graph::build(n, arcs, true));
    for (NodeId i = 0; i < static_cast<NodeId>(n); ++i) {
      for (NodeId j = 0; j < static_cast<NodeId>(n); ++j) {
        CHECK(entry(s, i, j) == entry(s, j, i));
        CHECK(std::abs(entry(d, i, j) - entry(s, i, j)) < 1e-15);
      }
    }
  }
}

TEST_CASE("shift operator: directed degrees") {
  // arcs 0->1, 0->2: message 0->1 uses d_out(0)+1 = 3 and d_in(1)+1 = 2
  const std::vector<Edge> arcs{{0, 1}, {0, 2}};
  const auto s = build_shift_operator(Graph::build(3, arcs, true));
  CHECK(entry(s, 1, 0) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));
  CHECK(entry(s, 0, 1) == 0.0);
  CHECK(entry(s, 0, 0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
}

TEST_CASE("init_features: replace and add modes") {
  const Graph star = fixture("star.json");
  const auto aug = lvn_augment(star, select_ids({0}), 2, EdgeMode::Undirected);
  ArchConfig arch{.in_dim = 2, .hidden_dim = 2, .num_layers = 1, .num_classes = 2, .n_c = 2};
  ModelParams p = ModelParams::init(arch, 9);

  const Tensor2 rep = init_features(aug, p, EmbedMode::Replace);
  for (std::size_t slot = 0; slot < 2; ++slot) {
    const auto v = static_cast<std::size_t>(aug.virtual_id(0, slot));
    for (std::size_t c = 0; c < 2; ++c) CHECK(rep(v, c) == p.embedding_table(slot, c));
  }
  // surviving leaf 1 had features (0,1)
  for (std::size_t c = 0; c < 2; ++c) CHECK(rep(0, c) == doctest::Approx(p.w_in(1, c) + p.b_in(0, c)));

  ModelParams zero_p = p;
  zero_p.embedding_table.fill(0.0);
  const Tensor2 add0 = init_features(aug, zero_p, EmbedMode::Add);
  for (std::size_t slot = 0; slot < 2; ++slot) {
    const auto v = static_cast<std::size_t>(aug.virtual_id(0, slot));
    for (std::size_t c = 0; c < 2; ++c) CHECK(add0(v, c) == doctest::Approx(p.w_in(0, c) + p.b_in(0, c)));
  }

  ModelParams id_p = p;
  id_p.w_in = identity(2);
  id_p.b_in.fill(0.0);
  const Tensor2 add = init_features(aug, id_p, EmbedMode::Add);
  for (std::size_t slot = 0; slot < 2; ++slot) {
    const auto v = static_cast<std::size_t>(aug.virtual_id(0, slot));
    const auto& x = aug.registry[slot].origin_features;
    for (std::size_t c = 0; c < 2; ++c) CHECK(add(v, c) == x[c] + id_p.embedding_table(slot, c));
  }

  const auto bare = lvn_augment(oracle::star_graph(4), select_ids({0}), 2, EdgeMode::Undirected);
  CHECK_THROWS_AS(prepare_features(bare, EmbedMode::Add), ConfigError);
}

TEST_CASE("gcn_forward: trivial cases") {
  ArchConfig arch{.in_dim = 2, .hidden_dim = 2, .num_layers = 1, .num_classes = 2, .n_c = 0};
  ModelParams p = ModelParams::init(arch, 1);
  p.layer_weights[0] = identity(2);
  p.layer_biases[0].fill(0.0);
  p.w_out = identity(2);
  p.b_out.fill(0.0);
  const auto shift = build_shift_operator(Graph::build(1, {}, false));
  const Tensor2 x0(1, 2, std::vector<double>{0.7, -0.3});
  const Tensor2 logits = gcn_forward(shift, x0, p);
  CHECK(logits == Tensor2(1, 2, std::vector<double>{0.7, 0.0}));

  // loss = 0.5 |H|^2 gives grad_logits = H, which flows back unchanged on the active unit
  ForwardTape tape;
  const Tensor2 pos(1, 2, std::vector<double>{0.7, 0.4});
  const Tensor2 h = gcn_forward(shift, pos, p, {}, &tape);
  ModelParams g = p.zeros_like();
  CHECK(backward(tape, p, h, g) == h);
  CHECK_THROWS_AS(backward(tape, p, h, g), ConfigError);
  CHECK(g.embedding_table.empty());

  ModelParams z = ModelParams::init({.in_dim = 2, .hidden_dim = 4, .num_layers = 3, .num_classes = 3}, 2);
  z.fill(0.0);
  z.b_out = Tensor2(1, 3, std::vector<double>{1, 2, 3});
  const Tensor2 zl = gcn_forward(build_shift_operator(oracle::path_graph(3)), Tensor2(3, 4, 1.0), z);
  for (std::size_t r = 0; r < 3; ++r) CHECK(zl(r, 2) == 3.0);

  CHECK_THROWS_AS(gcn_forward(shift, Tensor2(1, 3), p), ShapeError);
}

TEST_CASE("dropout: p = 0 matches eval, seeds are deterministic") {
  Rng rng(3);
  const Graph g = oracle::random_connected_graph(10, 0.3, rng);
  const auto shift = build_shift_operator(g);
  const ModelParams p = ModelParams::init({.in_dim = 4, .hidden_dim = 6, .num_layers = 3, .num_classes = 2}, 4);
  const Tensor2 x0 = random_tensor(10, 6, rng);
  CHECK(gcn_forward(shift, x0, p, {.dropout = 0.0, .seed = 1, .training = true}) == gcn_forward(shift, x0, p));
  const ForwardOptions train{.dropout = 0.5, .seed = 11, .training = true};
  CHECK(gcn_forward(shift, x0, p, train) == gcn_forward(shift, x0, p, train));
  CHECK(gcn_forward(shift, x0, p, {.dropout = 0.5, .seed = 11, .training = false}) == gcn_forward(shift, x0, p));
  CHECK_FALSE(gcn_forward(shift, x0, p, train) == gcn_forward(shift, x0, p));
}

TEST_CASE("readouts") {
  const Tensor2 rows(2, 2, std::vector<double>{1, 3, 3, 1});
  CHECK(readout_graph(rows) == Tensor2(1, 2, std::vector<double>{2, 2}));
  CHECK(readout_graph(Tensor2(1, 2, std::vector<double>{4, 5})) == Tensor2(1, 2, std::vector<double>{4, 5}));
  CHECK(readout_graph(Tensor2(2, 2, std::vector<double>{3, 1, 1, 3})) == readout_graph(rows));

  // star(4), hub removed, n_c = 2: rows 0..2 are leaves, 3 and 4 the LVNs
  const auto aug = lvn_augment(oracle::star_graph(4), select_ids({0}), 2, EdgeMode::Undirected);
  const Tensor2 logits(5, 2, std::vector<double>{5, 6, 7, 8, 9, 10, 1, 3, 3, 1});
  const Tensor2 node = readout_node(logits, aug);
  REQUIRE(node.rows() == 4);
  CHECK(node(0, 0) == 2.0);
  CHECK(node(0, 1) == 2.0);
  CHECK(node(1, 0) == 5.0);
  CHECK(node(3, 1) == 10.0);

  const auto one = lvn_augment(oracle::star_graph(4), select_ids({0}), 1, EdgeMode::Undirected);
  const Tensor2 l1(4, 1, std::vector<double>{1, 2, 3, 4});
  CHECK(readout_node(l1, one)(0, 0) == 4.0);

  const auto plan = make_node_readout(aug);
  const Tensor2 back = readout_node_backward(Tensor2(4, 2, 1.0), plan);
  CHECK(back(3, 0) == 0.5);
  CHECK(back(0, 0) == 1.0);
}

TEST_CASE("cross entropy") {
  const auto u = cross_entropy(Tensor2(1, 2), {0});
  CHECK(u.loss == doctest::Approx(std::log(2.0)));
  CHECK(cross_entropy(Tensor2(1, 2, std::vector<double>{800, 0}), {0}).loss < 1e-12);
  Rng rng(2);
  const Tensor2 s = random_tensor(5, 4, rng);
  const auto r = cross_entropy(s, {0, 1, 2, 3, 0}, std::vector<std::size_t>{1, 3});
  for (std::size_t i = 0; i < 5; ++i) {
    double row = 0;
    for (std::size_t c = 0; c < 4; ++c) row += r.grad(i, c);
    CHECK(std::abs(row) < 1e-15);
  }
  CHECK(r.grad(0, 0) == 0.0);
  CHECK_THROWS_AS(cross_entropy(s, {0, 1, 2, 3, 0}, std::vector<std::size_t>{}), ConfigError);
  CHECK(argmax_row(s, 0) < 4);
}

TEST_CASE("gradient check against central differences") {
  for (EdgeMode mode : {EdgeMode::Undirected, EdgeMode::Directed}) {
    for (EmbedMode embed : {EmbedMode::Replace, EmbedMode::Add}) {
      CAPTURE(to_string(mode));
      CAPTURE(to_string(embed));
      const Problem prob = make_problem(100 + static_cast<int>(mode) * 2 + static_cast<int>(embed), mode, embed);
      const ModelParams params = ModelParams::init(small_arch(2), 17);
      const ModelParams grads = analytic_grads(prob, params);
      ModelParams work = params;
      const auto names = params.tensor_names();
      const auto tw = work.tensors();
      const auto tg = grads.tensors();
      const double h = 1e-5;
      for (std::size_t t = 0; t < tw.size(); ++t) {
        double worst = 0;
        for (std::size_t k = 0; k < tw[t]->size(); ++k) {
          double& x = tw[t]->values()[k];
          const double keep = x;
          x = keep + h;
          const double up = loss_of(prob, work);
          x = keep - h;
          const double down = loss_of(prob, work);
          x = keep;
          const double num = (up - down) / (2 * h);
          const double ana = tg[t]->values()[k];
          worst = std::max(worst, std::abs(ana - num) / std::max({std::abs(ana), std::abs(num), 1e-6}));
        }
        CAPTURE(names[t]);
        CHECK(worst < 1e-4);
      }
    }
  }
}

TEST_CASE("replace mode ignores stored origin features") {
  Problem p = make_problem(7, EdgeMode::Directed, EmbedMode::Replace);
  const ModelParams params = ModelParams::init(small_arch(2), 3);
  const Tensor2 before = gcn_forward(p.shift, init_features(p.aug, params, EmbedMode::Replace), params);
  for (auto& rec : p.aug.registry) {
    for (double& v : rec.origin_features) v += 100.0;
  }
  CHECK(gcn_forward(p.shift, init_features(p.aug, params, EmbedMode::Replace), params) == before);
}

TEST_CASE("permutation equivariance") {
  Rng rng(21);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 3 + rng.below(15);
    const Graph g = oracle::random_graph(n, 0.25, rng);
    const Tensor2 x = random_tensor(n, 5, rng);
    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<NodeId>(perm));
    std::vector<Edge> pe;
    for (const Edge& e : g.edges()) pe.push_back({perm[static_cast<std::size_t>(e.src)], perm[static_cast<std::size_t>(e.dst)]});
    Tensor2 px(n, 5);
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t c = 0; c < 5; ++c) px(static_cast<std::size_t>(perm[v]), c) = x(v, c);
    }
    const ModelParams p = ModelParams::init({.in_dim = 5, .hidden_dim = 5, .num_layers = 3, .num_classes = 3}, 8);
    const Tensor2 a = gcn_forward(build_shift_operator(g), x, p);
    const Tensor2 b = gcn_forward(build_shift_operator(Graph::build(n, pe, false)), px, p);
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(a(v, c) - b(static_cast<std::size_t>(perm[v]), c)) < 1e-12);
    }
  }
}

TEST_CASE("embedding gradient is the sum of per-group contributions") {
  const Problem p = make_problem(55, EdgeMode::Undirected, EmbedMode::Add);
  const ModelParams params = ModelParams::init(small_arch(2), 6);
  const Tensor2 x0 = encode_features(p.input, params);
  ForwardTape tape;
  const Tensor2 logits = gcn_forward(p.shift, x0, params, {}, &tape);
  const auto ce = cross_entropy(readout_graph(logits), {p.label});
  ModelParams full = params.zeros_like();
  const Tensor2 gx0 = backward(tape, params, readout_graph_backward(ce.grad, logits.rows()), full);
  encode_features_backward(p.input, gx0, full);

  Tensor2 summed(params.embedding_table.rows(), params.embedding_table.cols());
  std::set<int> groups;
  for (const auto& rec : p.aug.registry) groups.insert(rec.group);
  REQUIRE(groups.size() == 2);
  for (int group : groups) {
    FeatureInput only = p.input;
    for (std::size_t r = 0; r < only.slot.size(); ++r) {
      const auto v = static_cast<NodeId>(r);
      if (p.aug.is_virtual(v) && p.aug.registry[r - p.aug.num_original()].group != group) only.slot[r] = -1;
    }
    ModelParams part = params.zeros_like();
    encode_features_backward(only, gx0, part);
    for (std::size_t k = 0; k < summed.size(); ++k) summed.values()[k] += part.embedding_table.values()[k];
  }
  for (std::size_t k = 0; k < summed.size(); ++k) CHECK(std::abs(summed.values()[k] - full.embedding_table.values()[k]) < 1e-15);
}

TEST_CASE("adam") {
  ModelParams p = ModelParams::init(small_arch(2), 1);
  const ModelParams start = p;
  ModelParams g = p.zeros_like();
  Rng rng(4);
  for (auto* t : g.tensors()) {
    for (double& v : t->values()) v = (rng.below(2) ? 1.0 : -1.0) * rng.uniform(0.1, 2.0);
  }
  AdamState st = AdamState::for_params(p, 1e-3);
  adam_step(p, g, st);
  const auto before = start.tensors(), after = std::as_const(p).tensors(), gt = std::as_const(g).tensors();
  for (std::size_t t = 0; t < before.size(); ++t) {
    for (std::size_t k = 0; k < before[t]->size(); ++k) {
      const double delta = after[t]->values()[k] - before[t]->values()[k];
      const double grad = gt[t]->values()[k];
      if (grad == 0.0) continue;
      CHECK(delta * grad < 0);
      CHECK(std::abs(delta) <= 1e-3 * (1 + 1e-12));
      CHECK(std::abs(delta) >= 1e-3 * (1 - 1e-6));
    }
  }

  ModelParams q = start;
  AdamState zs = AdamState::for_params(q);
  for (int i = 0; i < 5; ++i) adam_step(q, q.zeros_like(), zs);
  CHECK(q == start);

  ModelParams r1 = start, r2 = start;
  AdamState s1 = AdamState::for_params(r1), s2 = AdamState::for_params(r2);
  for (int i = 0; i < 3; ++i) {
    adam_step(r1, g, s1);
    adam_step(r2, g, s2);
  }
  CHECK(r1 == r2);
}

TEST_CASE("mlp probe") {
  MlpParams p = MlpParams::init(3, 4, 2, 5);
  for (auto* t : p.tensors()) t->fill(0.0);
  p.b2 = Tensor2(1, 2, std::vector<double>{0.25, -1});
  Rng rng(6);
  const Tensor2 x = random_tensor(6, 3, rng);
  CHECK(mlp_probe_forward(x, p) == p.b2);

  const MlpParams q = MlpParams::init(3, 4, 2, 5);
  Tensor2 rev(6, 3);
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 3; ++c) rev(5 - r, c) = x(r, c);
  }
  const Tensor2 a = mlp_probe_forward(x, q), b = mlp_probe_forward(rev, q);
  for (std::size_t c = 0; c < 2; ++c) CHECK(std::abs(a(0, c) - b(0, c)) < 1e-14);

  // finite-difference check on the probe as well
  MlpTape tape;
  const Tensor2 s = mlp_probe_forward(x, q, &tape);
  const auto ce = cross_entropy(s, {1});
  MlpParams g = q.zeros_like();
  mlp_probe_backward(tape, q, ce.grad, g);
  MlpParams w = q;
  const auto tw = w.tensors();
  const auto tg = std::as_const(g).tensors();
  for (std::size_t t = 0; t < tw.size(); ++t) {
    for (std::size_t k = 0; k < tw[t]->size(); ++k) {
      double& v = tw[t]->values()[k];
      const double keep = v;
      v = keep + 1e-5;
      const double up = cross_entropy(mlp_probe_forward(x, w), {1}).loss;
      v = keep - 1e-5;
      const double down = cross_entropy(mlp_probe_forward(x, w), {1}).loss;
      v = keep;
      const double num = (up - down) / 2e-5, ana = tg[t]->values()[k];
      CHECK(std::abs(ana - num) / std::max({std::abs(ana), std::abs(num), 1e-6}) < 1e-4);
    }
  }
}

TEST_CASE("parameter init and checkpoints") {
  const ModelParams a = ModelParams::init(small_arch(3), 42);
  CHECK(a == ModelParams::init(small_arch(3), 42));
  CHECK_FALSE(a == ModelParams::init(small_arch(3), 43));
  const double bound = std::sqrt(1.0 / 5.0);
  for (double v : a.embedding_table.values()) CHECK(std::abs(v) <= bound);
  CHECK(a.tensor_names().size() == a.tensors().size());

  const auto path = std::filesystem::temp_directory_path() / "lvn_test_params.json";
  save_params(path, a);
  CHECK(load_params(path) == a);
  std::filesystem::remove(path);

  auto doc = params_to_json(a);
  doc["format"] = "other";
  CHECK_THROWS_AS(params_from_json(doc), DataError);
  auto short_doc = params_to_json(a);
  short_doc["tensors"][0]["values"].erase(0);
  CHECK_THROWS_AS(params_from_json(short_doc), DataError);
}

TEST_CASE("embed mode names") {
  CHECK(parse_embed_mode("add") == EmbedMode::Add);
  CHECK(to_string(EmbedMode::Replace) == "replace");
  CHECK_THROWS_AS(parse_embed_mode("concat"), ConfigError);
}
