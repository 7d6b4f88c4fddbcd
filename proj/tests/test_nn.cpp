#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "nn.hpp"
#include "test_util.hpp"

using namespace lrgae;
using testutil::gradient_check;
using testutil::max_abs_diff;
using testutil::random_tensor;

namespace {

Graph ring_graph(std::size_t n, std::size_t d = 2) {
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i) edges.push_back(ordered_edge(i, (i + 1) % n));
  Rng rng = Rng::seeded(n);
  return Graph(n, edges, Tensor::uniform(n, d, rng, -1, 1));
}

}  // namespace

TEST_CASE("gcn_layer hand cases") {
  Tape tape;
  Tensor h = Tensor::from_rows({{1, 2}, {3, 4}});
  Tensor eye = Tensor::from_rows({{1, 0}, {0, 1}});
  CHECK(max_abs_diff(
            gcn_layer(tape, SparseMatrix::identity(2), h, eye, Activation::none),
            h) == 0.0);

  SparseMatrix half = SparseMatrix::from_triplets(
      2, 2, {{0, 0, 0.5}, {0, 1, 0.5}, {1, 0, 0.5}, {1, 1, 0.5}});
  Tensor v = Tensor::from_rows({{1}, {3}});
  Tensor w = Tensor::from_rows({{1}});
  Tensor out = gcn_layer(tape, half, v, w, Activation::none);
  CHECK(out.at(0, 0) == 2.0);
  CHECK(out.at(1, 0) == 2.0);

  Tensor neg = Tensor::from_rows({{-5}, {-1}});
  Tensor relu_out = gcn_layer(tape, half, neg, w, Activation::relu);
  CHECK(relu_out.at(0, 0) == 0.0);
  CHECK(relu_out.at(1, 0) == 0.0);
}

TEST_CASE("sage_layer hand cases") {
  Tape tape;
  Tensor h = Tensor::from_rows({{2}, {4}});
  Tensor eye = Tensor::from_rows({{1}});
  Tensor zero = Tensor::zeros(1, 1);

  // No edges: the aggregation term vanishes.
  SparseMatrix no_edges = mean_neighbor_matrix(2, {});
  CHECK(max_abs_diff(sage_layer(tape, no_edges, h, eye, zero, Activation::none),
                     h) == 0.0);

  // 2-clique: neighbor mean swaps the rows.
  std::vector<Edge> clique = {Edge{0, 1}};
  SparseMatrix mean = mean_neighbor_matrix(2, clique);
  Tensor out = sage_layer(tape, mean, h, zero, eye, Activation::none);
  CHECK(out.at(0, 0) == 4.0);
  CHECK(out.at(1, 0) == 2.0);

  CHECK(max_abs_diff(sage_layer(tape, mean, h, zero, zero, Activation::none),
                     Tensor::zeros(2, 1)) == 0.0);
}

TEST_CASE("gat_layer singleton and uniform attention") {
  Tape tape;
  Rng rng = Rng::seeded(21);

  // Isolated node: self-loop only, alpha = 1, output = W h.
  NeighborIndex self_only = NeighborIndex::build(1, {});
  Tensor h = Tensor::from_rows({{1.5, -0.5}});
  Tensor w = random_tensor(2, 2, rng);
  Tensor a_src = random_tensor(2, 1, rng);
  Tensor a_dst = random_tensor(2, 1, rng);
  Tensor out = gat_layer(tape, self_only, h, w, a_src, a_dst, Activation::none);
  Tensor expected = matmul(tape, h, w);
  CHECK(max_abs_diff(out, expected) < 1e-14);

  // Identical features everywhere: attention is uniform, so the output of
  // each node is exactly W h (the mean of identical W h rows).
  std::vector<Edge> tri = {Edge{0, 1}, Edge{0, 2}, Edge{1, 2}};
  NeighborIndex nbrs = NeighborIndex::build(3, tri);
  Tensor same = Tensor::from_rows({{1, 2}, {1, 2}, {1, 2}});
  Tensor out3 = gat_layer(tape, nbrs, same, w, a_src, a_dst, Activation::none);
  Tensor wh = matmul(tape, same, w);
  CHECK(max_abs_diff(out3, wh) < 1e-12);
}

TEST_CASE("gat attention matches direct formula on a 3-node path") {
  // Path 0-1-2 with hand-set parameters; alpha computed with plain doubles.
  std::vector<Edge> path = {Edge{0, 1}, Edge{1, 2}};
  NeighborIndex nbrs = NeighborIndex::build(3, path);
  Tensor h = Tensor::from_rows({{1.0}, {-2.0}, {0.5}});
  Tensor w = Tensor::from_rows({{1.5}});
  Tensor a_src = Tensor::from_rows({{0.7}});
  Tensor a_dst = Tensor::from_rows({{-0.3}});

  auto leaky = [](double x) { return x > 0 ? x : 0.2 * x; };
  std::vector<double> wh = {1.5, -3.0, 0.75};
  auto score = [&](std::size_t u, std::size_t v) {
    return leaky(0.7 * wh[u] + (-0.3) * wh[v]);
  };
  // Node 1 attends over {0, 1, 2}.
  const double e10 = std::exp(score(1, 0));
  const double e11 = std::exp(score(1, 1));
  const double e12 = std::exp(score(1, 2));
  const double z = e10 + e11 + e12;
  const double expected1 =
      (e10 / z) * wh[0] + (e11 / z) * wh[1] + (e12 / z) * wh[2];

  Tape tape;
  Tensor out = gat_layer(tape, nbrs, h, w, a_src, a_dst, Activation::none);
  CHECK(out.at(1, 0) == doctest::Approx(expected1).epsilon(1e-12));

  // Attention rows sum to one: reconstruct alpha through the same ops.
  Tensor hw = matmul(tape, h, w);
  Tensor e_center = gather_rows(tape, matmul(tape, hw, a_src), nbrs.target);
  Tensor e_nbr = gather_rows(tape, matmul(tape, hw, a_dst), nbrs.source);
  Tensor alpha = segment_softmax(
      tape, leaky_relu(tape, add(tape, e_center, e_nbr), 0.2), nbrs.offsets);
  for (std::size_t u = 0; u < 3; ++u) {
    double row_sum = 0.0;
    for (std::size_t k = nbrs.offsets[u]; k < nbrs.offsets[u + 1]; ++k) {
      row_sum += alpha.at(k, 0);
    }
    CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("encode produces the full stack") {
  Graph g = ring_graph(4, 3);
  GraphView view = no_augment(g);
  Rng drop_rng = Rng::seeded(0);

  EncoderConfig cfg;
  cfg.arch = EncoderArch::gcn;
  cfg.num_layers = 1;
  cfg.input_dim = 3;
  cfg.hidden_dim = 3;
  cfg.dropout_keep = 1.0;

  // Identity weights: stack is [X, A_hat X].
  ParamStore params;
  Tensor eye(3, 3);
  for (int i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
  params.add("encoder.layer0.weight", eye);
  Tape tape;
  EmbeddingStack stack = encode(tape, view, cfg, params, false, drop_rng);
  REQUIRE(stack.layers.size() == 2);
  CHECK(max_abs_diff(stack.layers[0], g.features()) == 0.0);
  Tensor ax = spmm(tape, view.normalized_adj, g.features());
  CHECK(max_abs_diff(stack.layers[1], ax) == 0.0);

  // Evaluation mode is pure: two calls agree bitwise.
  Tape t2;
  EmbeddingStack s2 = encode(t2, view, cfg, params, false, drop_rng);
  CHECK(max_abs_diff(stack.layers[1], s2.layers[1]) == 0.0);

  // Depth 2 gives three layers.
  EncoderConfig deep = cfg;
  deep.num_layers = 2;
  ParamStore p2;
  Rng init = Rng::seeded(1);
  init_encoder_params(deep, p2, init);
  Tape t3;
  EmbeddingStack s3 = encode(t3, view, deep, p2, false, drop_rng);
  CHECK(s3.layers.size() == 3);
}

TEST_CASE("decoders") {
  Tape tape;
  ParamStore empty;
  Tensor l = Tensor::from_rows({{1, 0}, {1, 2}});
  Tensor r = Tensor::from_rows({{1, 0}, {3, 4}});
  Tensor dots = decode_edge(tape, DecoderKind::dot, l, r, empty);
  CHECK(dots.at(0, 0) == 1.0);
  CHECK(dots.at(1, 0) == 11.0);

  // mlp_edge with zero weights: every pair scores the bias.
  ParamStore mlp;
  mlp.add("decoder.layer0.weight", Tensor::zeros(4, 3));
  mlp.add("decoder.layer0.bias", Tensor::ones(1, 3));
  mlp.add("decoder.layer1.weight", Tensor::zeros(3, 1));
  Tensor bias1(1, 1);
  bias1.at(0, 0) = 0.25;
  mlp.add("decoder.layer1.bias", bias1);
  Tensor scores = decode_edge(tape, DecoderKind::mlp_edge, l, r, mlp);
  CHECK(scores.at(0, 0) == 0.25);
  CHECK(scores.at(1, 0) == 0.25);

  // Feature decoder: identity weight single layer reproduces the input.
  ParamStore feat;
  Tensor eye(2, 2);
  eye.at(0, 0) = eye.at(1, 1) = 1.0;
  feat.add("decoder.layer0.weight", eye);
  feat.add("decoder.layer0.bias", Tensor::zeros(1, 2));
  CHECK(max_abs_diff(decode_feature(tape, l, feat), l) == 0.0);

  // Zero weight with bias b: every row equals b.
  ParamStore biased;
  biased.add("decoder.layer0.weight", Tensor::zeros(2, 2));
  biased.add("decoder.layer0.bias", Tensor::from_rows({{5, -5}}));
  Tensor rows = decode_feature(tape, l, biased);
  CHECK(rows.at(0, 0) == 5.0);
  CHECK(rows.at(1, 1) == -5.0);

  // Single hand-set layer matches a direct matmul.
  ParamStore hand;
  Tensor wh = Tensor::from_rows({{2, 1}, {0, 3}});
  hand.add("decoder.layer0.weight", wh);
  hand.add("decoder.layer0.bias", Tensor::zeros(1, 2));
  Tensor got = decode_feature(tape, l, hand);
  Tensor want = matmul(tape, l, wh);
  CHECK(max_abs_diff(got, want) == 0.0);
}

TEST_CASE("layer gradient checks") {
  Rng rng = Rng::seeded(99);
  std::vector<Edge> edges = {Edge{0, 1}, Edge{1, 2}, Edge{0, 3}, Edge{2, 3}};
  SparseMatrix a_hat = gcn_normalize(4, edges);
  SparseMatrix mean = mean_neighbor_matrix(4, edges);
  NeighborIndex nbrs = NeighborIndex::build(4, edges);

  {
    std::vector<Tensor> in = {random_tensor(4, 3, rng), random_tensor(3, 2, rng)};
    const double err = gradient_check(
        [&](Tape& t, std::vector<Tensor>& v) {
          return sum_all(t, sigmoid(t, gcn_layer(t, a_hat, v[0], v[1],
                                                 Activation::relu)));
        },
        in);
    CHECK(err < 1e-4);
  }
  {
    std::vector<Tensor> in = {random_tensor(4, 3, rng), random_tensor(3, 2, rng),
                              random_tensor(3, 2, rng)};
    const double err = gradient_check(
        [&](Tape& t, std::vector<Tensor>& v) {
          return sum_all(t, sigmoid(t, sage_layer(t, mean, v[0], v[1], v[2],
                                                  Activation::relu)));
        },
        in);
    CHECK(err < 1e-4);
  }
  {
    std::vector<Tensor> in = {random_tensor(4, 3, rng), random_tensor(3, 2, rng),
                              random_tensor(2, 1, rng), random_tensor(2, 1, rng)};
    const double err = gradient_check(
        [&](Tape& t, std::vector<Tensor>& v) {
          return sum_all(t, sigmoid(t, gat_layer(t, nbrs, v[0], v[1], v[2], v[3],
                                                 Activation::none)));
        },
        in);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("gcn and sage layers are permutation equivariant") {
  Rng rng = Rng::seeded(31);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t n = 3 + rng.uniform_index(4);  // n <= 6
    std::vector<Edge> edges;
    for (NodeId u = 0; u + 1 < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (rng.bernoulli(0.5)) edges.push_back(Edge{u, v});
      }
    }
    std::vector<NodeId> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<NodeId>(i);
    for (std::size_t i = n; i > 1; --i) {
      std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
    }
    std::vector<Edge> perm_edges;
    for (const Edge& e : edges) {
      perm_edges.push_back(ordered_edge(perm[e.u], perm[e.v]));
    }

    Tensor h = random_tensor(n, 3, rng);
    Tensor perm_h(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        perm_h.at(perm[i], j) = h.at(i, j);
      }
    }
    Tensor w = random_tensor(3, 2, rng);
    Tensor w2 = random_tensor(3, 2, rng);

    Tape tape;
    Tensor base_gcn = gcn_layer(tape, gcn_normalize(n, edges), h, w,
                                Activation::relu);
    Tensor perm_gcn = gcn_layer(tape, gcn_normalize(n, perm_edges), perm_h, w,
                                Activation::relu);
    Tensor base_sage = sage_layer(tape, mean_neighbor_matrix(n, edges), h, w,
                                  w2, Activation::relu);
    Tensor perm_sage = sage_layer(tape, mean_neighbor_matrix(n, perm_edges),
                                  perm_h, w, w2, Activation::relu);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        CHECK(perm_gcn.at(perm[i], j) ==
              doctest::Approx(base_gcn.at(i, j)).epsilon(1e-12));
        CHECK(perm_sage.at(perm[i], j) ==
              doctest::Approx(base_sage.at(i, j)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("multi-head gat concatenates heads") {
  Graph g = ring_graph(5, 4);
  GraphView view = no_augment(g);
  EncoderConfig cfg;
  cfg.arch = EncoderArch::gat;
  cfg.num_layers = 1;
  cfg.input_dim = 4;
  cfg.hidden_dim = 6;
  cfg.gat_heads = 2;
  cfg.dropout_keep = 1.0;
  ParamStore params;
  Rng init = Rng::seeded(8);
  init_encoder_params(cfg, params, init);
  Rng drop = Rng::seeded(0);
  Tape tape;
  EmbeddingStack stack = encode(tape, view, cfg, params, false, drop);
  CHECK(stack.layers[1].cols() == 6);

  EncoderConfig bad = cfg;
  bad.gat_heads = 4;  // 6 % 4 != 0
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("trainable mask token flows into the stack") {
  Graph g = ring_graph(6, 3);
  Rng mask_rng = Rng::seeded(14);
  Tensor token = Tensor::from_rows({{0.0, 0.0, 0.0}});
  token.set_requires_grad(true);
  GraphView view = feature_mask(g, 0.5, token, mask_rng);
  REQUIRE_FALSE(view.masked_nodes.empty());

  EncoderConfig cfg;
  cfg.arch = EncoderArch::gcn;
  cfg.num_layers = 1;
  cfg.input_dim = 3;
  cfg.hidden_dim = 2;
  cfg.dropout_keep = 1.0;
  ParamStore params;
  Rng init = Rng::seeded(2);
  init_encoder_params(cfg, params, init);

  Rng drop = Rng::seeded(0);
  Tape tape;
  EmbeddingStack stack = encode(tape, view, cfg, params, true, drop, &token);
  Tensor loss = sum_all(tape, mul(tape, stack.layers[1], stack.layers[1]));
  token.zero_grad();
  tape.backward(loss);
  double token_grad = 0.0;
  for (double gv : token.grad()) token_grad += std::abs(gv);
  CHECK(token_grad > 0.0);
}
