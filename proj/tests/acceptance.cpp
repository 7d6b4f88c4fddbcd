// Acceptance suite: runs every release criterion end to end and prints one
// pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "experiment.hpp"
#include "eval.hpp"
#include "test_util.hpp"

using namespace lrgae;
using testutil::gradient_check;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  bool skipped = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

Graph sbm(std::size_t per_block, double p_in, double p_out, std::size_t dim,
          double noise, std::uint64_t seed) {
  SbmSpec spec;
  spec.block_sizes = {per_block, per_block};
  spec.p_in = p_in;
  spec.p_out = p_out;
  spec.feature_dim = dim;
  spec.noise = noise;
  spec.seed = seed;
  return generate_synthetic(spec);
}

// ---- 1. gradient suite -------------------------------------------------------

Outcome gradient_suite() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng = Rng::seeded(2024);
  const int instances = 20;
  double worst = 0.0;
  std::string worst_name;

  auto track = [&](const char* name, double err) {
    if (err > worst) {
      worst = err;
      worst_name = name;
    }
    return err < 1e-4;
  };

  auto random_graph_edges = [&](std::size_t n) {
    std::vector<Edge> edges;
    for (NodeId u = 0; u + 1 < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (rng.bernoulli(0.5)) edges.push_back(Edge{u, v});
      }
    }
    return edges;
  };

  bool ok = true;
  for (int i = 0; i < instances; ++i) {
    const std::size_t n = 4 + rng.uniform_index(3);
    const auto edges = random_graph_edges(n);
    SparseMatrix a_hat = gcn_normalize(n, edges);
    SparseMatrix mean = mean_neighbor_matrix(n, edges);
    NeighborIndex nbrs = NeighborIndex::build(n, edges);

    {
      std::vector<Tensor> in = {testutil::random_tensor(n, 3, rng),
                                testutil::random_tensor(3, 2, rng)};
      ok &= track("gcn", gradient_check(
          [&](Tape& t, std::vector<Tensor>& v) {
            return sum_all(t, sigmoid(t, gcn_layer(t, a_hat, v[0], v[1],
                                                   Activation::relu)));
          }, in));
    }
    {
      std::vector<Tensor> in = {testutil::random_tensor(n, 3, rng),
                                testutil::random_tensor(3, 2, rng),
                                testutil::random_tensor(3, 2, rng)};
      ok &= track("sage", gradient_check(
          [&](Tape& t, std::vector<Tensor>& v) {
            return sum_all(t, sigmoid(t, sage_layer(t, mean, v[0], v[1], v[2],
                                                    Activation::relu)));
          }, in));
    }
    {
      std::vector<Tensor> in = {testutil::random_tensor(n, 3, rng),
                                testutil::random_tensor(3, 2, rng),
                                testutil::random_tensor(2, 1, rng),
                                testutil::random_tensor(2, 1, rng)};
      ok &= track("gat", gradient_check(
          [&](Tape& t, std::vector<Tensor>& v) {
            return sum_all(t, sigmoid(t, gat_layer(t, nbrs, v[0], v[1], v[2],
                                                   v[3], Activation::none)));
          }, in));
    }
    {
      std::vector<Tensor> in = {testutil::random_tensor(5, 3, rng),
                                testutil::random_tensor(5, 3, rng)};
      ParamStore none;
      ok &= track("decoder_dot", gradient_check(
          [&](Tape& t, std::vector<Tensor>& v) {
            return sum_all(t, sigmoid(t, decode_edge(t, DecoderKind::dot, v[0],
                                                     v[1], none)));
          }, in));
    }
    {
      // MLP edge decoder: parameters join the checked inputs.
      Tensor w0 = testutil::random_tensor(6, 4, rng);
      Tensor b0 = testutil::random_tensor(1, 4, rng);
      Tensor w1 = testutil::random_tensor(4, 1, rng);
      Tensor b1 = testutil::random_tensor(1, 1, rng);
      ParamStore params;
      params.add("decoder.layer0.weight", w0);
      params.add("decoder.layer0.bias", b0);
      params.add("decoder.layer1.weight", w1);
      params.add("decoder.layer1.bias", b1);
      std::vector<Tensor> in = {testutil::random_tensor(5, 3, rng),
                                testutil::random_tensor(5, 3, rng), w0, b0, w1,
                                b1};
      ok &= track("decoder_mlp_edge", gradient_check(
          [&](Tape& t, std::vector<Tensor>& v) {
            return sum_all(t, sigmoid(t, decode_edge(t, DecoderKind::mlp_edge,
                                                     v[0], v[1], params)));
          }, in));
    }
    {
      Tensor w0 = testutil::random_tensor(3, 4, rng);
      Tensor b0 = testutil::random_tensor(1, 4, rng);
      Tensor w1 = testutil::random_tensor(4, 3, rng);
      Tensor b1 = testutil::random_tensor(1, 3, rng);
      ParamStore params;
      params.add("decoder.layer0.weight", w0);
      params.add("decoder.layer0.bias", b0);
      params.add("decoder.layer1.weight", w1);
      params.add("decoder.layer1.bias", b1);
      std::vector<Tensor> in = {testutil::random_tensor(5, 3, rng), w0, b0, w1,
                                b1};
      ok &= track("decoder_mlp_feature", gradient_check(
          [&](Tape& t, std::vector<Tensor>& v) {
            return sum_all(t, sigmoid(t, decode_feature(t, v[0], params)));
          }, in));
    }
    {
      std::vector<Tensor> in = {testutil::random_tensor(5, 1, rng),
                                testutil::random_tensor(6, 1, rng)};
      ok &= track("loss_bce", gradient_check(
          [&](Tape& t, std::vector<Tensor>& v) {
            return bce_edge_loss(t, v[0], v[1]);
          }, in));
    }
    {
      std::vector<Tensor> in = {testutil::random_tensor(4, 3, rng),
                                testutil::random_tensor(4, 3, rng)};
      ok &= track("loss_mse", gradient_check(
          [&](Tape& t, std::vector<Tensor>& v) {
            return mse_feature_loss(t, v[0], v[1]);
          }, in));
    }
    {
      std::vector<Tensor> in = {testutil::random_tensor(4, 3, rng, 0.3, 2.0),
                                testutil::random_tensor(4, 3, rng, 0.3, 2.0)};
      ok &= track("loss_sce", gradient_check(
          [&](Tape& t, std::vector<Tensor>& v) {
            return sce_loss(t, v[0], v[1], 2.0);
          }, in));
    }
    {
      std::vector<Tensor> in = {testutil::random_tensor(4, 3, rng, 0.2, 2.0),
                                testutil::random_tensor(4, 3, rng, 0.2, 2.0)};
      ok &= track("loss_infonce", gradient_check(
          [&](Tape& t, std::vector<Tensor>& v) {
            return info_nce(t, v[0], v[1], 0.5);
          }, in));
      ok &= track("loss_simcse", gradient_check(
          [&](Tape& t, std::vector<Tensor>& v) {
            return simcse(t, v[0], v[1], 0.5);
          }, in));
    }
  }

  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << instances << " instances per family, worst rel. err " << worst
         << " (" << worst_name << "), " << elapsed << " s";
  return {ok && elapsed < 60.0, false, detail.str()};
}

// ---- 2. identical-view degeneracy ---------------------------------------------

Outcome case1_degeneracy() {
  Graph g = sbm(12, 0.5, 0.1, 6, 0.2, 3);
  GraphView view = no_augment(g);
  EncoderConfig enc;
  enc.num_layers = 2;
  enc.input_dim = g.feature_dim();
  enc.hidden_dim = 8;
  enc.dropout_keep = 1.0;
  ParamStore params;
  Rng init = Rng::seeded(10);
  init_encoder_params(enc, params, init);
  Rng drop = Rng::seeded(0);
  Tape tape;
  EmbeddingStack stack = encode(tape, view, enc, params, false, drop);

  PairBatch batch;
  for (std::size_t i = 0; i < g.n(); ++i) {
    batch.left_nodes.push_back(i);
    batch.right_nodes.push_back(i);
  }
  ViewSpec case1;
  case1.l = case1.r = 2;
  case1.pair_mode = PairMode::same_node;
  if (case_of(case1) != 1) return {false, false, "spec does not map to case 1"};

  DecoderConfig identity;
  BranchOutputs outs =
      left_right(tape, case1, stack, stack, batch, identity, params, false);
  const double loss = mse_feature_loss(tape, outs.left, outs.right).item();
  std::ostringstream detail;
  detail << "identical views, l=r, v=u: mse loss = " << loss;
  return {loss == 0.0, false, detail.str()};
}

// ---- 3. structure-loss equivalence ---------------------------------------------

Outcome structure_loss_equivalence() {
  Graph g = sbm(25, 0.5, 0.08, 8, 0.2, 21);  // 50-node fixture
  const std::size_t n = g.n();
  Preset p = preset("gae", 2);
  EncoderConfig enc;
  enc.num_layers = 2;
  enc.hidden_dim = 8;
  enc.dropout_keep = 1.0;
  DecoderConfig dec;
  LossConfig loss;
  NegSamplerConfig neg;
  TrainConfig tcfg;
  tcfg.epochs = 10;
  tcfg.seed = 13;
  tcfg.weight_decay = 0.0;

  struct Snapshot {
    double loss;
    std::vector<std::vector<double>> weights;
    std::vector<std::pair<std::size_t, std::size_t>> pos, negs;
  };
  std::vector<Snapshot> snaps;
  TrainHooks hooks;
  hooks.observer = [&](const EpochInfo& info) {
    Snapshot s;
    s.loss = info.loss;
    for (const auto& [name, t] : info.params) {
      s.weights.emplace_back(t.values().begin(), t.values().end());
    }
    for (std::size_t i = 0; i < info.batch.left_nodes.size(); ++i) {
      s.pos.emplace_back(info.batch.left_nodes[i], info.batch.right_nodes[i]);
    }
    for (std::size_t i = 0; i < info.batch.neg_left.size(); ++i) {
      s.negs.emplace_back(info.batch.neg_left[i], info.batch.neg_right[i]);
    }
    snaps.push_back(std::move(s));
  };
  train(g, p.aug_a, p.aug_b, p.view, enc, dec, loss, neg, tcfg, &hooks);

  // Independent dense evaluation of the structure-reconstruction loss.
  std::vector<std::vector<double>> adj(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) adj[i][i] = 1.0;
  for (const Edge& e : g.edges()) adj[e.u][e.v] = adj[e.v][e.u] = 1.0;
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    deg[i] = std::accumulate(adj[i].begin(), adj[i].end(), 0.0);
  }
  std::vector<std::vector<double>> a_hat(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a_hat[i][j] = adj[i][j] / std::sqrt(deg[i] * deg[j]);
    }
  }
  auto dense_mm = [](const std::vector<std::vector<double>>& a,
                     const std::vector<std::vector<double>>& b) {
    const std::size_t rows = a.size(), inner = b.size(), cols = b[0].size();
    std::vector<std::vector<double>> out(rows, std::vector<double>(cols, 0.0));
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t k = 0; k < inner; ++k) {
        for (std::size_t j = 0; j < cols; ++j) out[i][j] += a[i][k] * b[k][j];
      }
    }
    return out;
  };

  const std::size_t d = g.feature_dim(), h = 8;
  double max_diff = 0.0;
  for (const Snapshot& s : snaps) {
    std::vector<std::vector<double>> x(n, std::vector<double>(d));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) x[i][j] = g.features().at(i, j);
    }
    std::vector<std::vector<double>> w1(d, std::vector<double>(h));
    std::vector<std::vector<double>> w2(h, std::vector<double>(h));
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < h; ++j) w1[i][j] = s.weights[0][i * h + j];
    }
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j < h; ++j) w2[i][j] = s.weights[1][i * h + j];
    }
    auto h1 = dense_mm(a_hat, dense_mm(x, w1));
    for (auto& row : h1) {
      for (double& v : row) v = std::max(v, 0.0);
    }
    auto z = dense_mm(a_hat, dense_mm(h1, w2));
    auto score = [&](std::size_t u, std::size_t v) {
      double dot = 0.0;
      for (std::size_t j = 0; j < h; ++j) dot += z[u][j] * z[v][j];
      return dot;
    };
    double direct = 0.0;
    for (const auto& [u, v] : s.pos) {
      direct -= std::log(1.0 / (1.0 + std::exp(-score(u, v)))) /
                static_cast<double>(s.pos.size());
    }
    for (const auto& [u, v] : s.negs) {
      direct -= std::log(1.0 - 1.0 / (1.0 + std::exp(-score(u, v)))) /
                static_cast<double>(s.negs.size());
    }
    max_diff = std::max(max_diff, std::abs(direct - s.loss));
  }
  std::ostringstream detail;
  detail << snaps.size() << " epochs, max |engine - direct| = " << max_diff;
  return {max_diff < 1e-12, false, detail.str()};
}

// ---- 4. metric oracles ----------------------------------------------------------

Outcome metric_oracles() {
  Rng rng = Rng::seeded(404);
  double worst_nmi_diff = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t np = 1 + rng.uniform_index(200);
    const std::size_t nq = 1 + rng.uniform_index(200);
    std::set<double> seen;
    auto draw_unique = [&] {
      double v;
      do {
        v = rng.uniform(-5, 5);
      } while (!seen.insert(v).second);
      return v;
    };
    std::vector<double> pos(np), neg(nq);
    for (auto& s : pos) s = draw_unique();
    for (auto& s : neg) s = draw_unique();

    const auto [auc, ap] = link_metrics(pos, neg);

    // Brute-force pairwise AUC.
    double wins = 0.0;
    for (double a : pos) {
      for (double b : neg) {
        if (a > b) {
          wins += 1.0;
        } else if (a == b) {
          wins += 0.5;
        }
      }
    }
    const double brute_auc = wins / static_cast<double>(np * nq);
    if (auc != brute_auc) {
      return {false, false, "AUC mismatch at trial " + std::to_string(trial)};
    }

    // Rank-enumerated AP (scores are distinct by construction).
    struct Item { double s; bool p; };
    std::vector<Item> items;
    for (double s : pos) items.push_back({s, true});
    for (double s : neg) items.push_back({s, false});
    std::sort(items.begin(), items.end(),
              [](const Item& a, const Item& b) { return a.s > b.s; });
    double ap_sum = 0.0;
    std::size_t tp = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (items[i].p) {
        ++tp;
        ap_sum += static_cast<double>(tp) / static_cast<double>(i + 1);
      }
    }
    const double brute_ap = ap_sum / static_cast<double>(np);
    if (ap != brute_ap) {
      return {false, false, "AP mismatch at trial " + std::to_string(trial)};
    }
  }

  // NMI against a direct entropy-formula evaluation.
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(49);
    std::vector<int> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<int>(rng.uniform_index(5));
      b[i] = static_cast<int>(rng.uniform_index(4));
    }
    std::map<int, double> pa, pb;
    std::map<std::pair<int, int>, double> pj;
    for (std::size_t i = 0; i < n; ++i) {
      pa[a[i]] += 1.0 / static_cast<double>(n);
      pb[b[i]] += 1.0 / static_cast<double>(n);
      pj[{a[i], b[i]}] += 1.0 / static_cast<double>(n);
    }
    double ha = 0.0, hb = 0.0, mi = 0.0;
    for (const auto& [k, v] : pa) ha -= v * std::log(v);
    for (const auto& [k, v] : pb) hb -= v * std::log(v);
    for (const auto& [k, v] : pj) {
      mi += v * std::log(v / (pa[k.first] * pb[k.second]));
    }
    double direct;
    if (ha == 0.0 && hb == 0.0) {
      direct = 1.0;
    } else if (ha == 0.0 || hb == 0.0) {
      direct = 0.0;
    } else {
      direct = 2.0 * mi / (ha + hb);
    }
    worst_nmi_diff = std::max(worst_nmi_diff, std::abs(nmi(a, b) - direct));
  }
  std::ostringstream detail;
  detail << "1000 AUC/AP instances exact; NMI max diff " << worst_nmi_diff;
  return {worst_nmi_diff < 1e-12, false, detail.str()};
}

// ---- 5. synthetic recovery -------------------------------------------------------

// Spectral bipartition via power iteration on the normalized adjacency with
// the leading eigenvector deflated; the engine-independent sanity oracle.
std::vector<int> spectral_bipartition(const Graph& g) {
  const std::size_t n = g.n();
  SparseMatrix a_hat = gcn_normalize(g);
  Tensor dense = a_hat.to_dense();
  auto matvec = [&](const std::vector<double>& x) {
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) y[i] += dense.at(i, j) * x[j];
    }
    return y;
  };
  auto normalize = [](std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    s = std::sqrt(s);
    if (s > 0) {
      for (double& v : x) v /= s;
    }
  };
  std::vector<double> u1(n, 1.0);
  normalize(u1);
  for (int iter = 0; iter < 300; ++iter) {
    u1 = matvec(u1);
    normalize(u1);
  }
  double lambda1 = 0.0;
  {
    const auto au = matvec(u1);
    for (std::size_t i = 0; i < n; ++i) lambda1 += u1[i] * au[i];
  }
  Rng rng = Rng::seeded(55);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1, 1);
  for (int iter = 0; iter < 500; ++iter) {
    auto av = matvec(v);
    double proj = 0.0;
    for (std::size_t i = 0; i < n; ++i) proj += u1[i] * av[i];
    for (std::size_t i = 0; i < n; ++i) av[i] -= lambda1 * proj * u1[i] / lambda1;
    v = std::move(av);
    normalize(v);
  }
  std::vector<int> part(n);
  for (std::size_t i = 0; i < n; ++i) part[i] = v[i] >= 0.0 ? 1 : 0;
  return part;
}

Outcome synthetic_recovery() {
  const auto start = std::chrono::steady_clock::now();
  Graph g = sbm(100, 0.9, 0.05, 16, 0.2, 7);  // n=200 two-block SBM

  // Engine-independent oracle: the fixture itself must be recoverable.
  const auto spectral = spectral_bipartition(g);
  const double spectral_nmi = nmi(spectral, g.labels());
  if (spectral_nmi < 0.9) {
    return {false, false,
            "spectral sanity oracle failed: nmi=" + std::to_string(spectral_nmi)};
  }

  Preset p = preset("lrgae7", 2);
  EncoderConfig enc;
  enc.num_layers = 2;
  enc.hidden_dim = 64;
  enc.dropout_keep = 1.0;
  DecoderConfig dec;
  LossConfig loss;
  NegSamplerConfig neg;
  TrainConfig tcfg;
  tcfg.epochs = 300;
  tcfg.seed = 0;
  auto [params, record] =
      train(g, p.aug_a, p.aug_b, p.view, enc, dec, loss, neg, tcfg);

  EncoderConfig enc_resolved = enc;
  enc_resolved.input_dim = g.feature_dim();
  Tensor z = embed(g, enc_resolved, params, EmbedMode::last);

  Rng cluster_rng = Rng::seeded(5);
  const auto assignment = kmeans(z, 2, 10, cluster_rng);
  const double cluster_nmi = nmi(assignment, g.labels());

  const NodeSplit split = node_split(g, {0.8, 0.1, 0.1}, 17);
  ProbeConfig probe;
  probe.seed = 3;
  const double acc = linear_probe(z, g.labels(), split, probe);

  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << "spectral oracle nmi=" << spectral_nmi << ", kmeans nmi="
         << cluster_nmi << " (need >= 0.9), probe acc=" << acc
         << " (need >= 0.95), " << elapsed << " s";
  return {cluster_nmi >= 0.9 && acc >= 0.95 && elapsed < 120.0, false,
          detail.str()};
}

// ---- 6/7. citation-graph criteria ------------------------------------------------

std::string cora_dir() {
  if (const char* env = std::getenv("LRGAE_CORA_DIR")) return env;
  for (const char* candidate : {"data/cora", "../data/cora", "../../data/cora"}) {
    if (fs::exists(fs::path(candidate) / "edges.tsv")) return candidate;
  }
  return {};
}

Outcome cora_link_prediction(const std::string& dir) {
  const auto start = std::chrono::steady_clock::now();
  nlohmann::json cfg = {
      {"dataset", dir},
      {"task", "link_prediction"},
      {"preset", "lrgae7"},
      {"mask_ratio", 0.7},
      {"encoder", {{"num_layers", 2}, {"hidden_dim", 256}}},
      {"seeds", {0}},
  };
  ExperimentResult result = run_experiment(parse_experiment_config(cfg));
  const double auc = result.aggregate.at("auc").first;
  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << "test AUC = " << 100.0 * auc << " (need >= 91.4), " << elapsed
         << " s";
  return {auc >= 0.914 && elapsed < 900.0, false, detail.str()};
}

Outcome cora_node_classification(const std::string& dir) {
  nlohmann::json cfg = {
      {"dataset", dir},
      {"task", "node_classification"},
      {"preset", "lrgae8"},
      {"encoder", {{"num_layers", 2}, {"hidden_dim", 256}}},
      {"seeds", {0}},
  };
  ExperimentResult result = run_experiment(parse_experiment_config(cfg));
  const double acc = result.aggregate.at("accuracy").first;
  std::ostringstream detail;
  detail << "test accuracy = " << 100.0 * acc << " (need >= 79.0)";
  return {acc >= 0.79, false, detail.str()};
}

// ---- 8. determinism ---------------------------------------------------------------

Outcome determinism() {
  for (const std::string task :
       {"clustering", "node_classification", "link_prediction"}) {
    nlohmann::json cfg = {
        {"dataset",
         {{"sbm",
           {{"block_sizes", {25, 25}},
            {"p_in", 0.5},
            {"p_out", 0.05},
            {"feature_dim", 6},
            {"noise", 0.15},
            {"seed", 9}}}}},
        {"task", task},
        {"preset", "lrgae7"},
        {"encoder", {{"num_layers", 2}, {"hidden_dim", 8}, {"dropout_keep", 0.5}}},
        {"train", {{"epochs", 6}}},
        {"seeds", {0, 1}},
    };
    ExperimentConfig parsed = parse_experiment_config(cfg);
    auto strip = [](nlohmann::json j) {
      j.erase("total_wall_clock_s");
      for (auto& entry : j.at("per_seed")) entry.erase("wall_clock_s");
      return j.dump();
    };
    const std::string r1 = strip(result_to_json(run_experiment(parsed)));
    const std::string r2 = strip(result_to_json(run_experiment(parsed)));
    if (r1 != r2) {
      return {false, false, "result bodies differ for task " + task};
    }
  }
  return {true, false,
          "3 tasks x 2 runs: result bodies identical (timing fields excluded)"};
}

// ---- 9. ablation smoke matrix -------------------------------------------------------

Outcome ablation_smoke() {
  const auto start = std::chrono::steady_clock::now();
  const nlohmann::json dataset = {
      {"sbm",
       {{"block_sizes", {20, 20}},
        {"p_in", 0.5},
        {"p_out", 0.08},
        {"feature_dim", 6},
        {"noise", 0.15},
        {"seed", 2}}}};
  const std::vector<std::string> strategies = {"uniform", "degree", "similarity"};
  std::set<int> cases_seen;
  std::size_t runs = 0;

  auto execute = [&](nlohmann::json cfg) {
    ExperimentConfig parsed = parse_experiment_config(cfg);
    cases_seen.insert(case_of(parsed.model.view));
    run_experiment(parsed);
    ++runs;
  };

  const std::map<std::string, std::vector<std::string>> preset_losses = {
      {"gae", {"bce", "infonce", "simcse"}},
      {"maskgae", {"bce", "infonce", "simcse"}},
      {"lrgae6", {"bce", "infonce", "simcse"}},
      {"lrgae7", {"bce", "infonce", "simcse"}},
      {"lrgae8", {"bce", "infonce", "simcse"}},
      {"gae_f", {"mse", "sce", "infonce", "simcse"}},
      {"graphmae", {"mse", "sce", "infonce", "simcse"}},
  };
  try {
    for (const auto& [preset_name, losses] : preset_losses) {
      for (const std::string& loss_name : losses) {
        for (const std::string& strategy : strategies) {
          nlohmann::json cfg = {
              {"dataset", dataset},
              {"task", "clustering"},
              {"preset", preset_name},
              {"loss", {{"kind", loss_name}}},
              {"neg_sampler", {{"strategy", strategy}}},
              {"encoder",
               {{"num_layers", 2}, {"hidden_dim", 8}, {"dropout_keep", 1.0}}},
              {"train", {{"epochs", 5}}},
              {"seeds", {0}},
          };
          execute(cfg);
        }
      }
    }
    // Case 2 (distinct views, equal fields, same nodes) has no preset; an
    // explicit two-view contrastive configuration exercises it.
    for (const std::string& loss_name : {"infonce", "simcse"}) {
      for (const std::string& strategy : strategies) {
        nlohmann::json cfg = {
            {"dataset", dataset},
            {"task", "clustering"},
            {"model",
             {{"aug_a", {{"kind", "edge_mask"}, {"ratio", 0.5}}},
              {"aug_b", {{"kind", "edge_mask"}, {"ratio", 0.5}}},
              {"view",
               {{"left_graph", "A"},
                {"right_graph", "B"},
                {"l", 2},
                {"r", 2},
                {"pair_mode", "same_node"}}},
              {"decoder", {{"kind", "dot"}}},
              {"loss", {{"kind", loss_name}}},
              {"neg_sampler", {{"strategy", strategy}}}}},
            {"encoder",
             {{"num_layers", 2}, {"hidden_dim", 8}, {"dropout_keep", 1.0}}},
            {"train", {{"epochs", 5}}},
            {"seeds", {0}},
        };
        execute(cfg);
      }
    }
  } catch (const std::exception& e) {
    return {false, false, std::string("run failed: ") + e.what()};
  }

  const bool all_cases = cases_seen == std::set<int>{2, 3, 4, 5, 6, 7, 8};
  std::ostringstream detail;
  detail << runs << " runs, cases exercised:";
  for (int c : cases_seen) detail << " " << c;
  detail << ", " << seconds_since(start) << " s";
  return {all_cases, false, detail.str()};
}

}  // namespace

int main() {
  struct Entry {
    int id;
    std::string name;
    Outcome outcome;
  };
  std::vector<Entry> entries;

  entries.push_back({1, "gradient suite", gradient_suite()});
  entries.push_back({2, "identical-view degeneracy", case1_degeneracy()});
  entries.push_back(
      {3, "structure-loss equivalence", structure_loss_equivalence()});
  entries.push_back({4, "metric oracles", metric_oracles()});
  entries.push_back({5, "synthetic recovery", synthetic_recovery()});

  const std::string cora = cora_dir();
  if (!cora.empty()) {
    entries.push_back({6, "cora link prediction", cora_link_prediction(cora)});
    entries.push_back(
        {7, "cora node classification", cora_node_classification(cora)});
  } else {
    const bool substitute_ok =
        entries[2].outcome.pass && entries[4].outcome.pass;
    Outcome skipped{substitute_ok, true,
                    "dataset directory not present; per contract this "
                    "criterion is replaced by criteria 3 and 5, which " +
                        std::string(substitute_ok ? "pass" : "FAIL")};
    entries.push_back({6, "cora link prediction", skipped});
    entries.push_back({7, "cora node classification", skipped});
  }

  entries.push_back({8, "determinism", determinism()});
  entries.push_back({9, "ablation smoke matrix", ablation_smoke()});

  bool all_pass = true;
  for (const Entry& e : entries) {
    const char* tag = e.outcome.pass ? (e.outcome.skipped ? "PASS*" : "PASS")
                                     : "FAIL";
    std::cout << "[" << tag << "] criterion " << e.id << ": " << e.name
              << " — " << e.outcome.detail << "\n";
    all_pass &= e.outcome.pass;
  }
  std::cout << (all_pass ? "ACCEPTANCE: all criteria satisfied\n"
                         : "ACCEPTANCE: FAILURES PRESENT\n");
  return all_pass ? 0 : 1;
}
