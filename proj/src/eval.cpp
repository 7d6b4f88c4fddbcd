#include "eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "nn.hpp"
#include "train.hpp"

namespace lrgae {

// ---- linear probe ------------------------------------------------------------

namespace {

std::vector<int> predict_classes(const Tensor& logits) {
  std::vector<int> out(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.cols(); ++c) {
      if (logits.at(i, c) > logits.at(i, best)) best = c;
    }
    out[i] = static_cast<int>(best);
  }
  return out;
}

double accuracy_on(Tape& tape, const Tensor& z, const Tensor& w, const Tensor& b,
                   std::span<const int> labels,
                   const std::vector<std::size_t>& nodes) {
  Tensor rows = gather_rows(tape, z.detached(), nodes);
  Tensor logits = add_rowvec(tape, matmul(tape, rows, w), b);
  const auto pred = predict_classes(logits);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (pred[i] == labels[nodes[i]]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

}  // namespace

double linear_probe(const Tensor& z, std::span<const int> labels,
                    const NodeSplit& split, const ProbeConfig& cfg) {
  if (split.train.empty() || split.val.empty() || split.test.empty()) {
    throw ContractError("linear_probe: empty split part");
  }
  for (std::size_t i : split.train) {
    if (i >= labels.size()) throw ContractError("linear_probe: label missing");
  }
  std::set<int> train_classes;
  int num_classes = 0;
  for (std::size_t i : split.train) train_classes.insert(labels[i]);
  for (int l : labels) num_classes = std::max(num_classes, l + 1);
  if (train_classes.size() < 2) {
    throw ContractError("linear_probe: training set has a single class");
  }

  const std::size_t d = z.cols();
  const auto c = static_cast<std::size_t>(num_classes);
  Rng rng = Rng::seeded(cfg.seed);
  ParamStore params;
  Tensor w = params.add("probe.weight", Tensor::glorot(d, c, rng));
  Tensor b = params.add("probe.bias", Tensor(1, c));

  // One-hot mask selecting each train node's true-class logit.
  Tensor truth_mask(split.train.size(), c);
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    truth_mask.at(i, static_cast<std::size_t>(labels[split.train[i]])) = 1.0;
  }

  TrainConfig opt_cfg;
  opt_cfg.epochs = cfg.epochs;
  opt_cfg.learning_rate = cfg.learning_rate;
  opt_cfg.weight_decay = cfg.weight_decay;
  AdamState opt;

  double best_val = -1.0;
  Tensor best_w = w.detached();
  Tensor best_b = b.detached();
  const Tensor z_const = z.detached();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Tape tape;
    Tensor rows = gather_rows(tape, z_const, split.train);
    Tensor logits = add_rowvec(tape, matmul(tape, rows, w), b);
    Tensor truth_logit = sum_rows(tape, mul(tape, logits, truth_mask));
    Tensor loss =
        mean_all(tape, sub(tape, logsumexp_rows(tape, logits), truth_logit));
    params.zero_grad();
    tape.backward(loss);
    adam_step(params, opt, opt_cfg);

    Tape eval_tape;
    const double val_acc =
        accuracy_on(eval_tape, z_const, w, b, labels, split.val);
    if (val_acc > best_val) {
      best_val = val_acc;
      best_w = w.detached();
      best_b = b.detached();
    }
  }
  Tape test_tape;
  return accuracy_on(test_tape, z_const, best_w, best_b, labels, split.test);
}

// ---- link metrics -------------------------------------------------------------

std::pair<double, double> link_metrics(std::span<const double> pos_scores,
                                       std::span<const double> neg_scores) {
  if (pos_scores.empty() || neg_scores.empty()) {
    throw ContractError("link_metrics: empty score set");
  }
  const std::size_t p = pos_scores.size(), q = neg_scores.size();
  struct Item {
    double score;
    bool positive;
  };
  std::vector<Item> items;
  items.reserve(p + q);
  for (double s : pos_scores) items.push_back({s, true});
  for (double s : neg_scores) items.push_back({s, false});
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return a.score < b.score; });

  // AUC via the rank-sum statistic with average ranks for ties.
  double rank_sum_pos = 0.0;
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i;
    while (j < items.size() && items[j].score == items[i].score) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (items[t].positive) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  const double u = rank_sum_pos - static_cast<double>(p) *
                                      (static_cast<double>(p) + 1.0) / 2.0;
  const double auc = u / (static_cast<double>(p) * static_cast<double>(q));

  // AP over descending thresholds; tied scores form one block.
  double ap_sum = 0.0;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = items.size(); i > 0;) {
    std::size_t j = i;
    while (j > 0 && items[j - 1].score == items[i - 1].score) --j;
    std::size_t block_tp = 0;
    for (std::size_t t = j; t < i; ++t) {
      if (items[t].positive) ++block_tp;
    }
    tp += block_tp;
    seen += i - j;
    if (block_tp > 0) {
      const double precision =
          static_cast<double>(tp) / static_cast<double>(seen);
      ap_sum += precision * static_cast<double>(block_tp);
    }
    i = j;
  }
  const double ap = ap_sum / static_cast<double>(p);
  return {auc, ap};
}

// ---- k-means -------------------------------------------------------------------

namespace {

double sq_dist(const Tensor& z, std::size_t row, const std::vector<double>& center,
               std::size_t d) {
  double acc = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double diff = z.at(row, j) - center[j];
    acc += diff * diff;
  }
  return acc;
}

struct KmeansRun {
  std::vector<int> assignment;
  double inertia = std::numeric_limits<double>::infinity();
};

KmeansRun lloyd_once(const Tensor& z, std::size_t k, Rng& rng) {
  const std::size_t n = z.rows(), d = z.cols();
  std::vector<std::vector<double>> centers(k, std::vector<double>(d));

  // k-means++ seeding.
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  const std::size_t first = rng.uniform_index(n);
  for (std::size_t j = 0; j < d; ++j) centers[0][j] = z.at(first, j);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      min_d2[i] = std::min(min_d2[i], sq_dist(z, i, centers[c - 1], d));
      total += min_d2[i];
    }
    std::size_t pick;
    if (total == 0.0) {
      pick = rng.uniform_index(n);
    } else {
      const double x = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += min_d2[i];
        if (x < acc) {
          pick = i;
          break;
        }
      }
    }
    for (std::size_t j = 0; j < d; ++j) centers[c][j] = z.at(pick, j);
  }

  KmeansRun run;
  run.assignment.assign(n, -1);
  std::vector<double> dist_to_center(n, 0.0);
  for (std::size_t iter = 0; iter < 300; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = sq_dist(z, i, centers[0], d);
      for (std::size_t c = 1; c < k; ++c) {
        const double dd = sq_dist(z, i, centers[c], d);
        if (dd < best_d) {
          best_d = dd;
          best = c;
        }
      }
      dist_to_center[i] = best_d;
      if (run.assignment[i] != static_cast<int>(best)) {
        run.assignment[i] = static_cast<int>(best);
        changed = true;
      }
    }
    // Re-seed empty clusters at the farthest point.
    std::vector<std::size_t> counts(k, 0);
    for (int a : run.assignment) ++counts[static_cast<std::size_t>(a)];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      for (std::size_t i = 1; i < n; ++i) {
        if (dist_to_center[i] > dist_to_center[far]) far = i;
      }
      run.assignment[far] = static_cast<int>(c);
      dist_to_center[far] = 0.0;
      counts[c] = 1;
      changed = true;
    }
    if (!changed && iter > 0) break;
    for (auto& center : centers) std::fill(center.begin(), center.end(), 0.0);
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(run.assignment[i]);
      ++cnt[c];
      for (std::size_t j = 0; j < d; ++j) centers[c][j] += z.at(i, j);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (cnt[c] > 0) {
        for (std::size_t j = 0; j < d; ++j) {
          centers[c][j] /= static_cast<double>(cnt[c]);
        }
      }
    }
  }
  run.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    run.inertia +=
        sq_dist(z, i, centers[static_cast<std::size_t>(run.assignment[i])], d);
  }
  return run;
}

}  // namespace

std::vector<int> kmeans(const Tensor& z, std::size_t k, std::size_t restarts,
                        Rng& rng) {
  if (k == 0 || k > z.rows()) {
    throw ContractError("kmeans: need 1 <= k <= n, got k=" + std::to_string(k) +
                        " n=" + std::to_string(z.rows()));
  }
  KmeansRun best;
  for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
    KmeansRun run = lloyd_once(z, k, rng);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best.assignment;
}

// ---- NMI -----------------------------------------------------------------------

double nmi(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) {
    throw ContractError("nmi: length mismatch " + std::to_string(pred.size()) +
                        " vs " + std::to_string(truth.size()));
  }
  if (pred.empty()) throw ContractError("nmi: empty labelings");
  const auto n = static_cast<double>(pred.size());

  std::map<std::pair<int, int>, std::size_t> joint;
  std::map<int, std::size_t> cp, ct;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++joint[{pred[i], truth[i]}];
    ++cp[pred[i]];
    ++ct[truth[i]];
  }
  auto entropy = [n](const std::map<int, std::size_t>& counts) {
    double h = 0.0;
    for (const auto& [label, count] : counts) {
      const double p = static_cast<double>(count) / n;
      h -= p * std::log(p);
    }
    return h;
  };
  const double hp = entropy(cp), ht = entropy(ct);
  if (hp == 0.0 && ht == 0.0) return 1.0;  // both single-cluster: identical
  if (hp == 0.0 || ht == 0.0) return 0.0;

  double mi = 0.0;
  for (const auto& [pair, count] : joint) {
    const double pij = static_cast<double>(count) / n;
    const double pi = static_cast<double>(cp[pair.first]) / n;
    const double qj = static_cast<double>(ct[pair.second]) / n;
    mi += pij * std::log(pij / (pi * qj));
  }
  return 2.0 * mi / (hp + ht);
}

}  // namespace lrgae
