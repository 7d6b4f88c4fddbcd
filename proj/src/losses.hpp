#pragma once

#include <optional>
#include <string>
#include <vector>

#include "graph.hpp"
#include "tensor.hpp"

namespace lrgae {

enum class LossKind { bce, mse, sce, infonce, simcse };

struct LossConfig {
  LossKind kind = LossKind::bce;
  double temperature = 0.5;  // infonce / simcse
  double sce_gamma = 2.0;

  void validate() const;
};

enum class NegStrategy { uniform, degree, similarity };

struct NegSamplerConfig {
  NegStrategy strategy = NegStrategy::uniform;
  double multiplier = 1.0;  // negatives per positive, >= 1

  void validate() const;
};

// Mean over positives of -log sigmoid(s) plus mean over negatives of
// -log(1 - sigmoid(s)), evaluated in the stable log-sum form. Scores are
// raw (pre-sigmoid). Both sets must be nonempty.
Tensor bce_edge_loss(Tape& tape, const Tensor& pos_scores,
                     const Tensor& neg_scores);

// Mean squared error over all entries, or over an explicit coordinate set.
Tensor mse_feature_loss(Tape& tape, const Tensor& pred, const Tensor& target);
Tensor mse_feature_loss(
    Tape& tape, const Tensor& pred, const Tensor& target,
    const std::vector<std::pair<std::size_t, std::size_t>>& coords);

// Mean over rows of (1 - cos(pred_i, target_i))^gamma.
Tensor sce_loss(Tape& tape, const Tensor& pred, const Tensor& target,
                double gamma);

// Symmetric in-batch InfoNCE over cosine similarities at temperature tau;
// row i of `left` is positive with row i of `right`, all other rows are
// in-batch negatives. Requires at least two rows.
Tensor info_nce(Tape& tape, const Tensor& left, const Tensor& right, double tau);

// One-directional (left -> right) variant of info_nce.
Tensor simcse(Tape& tape, const Tensor& left, const Tensor& right, double tau);

// Draws `count` candidate negative node pairs. Uniform and degree-based
// sampling are approximate: pairs may coincide with true edges. Self-pairs
// are never emitted. The similarity strategy keeps a uniform candidate
// (u, v) with probability (1 - cos(z_u, z_v)) / 2 and falls back to uniform
// draws after 10x count attempts.
std::vector<Edge> negative_sample(const Graph& g, std::size_t count,
                                  NegStrategy strategy, Rng& rng,
                                  const Tensor* embeddings = nullptr);

const char* loss_kind_name(LossKind k);
std::optional<LossKind> loss_kind_from_name(const std::string& name);
const char* neg_strategy_name(NegStrategy s);
std::optional<NegStrategy> neg_strategy_from_name(const std::string& name);

}  // namespace lrgae
