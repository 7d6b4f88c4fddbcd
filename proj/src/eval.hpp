#pragma once

#include <span>
#include <utility>
#include <vector>

#include "graph.hpp"
#include "tensor.hpp"

namespace lrgae {

struct ProbeConfig {
  std::size_t epochs = 100;
  double learning_rate = 0.01;
  double weight_decay = 1e-4;
  std::uint64_t seed = 0;
};

// Multinomial logistic regression on frozen embeddings: full-batch Adam on
// the train nodes, model selection at best validation accuracy, returns
// test accuracy. The embedding matrix receives no gradient.
double linear_probe(const Tensor& z, std::span<const int> labels,
                    const NodeSplit& split, const ProbeConfig& cfg);

// (AUC, AP) from raw scores. AUC counts ties as 1/2; AP is the mean over
// positives, in descending score order, of the precision at each
// positive's rank.
std::pair<double, double> link_metrics(std::span<const double> pos_scores,
                                       std::span<const double> neg_scores);

// Lloyd's algorithm with k-means++ seeding; the best of `restarts` runs by
// inertia. Empty clusters are re-seeded at the point farthest from its
// assigned centroid.
std::vector<int> kmeans(const Tensor& z, std::size_t k, std::size_t restarts,
                        Rng& rng);

// Normalized mutual information with arithmetic-mean normalization and
// natural-log entropies. 1.0 when both partitions are single-cluster,
// 0.0 when exactly one has zero entropy.
double nmi(std::span<const int> pred, std::span<const int> truth);

}  // namespace lrgae
