#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace lrgae {

using NodeId = std::uint32_t;

// Undirected edge stored once with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  auto operator<=>(const Edge&) const = default;
};

inline Edge ordered_edge(NodeId a, NodeId b) {
  return a < b ? Edge{a, b} : Edge{b, a};
}

struct NodeSplit {
  std::vector<std::size_t> train, val, test;
};

struct LinkSplit {
  std::vector<Edge> train_edges;
  std::vector<Edge> val_pos, val_neg;
  std::vector<Edge> test_pos, test_neg;
};

// Immutable node/edge/feature/label store. Edges are canonical: no
// self-loops, no duplicates, endpoints ordered u < v, sorted.
class Graph {
 public:
  Graph(std::size_t n, std::vector<Edge> edges, Tensor features,
        std::optional<std::vector<int>> labels = std::nullopt,
        std::optional<int> num_classes = std::nullopt);

  std::size_t n() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }
  const Tensor& features() const { return features_; }
  std::size_t feature_dim() const { return features_.cols(); }
  bool has_labels() const { return labels_.has_value(); }
  std::span<const int> labels() const { return *labels_; }
  int num_classes() const { return num_classes_.value_or(0); }

  const std::optional<NodeSplit>& public_split() const { return public_split_; }
  void set_public_split(NodeSplit split) { public_split_ = std::move(split); }

  std::size_t degree(NodeId v) const { return degrees_[v]; }

  // Builds a canonical Graph from a raw edge list: drops self-loops,
  // deduplicates both orientations, validates endpoints.
  static Graph canonicalize(std::size_t n, std::vector<Edge> raw_edges,
                            Tensor features,
                            std::optional<std::vector<int>> labels = std::nullopt,
                            std::optional<int> num_classes = std::nullopt);

  bool operator==(const Graph& other) const;

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
  Tensor features_;
  std::optional<std::vector<int>> labels_;
  std::optional<int> num_classes_;
  std::optional<NodeSplit> public_split_;
  std::vector<std::size_t> degrees_;
};

// Sorted neighbor lists of an undirected edge set.
std::vector<std::vector<NodeId>> adjacency_lists(std::size_t n,
                                                 std::span<const Edge> edges);

// Symmetrically normalized adjacency with self-loops:
// D~^{-1/2} (A + I) D~^{-1/2}.
SparseMatrix gcn_normalize(std::size_t n, std::span<const Edge> edges);
SparseMatrix gcn_normalize(const Graph& g);

// Row-normalized adjacency D^{-1} A without self-loops (rows of isolated
// nodes are all zero); the neighbor-mean aggregation operator.
SparseMatrix mean_neighbor_matrix(std::size_t n, std::span<const Edge> edges);

// Dataset directory IO. Format: edges.tsv (tab-separated integer pairs),
// features.csv (comma-separated floats), labels.csv (optional, one integer
// per line), splits.json (optional public node split).
Graph load_graph(const std::string& dir);
void save_graph(const Graph& g, const std::string& dir);

// Random node split honoring `fractions`; a public split attached to the
// graph takes precedence and is returned verbatim.
NodeSplit node_split(const Graph& g, std::array<double, 3> fractions,
                     std::uint64_t seed);

// Partitions edges into train/val/test positives and samples an equal
// number of distinct non-edge negatives for val and test.
LinkSplit link_split(const Graph& g, std::array<double, 3> fractions,
                     std::uint64_t seed);

struct SbmSpec {
  std::vector<std::size_t> block_sizes;
  double p_in = 0.9;
  double p_out = 0.05;
  std::size_t feature_dim = 8;
  double noise = 0.1;
  std::uint64_t seed = 0;
};

// Stochastic block model generator: within-block edge probability p_in,
// cross-block p_out, features = one-hot block indicator plus Gaussian
// noise, labels = block ids.
Graph generate_synthetic(const SbmSpec& spec);

}  // namespace lrgae
