#pragma once

#include <optional>
#include <string>
#include <vector>

#include "graph.hpp"

namespace lrgae {

enum class AugmentKind { none, edge_mask, path_mask, node_mask, feature_mask };

struct AugmentSpec {
  AugmentKind kind = AugmentKind::none;
  double ratio = 0.0;        // mask probability / root fraction
  std::size_t walk_len = 3;  // path_mask only
};

// An augmented view of a graph: the surviving edge set, the record of what
// was masked, and the (possibly feature-masked) node features. The base
// graph must outlive the view.
struct GraphView {
  const Graph* base = nullptr;
  std::vector<Edge> visible_edges;
  std::vector<Edge> masked_edges;
  Tensor features;                       // n x d
  std::vector<std::size_t> masked_nodes; // sorted, feature masking only
  SparseMatrix normalized_adj;           // gcn_normalize over visible_edges
};

// Identity view over the original graph.
GraphView no_augment(const Graph& g);

// Masks each stored undirected edge independently with probability p.
GraphView edge_mask(const Graph& g, double p, Rng& rng);

// Samples ceil(root_fraction * n) root nodes without replacement and masks
// every edge traversed by a walk_len-step simple random walk from each root
// over the original graph.
GraphView path_mask(const Graph& g, double root_fraction, std::size_t walk_len,
                    Rng& rng);

// Selects each node independently with probability p and masks all edges
// incident to selected nodes. Features are untouched.
GraphView node_mask(const Graph& g, double p, Rng& rng);

// Selects each node independently with probability p and replaces its
// feature row with mask_token (1 x d). Edges are untouched.
GraphView feature_mask(const Graph& g, double p, const Tensor& mask_token,
                       Rng& rng);

// Dispatch on spec.kind. mask_token is consulted only for feature_mask;
// passing nullptr there substitutes a zero token.
GraphView apply_augment(const Graph& g, const AugmentSpec& spec,
                        const Tensor* mask_token, Rng& rng);

const char* augment_kind_name(AugmentKind kind);
std::optional<AugmentKind> augment_kind_from_name(const std::string& name);

}  // namespace lrgae
