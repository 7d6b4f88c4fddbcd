#include "augment.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace lrgae {

namespace {

void require_probability(double p, const char* op) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ContractError(std::string(op) + ": ratio " + std::to_string(p) +
                        " outside [0, 1]");
  }
}

// Assembles a view from a per-edge mask flag (true = masked).
GraphView from_edge_flags(const Graph& g, const std::vector<bool>& masked) {
  GraphView view;
  view.base = &g;
  const auto edges = g.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    (masked[i] ? view.masked_edges : view.visible_edges).push_back(edges[i]);
  }
  view.features = g.features();
  view.normalized_adj = gcn_normalize(g.n(), view.visible_edges);
  return view;
}

}  // namespace

GraphView no_augment(const Graph& g) {
  GraphView view;
  view.base = &g;
  view.visible_edges.assign(g.edges().begin(), g.edges().end());
  view.features = g.features();
  view.normalized_adj = gcn_normalize(g.n(), view.visible_edges);
  return view;
}

GraphView edge_mask(const Graph& g, double p, Rng& rng) {
  require_probability(p, "edge_mask");
  std::vector<bool> masked(g.num_edges());
  for (std::size_t i = 0; i < masked.size(); ++i) masked[i] = rng.bernoulli(p);
  return from_edge_flags(g, masked);
}

GraphView path_mask(const Graph& g, double root_fraction, std::size_t walk_len,
                    Rng& rng) {
  if (!(root_fraction > 0.0 && root_fraction <= 1.0)) {
    throw ContractError("path_mask: root_fraction outside (0, 1]");
  }
  if (walk_len < 1) throw ContractError("path_mask: walk_len must be >= 1");
  const std::size_t n = g.n();
  const auto n_roots =
      static_cast<std::size_t>(std::ceil(root_fraction * static_cast<double>(n)));

  // Roots without replacement (partial Fisher-Yates).
  std::vector<NodeId> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = static_cast<NodeId>(i);
  for (std::size_t i = 0; i < n_roots; ++i) {
    std::swap(nodes[i], nodes[i + rng.uniform_index(n - i)]);
  }

  const auto adj = adjacency_lists(n, g.edges());
  std::set<Edge> traversed;
  for (std::size_t i = 0; i < n_roots; ++i) {
    NodeId cur = nodes[i];
    for (std::size_t step = 0; step < walk_len; ++step) {
      const auto& nbrs = adj[cur];
      if (nbrs.empty()) break;
      const NodeId next = nbrs[rng.uniform_index(nbrs.size())];
      traversed.insert(ordered_edge(cur, next));
      cur = next;
    }
  }

  const auto edges = g.edges();
  std::vector<bool> masked(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    masked[i] = traversed.count(edges[i]) > 0;
  }
  return from_edge_flags(g, masked);
}

GraphView node_mask(const Graph& g, double p, Rng& rng) {
  require_probability(p, "node_mask");
  const std::size_t n = g.n();
  std::vector<bool> selected(n);
  for (std::size_t i = 0; i < n; ++i) selected[i] = rng.bernoulli(p);
  const auto edges = g.edges();
  std::vector<bool> masked(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    masked[i] = selected[edges[i].u] || selected[edges[i].v];
  }
  return from_edge_flags(g, masked);
}

GraphView feature_mask(const Graph& g, double p, const Tensor& mask_token,
                       Rng& rng) {
  require_probability(p, "feature_mask");
  if (mask_token.rows() != 1 || mask_token.cols() != g.feature_dim()) {
    throw DimensionError("feature_mask: token is " + mask_token.shape_str() +
                         ", features have dim " +
                         std::to_string(g.feature_dim()));
  }
  GraphView view;
  view.base = &g;
  view.visible_edges.assign(g.edges().begin(), g.edges().end());
  for (std::size_t i = 0; i < g.n(); ++i) {
    if (rng.bernoulli(p)) view.masked_nodes.push_back(i);
  }
  if (view.masked_nodes.empty()) {
    view.features = g.features();
  } else {
    view.features = g.features().detached();
    const auto token = mask_token.values();
    for (std::size_t r : view.masked_nodes) {
      for (std::size_t j = 0; j < token.size(); ++j) {
        view.features.at(r, j) = token[j];
      }
    }
  }
  view.normalized_adj = gcn_normalize(g.n(), view.visible_edges);
  return view;
}

GraphView apply_augment(const Graph& g, const AugmentSpec& spec,
                        const Tensor* mask_token, Rng& rng) {
  switch (spec.kind) {
    case AugmentKind::none:
      return no_augment(g);
    case AugmentKind::edge_mask:
      return edge_mask(g, spec.ratio, rng);
    case AugmentKind::path_mask:
      return path_mask(g, spec.ratio, spec.walk_len, rng);
    case AugmentKind::node_mask:
      return node_mask(g, spec.ratio, rng);
    case AugmentKind::feature_mask: {
      if (mask_token) return feature_mask(g, spec.ratio, *mask_token, rng);
      Tensor zero_token(1, g.feature_dim());
      return feature_mask(g, spec.ratio, zero_token, rng);
    }
  }
  throw ContractError("apply_augment: unknown kind");
}

const char* augment_kind_name(AugmentKind kind) {
  switch (kind) {
    case AugmentKind::none: return "none";
    case AugmentKind::edge_mask: return "edge_mask";
    case AugmentKind::path_mask: return "path_mask";
    case AugmentKind::node_mask: return "node_mask";
    case AugmentKind::feature_mask: return "feature_mask";
  }
  return "?";
}

std::optional<AugmentKind> augment_kind_from_name(const std::string& name) {
  if (name == "none") return AugmentKind::none;
  if (name == "edge_mask") return AugmentKind::edge_mask;
  if (name == "path_mask") return AugmentKind::path_mask;
  if (name == "node_mask") return AugmentKind::node_mask;
  if (name == "feature_mask") return AugmentKind::feature_mask;
  return std::nullopt;
}

}  // namespace lrgae
