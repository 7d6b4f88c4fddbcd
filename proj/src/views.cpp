#include "views.hpp"

#include <algorithm>
#include <cmath>

namespace lrgae {

int case_of(const ViewSpec& spec) {
  const bool views_equal = spec.left_graph == spec.right_graph;
  const bool fields_equal = spec.l == spec.r;
  const bool nodes_equal = spec.pair_mode == PairMode::same_node;
  if (nodes_equal) {
    if (views_equal) return fields_equal ? 1 : 3;
    return fields_equal ? 2 : 4;
  }
  if (views_equal) return fields_equal ? 5 : 6;
  return fields_equal ? 7 : 8;
}

namespace {

std::string spec_str(const ViewSpec& spec) {
  return std::string(graph_side_name(spec.left_graph)) +
         graph_side_name(spec.right_graph) + " l=" + std::to_string(spec.l) +
         " r=" + std::to_string(spec.r) + " " + pair_mode_name(spec.pair_mode);
}

}  // namespace

PairBatch supervision_pairs(const ViewSpec& spec, const Graph& base,
                            const GraphView& view_a, const GraphView& view_b,
                            Rng& rng, std::size_t neg_count,
                            const NegSamplerConfig& neg_cfg,
                            const Tensor* embeddings) {
  PairBatch batch;
  if (spec.pair_mode == PairMode::same_node) {
    // Feature masking active: contrast only the masked nodes.
    std::vector<std::size_t> nodes;
    nodes.reserve(view_a.masked_nodes.size() + view_b.masked_nodes.size());
    nodes.insert(nodes.end(), view_a.masked_nodes.begin(),
                 view_a.masked_nodes.end());
    if (&view_b != &view_a) {
      nodes.insert(nodes.end(), view_b.masked_nodes.begin(),
                   view_b.masked_nodes.end());
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    if (nodes.empty()) {
      nodes.resize(base.n());
      for (std::size_t i = 0; i < base.n(); ++i) nodes[i] = i;
    }
    if (nodes.empty()) {
      throw ContractError("supervision_pairs: empty positive set for " +
                          spec_str(spec));
    }
    batch.left_nodes = nodes;
    batch.right_nodes = std::move(nodes);
    return batch;
  }

  // edge_pair: masked edges of the left view (masked-reconstruction
  // semantics) or, with nothing masked, the training edge set.
  const GraphView& left_view =
      spec.left_graph == GraphSide::A ? view_a : view_b;
  std::span<const Edge> positives = left_view.masked_edges.empty()
                                        ? base.edges()
                                        : std::span<const Edge>(left_view.masked_edges);
  if (positives.empty()) {
    throw ContractError("supervision_pairs: empty positive set for " +
                        spec_str(spec));
  }
  batch.left_nodes.reserve(positives.size());
  batch.right_nodes.reserve(positives.size());
  for (const Edge& e : positives) {
    batch.left_nodes.push_back(e.u);
    batch.right_nodes.push_back(e.v);
  }
  if (neg_count > 0) {
    const auto negatives =
        negative_sample(base, neg_count, neg_cfg.strategy, rng, embeddings);
    batch.neg_left.reserve(negatives.size());
    batch.neg_right.reserve(negatives.size());
    for (const Edge& e : negatives) {
      batch.neg_left.push_back(e.u);
      batch.neg_right.push_back(e.v);
    }
  }
  return batch;
}

namespace {

const Tensor& stack_layer(const EmbeddingStack& stack, std::size_t layer,
                          const char* side) {
  if (layer >= stack.layers.size()) {
    throw IndexError(std::string("left_right: ") + side + " field " +
                     std::to_string(layer) + " exceeds encoder depth " +
                     std::to_string(stack.depth()));
  }
  return stack.layers[layer];
}

Tensor branch(Tape& tape, const Tensor& layer, const std::vector<std::size_t>& idx,
              bool detach, bool decode, const DecoderConfig& decoder,
              ParamStore& params) {
  Tensor rows = detach ? gather_rows(tape, layer.detached(), idx)
                       : gather_rows(tape, layer, idx);
  if (decode && decoder.kind == DecoderKind::mlp_feature) {
    return decode_feature(tape, rows, params);
  }
  return rows;
}

}  // namespace

BranchOutputs left_right(Tape& tape, const ViewSpec& spec,
                         const EmbeddingStack& stack_a,
                         const EmbeddingStack& stack_b, const PairBatch& batch,
                         const DecoderConfig& decoder, ParamStore& params,
                         bool decode_right) {
  const EmbeddingStack& ls =
      spec.left_graph == GraphSide::A ? stack_a : stack_b;
  const EmbeddingStack& rs =
      spec.right_graph == GraphSide::A ? stack_a : stack_b;
  const Tensor& left_layer = stack_layer(ls, spec.l, "left");
  const Tensor& right_layer = stack_layer(rs, spec.r, "right");

  BranchOutputs out;
  out.left = branch(tape, left_layer, batch.left_nodes, /*detach=*/false,
                    /*decode=*/true, decoder, params);
  out.right = branch(tape, right_layer, batch.right_nodes,
                     spec.stop_gradient_right, decode_right, decoder, params);
  if (batch.has_negatives()) {
    out.neg_left = branch(tape, left_layer, batch.neg_left, false, true,
                          decoder, params);
    out.neg_right = branch(tape, right_layer, batch.neg_right,
                           spec.stop_gradient_right, decode_right, decoder,
                           params);
  }
  return out;
}

Preset preset(const std::string& name, std::size_t k) {
  if (k < 1) throw ContractError("preset: encoder depth must be >= 1");
  const AugmentSpec none{};
  const AugmentSpec edge70{AugmentKind::edge_mask, 0.7};
  const AugmentSpec feat50{AugmentKind::feature_mask, 0.5};

  Preset p;
  if (name == "gae") {
    p = {none, none,
         {GraphSide::A, GraphSide::A, k, k, PairMode::edge_pair},
         LossKind::bce, DecoderKind::dot};
  } else if (name == "gae_f") {
    p = {none, none,
         {GraphSide::A, GraphSide::A, k, 0, PairMode::same_node},
         LossKind::mse, DecoderKind::mlp_feature};
  } else if (name == "maskgae") {
    p = {edge70, none,
         {GraphSide::A, GraphSide::A, k, k, PairMode::edge_pair},
         LossKind::bce, DecoderKind::dot};
  } else if (name == "graphmae") {
    p = {feat50, none,
         {GraphSide::A, GraphSide::B, k, 0, PairMode::same_node},
         LossKind::sce, DecoderKind::mlp_feature};
  } else if (name == "lrgae6") {
    p = {edge70, none,
         {GraphSide::A, GraphSide::A, k, k - 1, PairMode::edge_pair},
         LossKind::bce, DecoderKind::dot};
  } else if (name == "lrgae7") {
    p = {edge70, none,
         {GraphSide::A, GraphSide::B, k, k, PairMode::edge_pair},
         LossKind::bce, DecoderKind::dot};
  } else if (name == "lrgae8") {
    p = {edge70, feat50,
         {GraphSide::A, GraphSide::B, k, k - 1, PairMode::edge_pair},
         LossKind::bce, DecoderKind::dot};
  } else {
    throw ConfigError("unknown preset: " + name);
  }
  return p;
}

bool is_preset_name(const std::string& name) {
  static const char* names[] = {"gae",      "gae_f",  "maskgae", "graphmae",
                                "lrgae6",   "lrgae7", "lrgae8"};
  for (const char* n : names) {
    if (name == n) return true;
  }
  return false;
}

const char* graph_side_name(GraphSide s) {
  return s == GraphSide::A ? "A" : "B";
}

std::optional<GraphSide> graph_side_from_name(const std::string& name) {
  if (name == "A" || name == "a") return GraphSide::A;
  if (name == "B" || name == "b") return GraphSide::B;
  return std::nullopt;
}

const char* pair_mode_name(PairMode m) {
  return m == PairMode::same_node ? "same_node" : "edge_pair";
}

std::optional<PairMode> pair_mode_from_name(const std::string& name) {
  if (name == "same_node") return PairMode::same_node;
  if (name == "edge_pair") return PairMode::edge_pair;
  return std::nullopt;
}

}  // namespace lrgae
