#pragma once

#include <optional>
#include <string>

#include "augment.hpp"
#include "losses.hpp"
#include "nn.hpp"

namespace lrgae {

enum class GraphSide { A, B };
enum class PairMode { same_node, edge_pair };

// Selects one left-right contrast configuration: which augmented view each
// branch reads, the receptive field (layer index) per branch, and how node
// pairs are formed.
struct ViewSpec {
  GraphSide left_graph = GraphSide::A;
  GraphSide right_graph = GraphSide::A;
  std::size_t l = 0;
  std::size_t r = 0;
  PairMode pair_mode = PairMode::edge_pair;
  bool stop_gradient_right = false;
  // Whether the right branch also passes through the decoder. Unset means
  // loss-dependent: false for bce/mse/sce, true for infonce/simcse.
  std::optional<bool> decode_right;

  bool references(GraphSide side) const {
    return left_graph == side || right_graph == side;
  }
};

// Case id 1..8 from the (views equal, fields equal, nodes equal) triple.
int case_of(const ViewSpec& spec);

// Positive node pairs plus optional sampled negatives for one loss
// evaluation. In same_node mode left and right indices coincide.
struct PairBatch {
  std::vector<std::size_t> left_nodes;
  std::vector<std::size_t> right_nodes;
  std::vector<std::size_t> neg_left;
  std::vector<std::size_t> neg_right;

  bool has_negatives() const { return !neg_left.empty(); }
};

// Assembles the supervision pairs for one step.
//  - same_node: masked nodes of either view when feature masking selected
//    any, otherwise all nodes; no negatives.
//  - edge_pair: the left view's masked edges when any were masked,
//    otherwise the training edge set (the base graph's edges); negatives
//    are drawn with the configured sampler when neg_count > 0.
PairBatch supervision_pairs(const ViewSpec& spec, const Graph& base,
                            const GraphView& view_a, const GraphView& view_b,
                            Rng& rng, std::size_t neg_count,
                            const NegSamplerConfig& neg_cfg,
                            const Tensor* embeddings = nullptr);

// Branch representations gathered at the batch indices. The decoder applies
// to the left branch (and to the right when decode_right), but only for the
// mlp_feature kind; edge decoders (dot / mlp_edge) score pairs downstream.
struct BranchOutputs {
  Tensor left;
  Tensor right;
  Tensor neg_left;   // empty when the batch carries no negatives
  Tensor neg_right;
};

BranchOutputs left_right(Tape& tape, const ViewSpec& spec,
                         const EmbeddingStack& stack_a,
                         const EmbeddingStack& stack_b, const PairBatch& batch,
                         const DecoderConfig& decoder, ParamStore& params,
                         bool decode_right);

// A named model family: augmentations for both views, the view spec, and
// the loss/decoder pairing.
struct Preset {
  AugmentSpec aug_a;
  AugmentSpec aug_b;
  ViewSpec view;
  LossKind loss = LossKind::bce;
  DecoderKind decoder = DecoderKind::dot;
};

// Known names: gae, gae_f, maskgae, graphmae, lrgae6, lrgae7, lrgae8.
// k is the encoder depth the receptive fields resolve against.
Preset preset(const std::string& name, std::size_t k);

bool is_preset_name(const std::string& name);

const char* graph_side_name(GraphSide s);
std::optional<GraphSide> graph_side_from_name(const std::string& name);
const char* pair_mode_name(PairMode m);
std::optional<PairMode> pair_mode_from_name(const std::string& name);

}  // namespace lrgae
