#pragma once

#include <optional>
#include <string>
#include <vector>

#include "augment.hpp"
#include "graph.hpp"
#include "tensor.hpp"

namespace lrgae {

enum class EncoderArch { gcn, sage, gat };
enum class Activation { relu, none };
enum class DecoderKind { dot, mlp_edge, mlp_feature };

struct EncoderConfig {
  EncoderArch arch = EncoderArch::gcn;
  std::size_t num_layers = 2;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 256;
  Activation activation = Activation::relu;  // hidden layers; last is linear
  double dropout_keep = 1.0;                 // keep probability in (0, 1]
  std::size_t gat_heads = 1;

  void validate() const;
  // Representation width at layer index (0 = raw features).
  std::size_t layer_dim(std::size_t layer) const {
    return layer == 0 ? input_dim : hidden_dim;
  }
};

struct DecoderConfig {
  DecoderKind kind = DecoderKind::dot;
  std::vector<std::size_t> hidden_dims;  // MLP kinds; defaults applied on init
  std::size_t output_dim = 0;            // mlp_feature; 0 = resolve from target
};

// Per-layer node representations [H(0)=X, H(1), ..., H(k)].
struct EmbeddingStack {
  std::vector<Tensor> layers;
  std::size_t depth() const { return layers.size() - 1; }
};

// Ordered named parameter set for one training run. Iteration order is the
// registration order, which keeps optimizer updates deterministic.
class ParamStore {
 public:
  // Returns a handle onto the registered parameter (Tensor is shared, so
  // the handle stays valid across later registrations).
  Tensor add(const std::string& name, Tensor value);
  Tensor* find(const std::string& name);
  const Tensor* find(const std::string& name) const;
  Tensor& at(const std::string& name);

  auto begin() { return items_.begin(); }
  auto end() { return items_.end(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  std::size_t size() const { return items_.size(); }

  void zero_grad();

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
};

// ---- layers -----------------------------------------------------------------

// act(A_hat * H * W)
Tensor gcn_layer(Tape& tape, const SparseMatrix& a_hat, const Tensor& h,
                 const Tensor& w, Activation act);

// act(H * W_self + meanAgg(H) * W_neigh); meanAgg averages neighbor rows
// over the given mean-aggregation matrix (isolated nodes aggregate zero).
Tensor sage_layer(Tape& tape, const SparseMatrix& mean_adj, const Tensor& h,
                  const Tensor& w_self, const Tensor& w_neigh, Activation act);

// Directed neighbor index with self-loops, grouped by target node; the edge
// structure a GAT layer attends over.
struct NeighborIndex {
  std::vector<std::size_t> offsets;  // n+1 segment bounds into target/source
  std::vector<std::size_t> target;
  std::vector<std::size_t> source;

  static NeighborIndex build(std::size_t n, std::span<const Edge> edges);
};

// Single-head graph attention over neighbors-plus-self:
// e_uv = leakyrelu(a_src . Wh_u + a_dst . Wh_v), alpha = segment softmax,
// out_u = act(sum_v alpha_uv Wh_v). a_src/a_dst are h x 1 column vectors.
Tensor gat_layer(Tape& tape, const NeighborIndex& nbrs, const Tensor& h,
                 const Tensor& w, const Tensor& a_src, const Tensor& a_dst,
                 Activation act, double leaky_slope = 0.2);

// ---- encoder ----------------------------------------------------------------

// Registers all encoder parameters (Glorot weights, per arch) under
// "encoder.layer<i>...." names.
void init_encoder_params(const EncoderConfig& cfg, ParamStore& params, Rng& rng);

// Full forward pass returning every intermediate representation. H(0) is the
// view's feature matrix; when the view carries masked nodes and `mask_token`
// is provided, H(0) is assembled on-tape from the base features and the
// token so the token can train. Dropout is applied between layers in
// training mode only.
EmbeddingStack encode(Tape& tape, const GraphView& view, const EncoderConfig& cfg,
                      ParamStore& params, bool training, Rng& dropout_rng,
                      const Tensor* mask_token = nullptr);

// ---- decoders -----------------------------------------------------------------

void init_decoder_params(const DecoderConfig& cfg, std::size_t input_dim,
                         std::size_t default_hidden, ParamStore& params,
                         Rng& rng);

// Raw (pre-sigmoid) pairwise scores, m x 1. `dot` is the rowwise inner
// product; `mlp_edge` runs an MLP over [z_left || z_right].
Tensor decode_edge(Tape& tape, DecoderKind kind, const Tensor& z_left,
                   const Tensor& z_right, ParamStore& params);

// Rowwise MLP, m x output_dim.
Tensor decode_feature(Tape& tape, const Tensor& z, ParamStore& params);

const char* encoder_arch_name(EncoderArch a);
std::optional<EncoderArch> encoder_arch_from_name(const std::string& name);
const char* decoder_kind_name(DecoderKind k);
std::optional<DecoderKind> decoder_kind_from_name(const std::string& name);

}  // namespace lrgae
