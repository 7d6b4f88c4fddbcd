#include "nn.hpp"

#include <algorithm>

namespace lrgae {

void EncoderConfig::validate() const {
  if (num_layers < 1) throw ConfigError("encoder.num_layers must be >= 1");
  // input_dim == 0 means "resolved from the dataset at run time".
  if (hidden_dim < 1) {
    throw ConfigError("encoder.hidden_dim must be >= 1");
  }
  if (!(dropout_keep > 0.0 && dropout_keep <= 1.0)) {
    throw ConfigError("encoder.dropout_keep must be in (0, 1]");
  }
  if (arch == EncoderArch::gat) {
    if (gat_heads < 1) throw ConfigError("encoder.gat_heads must be >= 1");
    if (hidden_dim % gat_heads != 0) {
      throw ConfigError("encoder.hidden_dim must be divisible by gat_heads");
    }
  }
}

// ---- ParamStore ---------------------------------------------------------------

Tensor ParamStore::add(const std::string& name, Tensor value) {
  if (find(name)) throw ContractError("parameter already registered: " + name);
  value.set_requires_grad(true);
  items_.emplace_back(name, value);
  return value;
}

Tensor* ParamStore::find(const std::string& name) {
  for (auto& [n, t] : items_) {
    if (n == name) return &t;
  }
  return nullptr;
}

const Tensor* ParamStore::find(const std::string& name) const {
  for (const auto& [n, t] : items_) {
    if (n == name) return &t;
  }
  return nullptr;
}

Tensor& ParamStore::at(const std::string& name) {
  Tensor* t = find(name);
  if (!t) throw ContractError("unknown parameter: " + name);
  return *t;
}

void ParamStore::zero_grad() {
  for (auto& [n, t] : items_) t.zero_grad();
}

// ---- layers ---------------------------------------------------------------------

namespace {

Tensor apply_activation(Tape& tape, const Tensor& x, Activation act) {
  return act == Activation::relu ? relu(tape, x) : x;
}

}  // namespace

Tensor gcn_layer(Tape& tape, const SparseMatrix& a_hat, const Tensor& h,
                 const Tensor& w, Activation act) {
  return apply_activation(tape, spmm(tape, a_hat, matmul(tape, h, w)), act);
}

Tensor sage_layer(Tape& tape, const SparseMatrix& mean_adj, const Tensor& h,
                  const Tensor& w_self, const Tensor& w_neigh, Activation act) {
  Tensor own = matmul(tape, h, w_self);
  Tensor agg = matmul(tape, spmm(tape, mean_adj, h), w_neigh);
  return apply_activation(tape, add(tape, own, agg), act);
}

NeighborIndex NeighborIndex::build(std::size_t n, std::span<const Edge> edges) {
  const auto adj = adjacency_lists(n, edges);
  NeighborIndex idx;
  idx.offsets.assign(n + 1, 0);
  for (std::size_t u = 0; u < n; ++u) {
    idx.offsets[u + 1] = idx.offsets[u] + adj[u].size() + 1;  // +1 self
  }
  idx.target.reserve(idx.offsets[n]);
  idx.source.reserve(idx.offsets[n]);
  for (std::size_t u = 0; u < n; ++u) {
    bool self_placed = false;
    for (NodeId v : adj[u]) {
      if (!self_placed && v > u) {
        idx.target.push_back(u);
        idx.source.push_back(u);
        self_placed = true;
      }
      idx.target.push_back(u);
      idx.source.push_back(v);
    }
    if (!self_placed) {
      idx.target.push_back(u);
      idx.source.push_back(u);
    }
  }
  return idx;
}

Tensor gat_layer(Tape& tape, const NeighborIndex& nbrs, const Tensor& h,
                 const Tensor& w, const Tensor& a_src, const Tensor& a_dst,
                 Activation act, double leaky_slope) {
  const std::size_t n = nbrs.offsets.size() - 1;
  Tensor hw = matmul(tape, h, w);
  Tensor s_src = matmul(tape, hw, a_src);  // n x 1
  Tensor s_dst = matmul(tape, hw, a_dst);
  Tensor e_center = gather_rows(tape, s_src, nbrs.target);
  Tensor e_nbr = gather_rows(tape, s_dst, nbrs.source);
  Tensor e = leaky_relu(tape, add(tape, e_center, e_nbr), leaky_slope);
  Tensor alpha = segment_softmax(tape, e, nbrs.offsets);
  Tensor out = edge_weighted_sum(tape, alpha, hw, nbrs.target, nbrs.source, n);
  return apply_activation(tape, out, act);
}

// ---- encoder ----------------------------------------------------------------------

namespace {

std::string layer_prefix(std::size_t i) {
  return "encoder.layer" + std::to_string(i);
}

}  // namespace

void init_encoder_params(const EncoderConfig& cfg, ParamStore& params, Rng& rng) {
  cfg.validate();
  if (cfg.input_dim < 1) {
    throw ConfigError("encoder.input_dim unresolved");
  }
  for (std::size_t i = 0; i < cfg.num_layers; ++i) {
    const std::size_t in_dim = cfg.layer_dim(i);
    const std::size_t out_dim = cfg.hidden_dim;
    const std::string prefix = layer_prefix(i);
    switch (cfg.arch) {
      case EncoderArch::gcn:
        params.add(prefix + ".weight", Tensor::glorot(in_dim, out_dim, rng));
        break;
      case EncoderArch::sage:
        params.add(prefix + ".weight_self", Tensor::glorot(in_dim, out_dim, rng));
        params.add(prefix + ".weight_neigh", Tensor::glorot(in_dim, out_dim, rng));
        break;
      case EncoderArch::gat: {
        const std::size_t head_dim = out_dim / cfg.gat_heads;
        for (std::size_t hd = 0; hd < cfg.gat_heads; ++hd) {
          const std::string hp = prefix + ".head" + std::to_string(hd);
          params.add(hp + ".weight", Tensor::glorot(in_dim, head_dim, rng));
          params.add(hp + ".attn_src", Tensor::glorot(head_dim, 1, rng));
          params.add(hp + ".attn_dst", Tensor::glorot(head_dim, 1, rng));
        }
        break;
      }
    }
  }
}

EmbeddingStack encode(Tape& tape, const GraphView& view, const EncoderConfig& cfg,
                      ParamStore& params, bool training, Rng& dropout_rng,
                      const Tensor* mask_token) {
  cfg.validate();
  const std::size_t n = view.base->n();

  EmbeddingStack stack;
  stack.layers.reserve(cfg.num_layers + 1);
  if (!view.masked_nodes.empty() && mask_token) {
    stack.layers.push_back(scatter_row_value(tape, view.base->features(),
                                             *mask_token, view.masked_nodes));
  } else {
    stack.layers.push_back(view.features);
  }

  // Arch-specific aggregation structure over the visible edges.
  SparseMatrix mean_adj;
  NeighborIndex nbrs;
  if (cfg.arch == EncoderArch::sage) {
    mean_adj = mean_neighbor_matrix(n, view.visible_edges);
  } else if (cfg.arch == EncoderArch::gat) {
    nbrs = NeighborIndex::build(n, view.visible_edges);
  }

  for (std::size_t i = 0; i < cfg.num_layers; ++i) {
    Tensor in = stack.layers.back();
    if (i > 0) {
      in = dropout(tape, in, cfg.dropout_keep, dropout_rng, training);
    }
    const Activation act =
        i + 1 < cfg.num_layers ? cfg.activation : Activation::none;
    const std::string prefix = layer_prefix(i);
    switch (cfg.arch) {
      case EncoderArch::gcn:
        stack.layers.push_back(gcn_layer(tape, view.normalized_adj, in,
                                         params.at(prefix + ".weight"), act));
        break;
      case EncoderArch::sage:
        stack.layers.push_back(sage_layer(tape, mean_adj, in,
                                          params.at(prefix + ".weight_self"),
                                          params.at(prefix + ".weight_neigh"),
                                          act));
        break;
      case EncoderArch::gat: {
        Tensor out;
        for (std::size_t hd = 0; hd < cfg.gat_heads; ++hd) {
          const std::string hp = prefix + ".head" + std::to_string(hd);
          Tensor head = gat_layer(tape, nbrs, in, params.at(hp + ".weight"),
                                  params.at(hp + ".attn_src"),
                                  params.at(hp + ".attn_dst"), act);
          out = hd == 0 ? head : concat_cols(tape, out, head);
        }
        stack.layers.push_back(out);
        break;
      }
    }
  }
  return stack;
}

// ---- decoders ------------------------------------------------------------------------

void init_decoder_params(const DecoderConfig& cfg, std::size_t input_dim,
                         std::size_t default_hidden, ParamStore& params,
                         Rng& rng) {
  if (cfg.kind == DecoderKind::dot) return;
  std::vector<std::size_t> hidden =
      cfg.hidden_dims.empty() ? std::vector<std::size_t>{default_hidden}
                              : cfg.hidden_dims;
  const std::size_t out_dim = cfg.kind == DecoderKind::mlp_edge ? 1 : cfg.output_dim;
  if (out_dim == 0) {
    throw ConfigError("decoder.output_dim unresolved for mlp_feature");
  }
  std::size_t in_dim = cfg.kind == DecoderKind::mlp_edge ? 2 * input_dim : input_dim;
  std::vector<std::size_t> dims = hidden;
  dims.push_back(out_dim);
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const std::string prefix = "decoder.layer" + std::to_string(i);
    params.add(prefix + ".weight", Tensor::glorot(in_dim, dims[i], rng));
    params.add(prefix + ".bias", Tensor(1, dims[i]));
    in_dim = dims[i];
  }
}

namespace {

Tensor mlp_forward(Tape& tape, const Tensor& x, ParamStore& params) {
  Tensor h = x;
  for (std::size_t i = 0;; ++i) {
    const std::string prefix = "decoder.layer" + std::to_string(i);
    Tensor* w = params.find(prefix + ".weight");
    if (!w) {
      if (i == 0) throw ContractError("decoder parameters not initialized");
      return h;
    }
    if (i > 0) h = relu(tape, h);
    h = add_rowvec(tape, matmul(tape, h, *w), params.at(prefix + ".bias"));
  }
}

}  // namespace

Tensor decode_edge(Tape& tape, DecoderKind kind, const Tensor& z_left,
                   const Tensor& z_right, ParamStore& params) {
  switch (kind) {
    case DecoderKind::dot:
      return sum_rows(tape, mul(tape, z_left, z_right));
    case DecoderKind::mlp_edge:
      return mlp_forward(tape, concat_cols(tape, z_left, z_right), params);
    case DecoderKind::mlp_feature:
      break;
  }
  throw ContractError("decode_edge: decoder kind is not an edge decoder");
}

Tensor decode_feature(Tape& tape, const Tensor& z, ParamStore& params) {
  return mlp_forward(tape, z, params);
}

const char* encoder_arch_name(EncoderArch a) {
  switch (a) {
    case EncoderArch::gcn: return "gcn";
    case EncoderArch::sage: return "sage";
    case EncoderArch::gat: return "gat";
  }
  return "?";
}

std::optional<EncoderArch> encoder_arch_from_name(const std::string& name) {
  if (name == "gcn") return EncoderArch::gcn;
  if (name == "sage") return EncoderArch::sage;
  if (name == "gat") return EncoderArch::gat;
  return std::nullopt;
}

const char* decoder_kind_name(DecoderKind k) {
  switch (k) {
    case DecoderKind::dot: return "dot";
    case DecoderKind::mlp_edge: return "mlp_edge";
    case DecoderKind::mlp_feature: return "mlp_feature";
  }
  return "?";
}

std::optional<DecoderKind> decoder_kind_from_name(const std::string& name) {
  if (name == "dot") return DecoderKind::dot;
  if (name == "mlp_edge") return DecoderKind::mlp_edge;
  if (name == "mlp_feature") return DecoderKind::mlp_feature;
  return std::nullopt;
}

}  // namespace lrgae
