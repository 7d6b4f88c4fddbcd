#include "train.hpp"

#include <chrono>
#include <cmath>

namespace lrgae {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  // lr = 0 is tolerated here (freezes parameters); the config file path
  // rejects it since a frozen pretraining run is never intended.
  if (learning_rate < 0.0) {
    throw ConfigError("train.learning_rate must be >= 0");
  }
  if (weight_decay < 0.0) throw ConfigError("train.weight_decay must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("train.beta1/beta2 must be in [0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError("train.eps must be > 0");
  if (grad_clip && !(*grad_clip > 0.0)) {
    throw ConfigError("train.grad_clip must be > 0 when set");
  }
}

void adam_step(ParamStore& params, AdamState& state, const TrainConfig& cfg) {
  if (state.m.empty()) {
    for (const auto& [name, p] : params) {
      state.m.emplace_back(p.size(), 0.0);
      state.v.emplace_back(p.size(), 0.0);
    }
  }
  for (const auto& [name, p] : params) {
    for (double gv : p.grad()) {
      if (std::isnan(gv)) {
        throw Error("adam_step: NaN gradient in parameter '" + name + "'");
      }
    }
  }
  if (cfg.grad_clip) {
    double sq = 0.0;
    for (const auto& [name, p] : params) {
      for (double gv : p.grad()) sq += gv * gv;
    }
    const double norm = std::sqrt(sq);
    if (norm > *cfg.grad_clip) {
      const double factor = *cfg.grad_clip / norm;
      for (auto& [name, p] : params) {
        for (double& gv : p.grad_mut()) gv *= factor;
      }
    }
  }

  ++state.t;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  std::size_t slot = 0;
  for (auto& [name, p] : params) {
    auto values = p.values_mut();
    const auto grads = p.grad();
    auto& m = state.m[slot];
    auto& v = state.v[slot];
    ++slot;
    for (std::size_t i = 0; i < values.size(); ++i) {
      // Decoupled weight decay precedes the moment update.
      values[i] -= cfg.learning_rate * cfg.weight_decay * values[i];
      const double g = grads[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      values[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

void validate_model(const ViewSpec& view, const EncoderConfig& enc,
                    const DecoderConfig& dec, const LossConfig& loss) {
  enc.validate();
  loss.validate();
  if (view.l > enc.num_layers || view.r > enc.num_layers) {
    throw ConfigError("view: receptive field exceeds encoder depth " +
                      std::to_string(enc.num_layers));
  }
  switch (loss.kind) {
    case LossKind::bce:
      if (view.pair_mode != PairMode::edge_pair) {
        throw ConfigError("loss.kind: bce requires pair_mode edge_pair");
      }
      if (dec.kind == DecoderKind::mlp_feature) {
        throw ConfigError("decoder.kind: mlp_feature cannot score edges");
      }
      break;
    case LossKind::mse:
    case LossKind::sce:
      if (view.pair_mode != PairMode::same_node) {
        throw ConfigError(std::string("loss.kind: ") + loss_kind_name(loss.kind) +
                          " requires pair_mode same_node");
      }
      if (dec.kind == DecoderKind::mlp_edge) {
        throw ConfigError("decoder.kind: mlp_edge is incompatible with " +
                          std::string(loss_kind_name(loss.kind)));
      }
      break;
    case LossKind::infonce:
    case LossKind::simcse:
      if (dec.kind == DecoderKind::mlp_edge) {
        throw ConfigError("decoder.kind: mlp_edge is incompatible with " +
                          std::string(loss_kind_name(loss.kind)));
      }
      break;
  }
  // With the identity (dot) decoder both branches are compared or scored
  // directly, so their widths must agree. Widths of 0 are unresolved raw
  // feature dims (checked again once the dataset is known).
  const std::size_t dim_l = enc.layer_dim(view.l);
  const std::size_t dim_r = enc.layer_dim(view.r);
  if (dec.kind == DecoderKind::dot && dim_l != 0 && dim_r != 0 &&
      dim_l != dim_r) {
    throw ConfigError("view: branch widths differ (" + std::to_string(dim_l) +
                      " vs " + std::to_string(dim_r) +
                      "); use an mlp decoder");
  }
}

DecoderConfig resolve_decoder(const DecoderConfig& dec, const ViewSpec& view,
                              const EncoderConfig& enc) {
  DecoderConfig out = dec;
  if (out.kind == DecoderKind::mlp_feature && out.output_dim == 0) {
    out.output_dim = enc.layer_dim(view.r);
  }
  return out;
}

namespace {

bool loss_uses_edge_negatives(LossKind kind) { return kind == LossKind::bce; }

Tensor compute_loss(Tape& tape, const LossConfig& loss, DecoderKind dec_kind,
                    const BranchOutputs& outs, ParamStore& params) {
  switch (loss.kind) {
    case LossKind::bce: {
      Tensor pos = decode_edge(tape, dec_kind, outs.left, outs.right, params);
      Tensor neg =
          decode_edge(tape, dec_kind, outs.neg_left, outs.neg_right, params);
      return bce_edge_loss(tape, pos, neg);
    }
    case LossKind::mse:
      return mse_feature_loss(tape, outs.left, outs.right);
    case LossKind::sce:
      return sce_loss(tape, outs.left, outs.right, loss.sce_gamma);
    case LossKind::infonce:
      return info_nce(tape, outs.left, outs.right, loss.temperature);
    case LossKind::simcse:
      return simcse(tape, outs.left, outs.right, loss.temperature);
  }
  throw ContractError("unknown loss kind");
}

}  // namespace

std::pair<ParamStore, RunRecord> train(
    const Graph& g, const AugmentSpec& aug_a, const AugmentSpec& aug_b,
    const ViewSpec& view, const EncoderConfig& enc_in, const DecoderConfig& dec_in,
    const LossConfig& loss, const NegSamplerConfig& neg, const TrainConfig& cfg,
    const TrainHooks* hooks) {
  const auto t_start = std::chrono::steady_clock::now();
  cfg.validate();
  neg.validate();

  EncoderConfig enc = enc_in;
  enc.input_dim = g.feature_dim();
  if (case_of(view) == 1) {
    throw ConfigError(
        "view: identical views, fields and nodes (case 1) is not applicable; "
        "the loss is identically zero");
  }
  validate_model(view, enc, dec_in, loss);
  const DecoderConfig dec = resolve_decoder(dec_in, view, enc);

  // The decoder is shared between branches; it can only consume the right
  // branch when that branch has the decoder's input width. Otherwise the
  // right branch stays a raw target (the asymmetric-reconstruction shape).
  const bool widths_match = enc.layer_dim(view.l) == enc.layer_dim(view.r);
  bool decode_right = view.decode_right.value_or(
      (loss.kind == LossKind::infonce || loss.kind == LossKind::simcse) &&
      (dec.kind != DecoderKind::mlp_feature || widths_match));
  if (decode_right && dec.kind == DecoderKind::mlp_feature && !widths_match) {
    throw ConfigError(
        "view.decode_right: branch widths differ, the shared decoder cannot "
        "apply to the right branch");
  }

  Rng root = Rng::seeded(cfg.seed);
  Rng init_rng = root.fork(stream::kParamInit);
  Rng rng_a = root.fork(stream::kAugmentA);
  Rng rng_b = root.fork(stream::kAugmentB);
  Rng rng_neg = root.fork(stream::kNegatives);
  Rng rng_drop = root.fork(stream::kDropout);

  ParamStore params;
  init_encoder_params(enc, params, init_rng);
  const std::size_t dec_input = enc.layer_dim(view.l);
  init_decoder_params(dec, dec_input, enc.hidden_dim, params, init_rng);
  const bool feature_masking = aug_a.kind == AugmentKind::feature_mask ||
                               aug_b.kind == AugmentKind::feature_mask;
  if (feature_masking) {
    // Trainable [MASK] token, zero-initialized.
    params.add("mask_token", Tensor(1, g.feature_dim()));
  }

  AdamState opt;
  RunRecord record;
  record.seed = cfg.seed;
  record.epoch_loss.reserve(cfg.epochs);

  const bool needs_b = view.references(GraphSide::B);
  const std::size_t multiplier =
      static_cast<std::size_t>(std::ceil(neg.multiplier));

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Tensor* token = params.find("mask_token");
    GraphView view_a = apply_augment(g, aug_a, token, rng_a);
    GraphView view_b;
    if (needs_b) view_b = apply_augment(g, aug_b, token, rng_b);
    const GraphView& vb = needs_b ? view_b : view_a;

    Tape tape;
    EmbeddingStack stack_a = encode(tape, view_a, enc, params, /*training=*/true,
                                    rng_drop, token);
    EmbeddingStack stack_b;
    if (needs_b) {
      stack_b = encode(tape, view_b, enc, params, true, rng_drop, token);
    }
    const EmbeddingStack& sb = needs_b ? stack_b : stack_a;

    // Negatives only matter for edge-classification losses; contrastive
    // in-batch losses provide their own.
    std::size_t neg_count = 0;
    if (view.pair_mode == PairMode::edge_pair &&
        loss_uses_edge_negatives(loss.kind)) {
      const GraphView& left_view =
          view.left_graph == GraphSide::A ? view_a : vb;
      const std::size_t n_pos = left_view.masked_edges.empty()
                                    ? g.num_edges()
                                    : left_view.masked_edges.size();
      neg_count = n_pos * multiplier;
    }
    const Tensor& latest = stack_a.layers.back();
    PairBatch batch = supervision_pairs(view, g, view_a, vb, rng_neg, neg_count,
                                        neg, &latest);

    BranchOutputs outs = left_right(tape, view, stack_a, sb, batch, dec,
                                    params, decode_right);
    Tensor loss_value = compute_loss(tape, loss, dec.kind, outs, params);
    const double lv = loss_value.item();
    if (std::isnan(lv) || std::isinf(lv)) {
      throw Error("train: non-finite loss at epoch " + std::to_string(epoch));
    }
    record.epoch_loss.push_back(lv);

    if (hooks && hooks->observer) {
      hooks->observer(EpochInfo{epoch, lv, batch, params, view_a,
                                needs_b ? &view_b : nullptr});
    }

    params.zero_grad();
    tape.backward(loss_value);
    adam_step(params, opt, cfg);

    if (cfg.eval_every > 0 && hooks && hooks->evaluate &&
        ((epoch + 1) % cfg.eval_every == 0 || epoch + 1 == cfg.epochs)) {
      record.evals.emplace_back(epoch + 1, hooks->evaluate(params));
    }
  }

  record.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return {std::move(params), std::move(record)};
}

Tensor embed(const Graph& g, const EncoderConfig& enc_in, ParamStore& params,
             EmbedMode mode) {
  EncoderConfig enc = enc_in;
  enc.input_dim = g.feature_dim();
  Tape tape;
  Rng unused = Rng::seeded(0);
  GraphView view = no_augment(g);
  EmbeddingStack stack =
      encode(tape, view, enc, params, /*training=*/false, unused, nullptr);
  if (mode == EmbedMode::last) return stack.layers.back().detached();
  Tensor out = stack.layers[1];
  for (std::size_t i = 2; i < stack.layers.size(); ++i) {
    out = concat_cols(tape, out, stack.layers[i]);
  }
  return out.detached();
}

}  // namespace lrgae
