#pragma once

#include <functional>
#include <map>
#include <optional>

#include "views.hpp"

namespace lrgae {

struct TrainConfig {
  std::size_t epochs = 500;
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  std::size_t eval_every = 0;  // 0 disables periodic evaluation
  std::optional<double> grad_clip;

  void validate() const;
};

// Adam moments, one slot per parameter in registration order.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t t = 0;
};

// One AdamW-style update: decoupled weight decay applied before the moment
// update, then bias-corrected Adam. Gradients are read from the parameters'
// grad buffers; a NaN gradient aborts naming the parameter.
void adam_step(ParamStore& params, AdamState& state, const TrainConfig& cfg);

struct RunRecord {
  std::vector<double> epoch_loss;
  std::vector<std::pair<std::size_t, std::map<std::string, double>>> evals;
  double wall_clock_s = 0.0;
  std::uint64_t seed = 0;
};

// Test/diagnostic observer invoked once per epoch after the loss is
// computed and before the optimizer step (parameters still hold their
// pre-step values).
struct EpochInfo {
  std::size_t epoch;
  double loss;
  const PairBatch& batch;
  const ParamStore& params;
  const GraphView& view_a;
  const GraphView* view_b;  // null when the spec only references view A
};

struct TrainHooks {
  std::function<void(const EpochInfo&)> observer;
  // Called every eval_every epochs (and after the last); the result is
  // recorded in RunRecord.evals.
  std::function<std::map<std::string, double>(const ParamStore&)> evaluate;
};

// Validates the (loss, pair_mode, decoder) combination and rejects the
// degenerate identical-views case. Throws ConfigError before any compute.
void validate_model(const ViewSpec& view, const EncoderConfig& enc,
                    const DecoderConfig& dec, const LossConfig& loss);

// Resolves decoder defaults against the view spec: MLP input width from the
// left field, mlp_feature output width from the right field's target dim.
DecoderConfig resolve_decoder(const DecoderConfig& dec, const ViewSpec& view,
                              const EncoderConfig& enc);

// Full pretraining loop: per epoch, re-augment, encode both referenced
// views, assemble pairs, evaluate the loss, and step. Deterministic per
// seed.
std::pair<ParamStore, RunRecord> train(
    const Graph& g, const AugmentSpec& aug_a, const AugmentSpec& aug_b,
    const ViewSpec& view, const EncoderConfig& enc, const DecoderConfig& dec,
    const LossConfig& loss, const NegSamplerConfig& neg, const TrainConfig& cfg,
    const TrainHooks* hooks = nullptr);

enum class EmbedMode { last, concat };

// Evaluation-mode encoding of the unaugmented graph. `last` returns H(k),
// `concat` the column concatenation of H(1)..H(k).
Tensor embed(const Graph& g, const EncoderConfig& enc, ParamStore& params,
             EmbedMode mode);

}  // namespace lrgae
