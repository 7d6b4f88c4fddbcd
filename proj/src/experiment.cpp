#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "eval.hpp"

namespace fs = std::filesystem;

namespace lrgae {

// ---- config parsing helpers ---------------------------------------------------

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) {
    throw ConfigError(path + ": expected an object");
  }
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(path + "." + key + ": unknown key");
    }
  }
}

const json* find_key(const json& j, const std::string& key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

std::string get_string(const json& j, const std::string& path,
                       const std::string& key) {
  const json* v = find_key(j, key);
  if (!v) throw ConfigError(path + "." + key + ": missing required field");
  if (!v->is_string()) throw ConfigError(path + "." + key + ": expected string");
  return v->get<std::string>();
}

double get_number(const json& j, const std::string& path, const std::string& key,
                  std::optional<double> fallback = std::nullopt) {
  const json* v = find_key(j, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError(path + "." + key + ": missing required field");
  }
  if (!v->is_number()) throw ConfigError(path + "." + key + ": expected number");
  return v->get<double>();
}

std::size_t get_index(const json& j, const std::string& path,
                      const std::string& key,
                      std::optional<std::size_t> fallback = std::nullopt) {
  const json* v = find_key(j, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError(path + "." + key + ": missing required field");
  }
  if (!v->is_number_integer() || v->get<long long>() < 0) {
    throw ConfigError(path + "." + key + ": expected nonnegative integer");
  }
  return v->get<std::size_t>();
}

bool get_bool(const json& j, const std::string& path, const std::string& key,
              bool fallback) {
  const json* v = find_key(j, key);
  if (!v) return fallback;
  if (!v->is_boolean()) throw ConfigError(path + "." + key + ": expected bool");
  return v->get<bool>();
}

AugmentSpec parse_augment(const json& j, const std::string& path) {
  check_keys(j, path, {"kind", "ratio", "walk_len"});
  AugmentSpec spec;
  const std::string kind = get_string(j, path, "kind");
  const auto parsed = augment_kind_from_name(kind);
  if (!parsed) throw ConfigError(path + ".kind: unknown kind '" + kind + "'");
  spec.kind = *parsed;
  const double default_ratio =
      spec.kind == AugmentKind::feature_mask ? 0.5 : 0.7;
  spec.ratio = spec.kind == AugmentKind::none
                   ? 0.0
                   : get_number(j, path, "ratio", default_ratio);
  if (spec.ratio < 0.0 || spec.ratio > 1.0) {
    throw ConfigError(path + ".ratio: must be in [0, 1]");
  }
  spec.walk_len = get_index(j, path, "walk_len", std::size_t{3});
  if (spec.kind == AugmentKind::path_mask && spec.walk_len < 1) {
    throw ConfigError(path + ".walk_len: must be >= 1");
  }
  return spec;
}

ViewSpec parse_view(const json& j, const std::string& path) {
  check_keys(j, path,
             {"left_graph", "right_graph", "l", "r", "pair_mode",
              "stop_gradient_right", "decode_right"});
  ViewSpec view;
  const auto left = graph_side_from_name(get_string(j, path, "left_graph"));
  const auto right = graph_side_from_name(get_string(j, path, "right_graph"));
  if (!left) throw ConfigError(path + ".left_graph: expected \"A\" or \"B\"");
  if (!right) throw ConfigError(path + ".right_graph: expected \"A\" or \"B\"");
  view.left_graph = *left;
  view.right_graph = *right;
  view.l = get_index(j, path, "l");
  view.r = get_index(j, path, "r");
  const auto mode = pair_mode_from_name(get_string(j, path, "pair_mode"));
  if (!mode) {
    throw ConfigError(path + ".pair_mode: expected same_node or edge_pair");
  }
  view.pair_mode = *mode;
  view.stop_gradient_right = get_bool(j, path, "stop_gradient_right", false);
  if (find_key(j, "decode_right")) {
    view.decode_right = get_bool(j, path, "decode_right", false);
  }
  return view;
}

DecoderConfig parse_decoder(const json& j, const std::string& path) {
  check_keys(j, path, {"kind", "hidden_dims", "output_dim"});
  DecoderConfig dec;
  const auto kind = decoder_kind_from_name(get_string(j, path, "kind"));
  if (!kind) throw ConfigError(path + ".kind: unknown decoder kind");
  dec.kind = *kind;
  if (const json* dims = find_key(j, "hidden_dims")) {
    if (!dims->is_array()) {
      throw ConfigError(path + ".hidden_dims: expected array");
    }
    for (const auto& d : *dims) {
      if (!d.is_number_integer() || d.get<long long>() < 1) {
        throw ConfigError(path + ".hidden_dims: entries must be positive");
      }
      dec.hidden_dims.push_back(d.get<std::size_t>());
    }
  }
  dec.output_dim = get_index(j, path, "output_dim", std::size_t{0});
  return dec;
}

LossConfig parse_loss(const json& j, const std::string& path,
                      const LossConfig& base) {
  check_keys(j, path, {"kind", "temperature", "sce_gamma"});
  LossConfig loss = base;
  if (find_key(j, "kind")) {
    const auto kind = loss_kind_from_name(get_string(j, path, "kind"));
    if (!kind) throw ConfigError(path + ".kind: unknown loss kind");
    loss.kind = *kind;
  }
  loss.temperature = get_number(j, path, "temperature", base.temperature);
  loss.sce_gamma = get_number(j, path, "sce_gamma", base.sce_gamma);
  loss.validate();
  return loss;
}

NegSamplerConfig parse_neg(const json& j, const std::string& path,
                           const NegSamplerConfig& base) {
  check_keys(j, path, {"strategy", "multiplier"});
  NegSamplerConfig neg = base;
  if (find_key(j, "strategy")) {
    const auto strategy =
        neg_strategy_from_name(get_string(j, path, "strategy"));
    if (!strategy) throw ConfigError(path + ".strategy: unknown strategy");
    neg.strategy = *strategy;
  }
  neg.multiplier = get_number(j, path, "multiplier", base.multiplier);
  neg.validate();
  return neg;
}

EncoderConfig parse_encoder(const json* j, const std::string& path) {
  EncoderConfig enc;
  if (!j) return enc;
  check_keys(*j, path,
             {"arch", "num_layers", "hidden_dim", "activation", "dropout_keep",
              "gat_heads"});
  if (find_key(*j, "arch")) {
    const auto arch = encoder_arch_from_name(get_string(*j, path, "arch"));
    if (!arch) throw ConfigError(path + ".arch: expected gcn, sage or gat");
    enc.arch = *arch;
  }
  enc.num_layers = get_index(*j, path, "num_layers", enc.num_layers);
  enc.hidden_dim = get_index(*j, path, "hidden_dim", enc.hidden_dim);
  if (find_key(*j, "activation")) {
    const std::string act = get_string(*j, path, "activation");
    if (act == "relu") {
      enc.activation = Activation::relu;
    } else if (act == "none") {
      enc.activation = Activation::none;
    } else {
      throw ConfigError(path + ".activation: expected relu or none");
    }
  }
  enc.dropout_keep = get_number(*j, path, "dropout_keep", enc.dropout_keep);
  enc.gat_heads = get_index(*j, path, "gat_heads", enc.gat_heads);
  return enc;
}

TrainConfig parse_train(const json* j, const std::string& path) {
  TrainConfig t;
  if (!j) return t;
  check_keys(*j, path,
             {"epochs", "learning_rate", "weight_decay", "beta1", "beta2",
              "eps", "grad_clip", "eval_every"});
  t.epochs = get_index(*j, path, "epochs", t.epochs);
  t.learning_rate = get_number(*j, path, "learning_rate", t.learning_rate);
  if (!(t.learning_rate > 0.0)) {
    throw ConfigError(path + ".learning_rate: must be > 0");
  }
  t.weight_decay = get_number(*j, path, "weight_decay", t.weight_decay);
  t.beta1 = get_number(*j, path, "beta1", t.beta1);
  t.beta2 = get_number(*j, path, "beta2", t.beta2);
  t.eps = get_number(*j, path, "eps", t.eps);
  if (find_key(*j, "grad_clip")) {
    t.grad_clip = get_number(*j, path, "grad_clip");
  }
  t.eval_every = get_index(*j, path, "eval_every", t.eval_every);
  t.validate();
  return t;
}

}  // namespace

SbmSpec parse_sbm_spec(const nlohmann::json& j, const std::string& path) {
  check_keys(j, path,
             {"blocks", "block_sizes", "p_in", "p_out", "feature_dim", "noise",
              "seed"});
  SbmSpec spec;
  const json* sizes = find_key(j, "block_sizes");
  if (!sizes || !sizes->is_array() || sizes->empty()) {
    throw ConfigError(path + ".block_sizes: expected nonempty array");
  }
  for (const auto& s : *sizes) {
    if (!s.is_number_integer() || s.get<long long>() < 1) {
      throw ConfigError(path + ".block_sizes: entries must be positive");
    }
    spec.block_sizes.push_back(s.get<std::size_t>());
  }
  if (find_key(j, "blocks")) {
    const std::size_t blocks = get_index(j, path, "blocks");
    if (blocks != spec.block_sizes.size()) {
      throw ConfigError(path + ".blocks: does not match block_sizes length");
    }
  }
  spec.p_in = get_number(j, path, "p_in", spec.p_in);
  spec.p_out = get_number(j, path, "p_out", spec.p_out);
  if (!(spec.p_out >= 0.0 && spec.p_out < spec.p_in && spec.p_in <= 1.0)) {
    throw ConfigError(path + ".p_in/p_out: need 0 <= p_out < p_in <= 1");
  }
  spec.feature_dim = get_index(j, path, "feature_dim", spec.feature_dim);
  spec.noise = get_number(j, path, "noise", spec.noise);
  if (spec.noise < 0.0) throw ConfigError(path + ".noise: must be >= 0");
  spec.seed = get_index(j, path, "seed", std::size_t{0});
  return spec;
}

std::string DatasetSpec::id() const {
  if (!path.empty()) return path;
  std::ostringstream os;
  os << "sbm(n=";
  std::size_t n = 0;
  for (std::size_t s : sbm->block_sizes) n += s;
  os << n << ",k=" << sbm->block_sizes.size() << ",p_in=" << sbm->p_in
     << ",p_out=" << sbm->p_out << ",seed=" << sbm->seed << ")";
  return os.str();
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  check_keys(j, "config",
             {"dataset", "task", "preset", "model", "loss", "neg_sampler",
              "mask_ratio", "encoder", "train", "embed_mode", "seeds",
              "output"});
  ExperimentConfig cfg;

  const json* dataset = find_key(j, "dataset");
  if (!dataset) throw ConfigError("config.dataset: missing required field");
  if (dataset->is_string()) {
    cfg.dataset.path = dataset->get<std::string>();
  } else if (dataset->is_object()) {
    check_keys(*dataset, "config.dataset", {"sbm"});
    const json* sbm = find_key(*dataset, "sbm");
    if (!sbm) throw ConfigError("config.dataset.sbm: missing required field");
    cfg.dataset.sbm = parse_sbm_spec(*sbm, "config.dataset.sbm");
  } else {
    throw ConfigError("config.dataset: expected path string or {\"sbm\": ...}");
  }

  const auto task = task_from_name(get_string(j, "config", "task"));
  if (!task) {
    throw ConfigError(
        "config.task: expected node_classification, link_prediction or "
        "clustering");
  }
  cfg.task = *task;

  cfg.encoder = parse_encoder(find_key(j, "encoder"), "config.encoder");
  cfg.encoder.validate();
  cfg.train = parse_train(find_key(j, "train"), "config.train");

  const json* preset_key = find_key(j, "preset");
  const json* model_key = find_key(j, "model");
  if (static_cast<bool>(preset_key) == static_cast<bool>(model_key)) {
    throw ConfigError("config: exactly one of \"preset\" or \"model\" required");
  }

  if (preset_key) {
    const std::string name = get_string(j, "config", "preset");
    if (!is_preset_name(name)) {
      throw ConfigError("config.preset: unknown preset '" + name + "'");
    }
    Preset p = preset(name, cfg.encoder.num_layers);
    cfg.model.preset_name = name;
    cfg.model.aug_a = p.aug_a;
    cfg.model.aug_b = p.aug_b;
    cfg.model.view = p.view;
    cfg.model.decoder.kind = p.decoder;
    cfg.model.loss.kind = p.loss;
    if (find_key(j, "mask_ratio")) {
      const double ratio = get_number(j, "config", "mask_ratio");
      if (ratio < 0.0 || ratio > 1.0) {
        throw ConfigError("config.mask_ratio: must be in [0, 1]");
      }
      if (cfg.model.aug_a.kind != AugmentKind::none) cfg.model.aug_a.ratio = ratio;
      if (cfg.model.aug_b.kind != AugmentKind::none) cfg.model.aug_b.ratio = ratio;
    }
    if (const json* loss = find_key(j, "loss")) {
      cfg.model.loss = parse_loss(*loss, "config.loss", cfg.model.loss);
      // Loss overrides may change the pairing mode requirement.
      if ((cfg.model.loss.kind == LossKind::mse ||
           cfg.model.loss.kind == LossKind::sce) &&
          cfg.model.view.pair_mode == PairMode::edge_pair) {
        throw ConfigError("config.loss.kind: " +
                          std::string(loss_kind_name(cfg.model.loss.kind)) +
                          " requires a same_node preset");
      }
      if (cfg.model.loss.kind == LossKind::bce &&
          cfg.model.view.pair_mode == PairMode::same_node) {
        throw ConfigError("config.loss.kind: bce requires an edge_pair preset");
      }
    }
    if (const json* neg = find_key(j, "neg_sampler")) {
      cfg.model.neg = parse_neg(*neg, "config.neg_sampler", cfg.model.neg);
    }
  } else {
    // "preset" inside the model block is the informational family tag that
    // result snapshots carry; the expanded fields are authoritative.
    check_keys(*model_key, "config.model",
               {"preset", "aug_a", "aug_b", "view", "decoder", "loss",
                "neg_sampler"});
    if (find_key(*model_key, "preset")) {
      cfg.model.preset_name = get_string(*model_key, "config.model", "preset");
    }
    if (find_key(j, "loss") || find_key(j, "neg_sampler") ||
        find_key(j, "mask_ratio")) {
      throw ConfigError(
          "config: loss/neg_sampler/mask_ratio overrides are only valid with "
          "a preset");
    }
    const json* aug_a = find_key(*model_key, "aug_a");
    const json* aug_b = find_key(*model_key, "aug_b");
    const json* view = find_key(*model_key, "view");
    if (!view) throw ConfigError("config.model.view: missing required field");
    cfg.model.aug_a = aug_a ? parse_augment(*aug_a, "config.model.aug_a")
                            : AugmentSpec{};
    cfg.model.aug_b = aug_b ? parse_augment(*aug_b, "config.model.aug_b")
                            : AugmentSpec{};
    cfg.model.view = parse_view(*view, "config.model.view");
    if (const json* dec = find_key(*model_key, "decoder")) {
      cfg.model.decoder = parse_decoder(*dec, "config.model.decoder");
    }
    if (const json* loss = find_key(*model_key, "loss")) {
      cfg.model.loss = parse_loss(*loss, "config.model.loss", cfg.model.loss);
    }
    if (const json* neg = find_key(*model_key, "neg_sampler")) {
      cfg.model.neg = parse_neg(*neg, "config.model.neg_sampler", cfg.model.neg);
    }
  }

  if (case_of(cfg.model.view) == 1) {
    throw ConfigError(
        "config.model.view: case 1 (identical views, receptive fields and "
        "nodes) is not applicable; its loss is identically zero");
  }
  validate_model(cfg.model.view, cfg.encoder, cfg.model.decoder, cfg.model.loss);

  if (const json* mode = find_key(j, "embed_mode")) {
    const std::string m = mode->is_string() ? mode->get<std::string>() : "";
    if (m == "last") {
      cfg.embed_mode = EmbedMode::last;
    } else if (m == "concat") {
      cfg.embed_mode = EmbedMode::concat;
    } else {
      throw ConfigError("config.embed_mode: expected last or concat");
    }
  }

  if (const json* seeds = find_key(j, "seeds")) {
    if (!seeds->is_array() || seeds->empty()) {
      throw ConfigError("config.seeds: expected nonempty array");
    }
    for (const auto& s : *seeds) {
      if (!s.is_number_integer() || s.get<long long>() < 0) {
        throw ConfigError("config.seeds: entries must be nonnegative integers");
      }
      cfg.seeds.push_back(s.get<std::uint64_t>());
    }
  } else {
    for (std::uint64_t s = 0; s < 10; ++s) cfg.seeds.push_back(s);
  }

  if (const json* output = find_key(j, "output")) {
    if (!output->is_string()) throw ConfigError("config.output: expected string");
    cfg.output = output->get<std::string>();
  }
  return cfg;
}

// ---- snapshot -------------------------------------------------------------------

namespace {

json augment_to_json(const AugmentSpec& spec) {
  json j;
  j["kind"] = augment_kind_name(spec.kind);
  if (spec.kind != AugmentKind::none) j["ratio"] = spec.ratio;
  if (spec.kind == AugmentKind::path_mask) j["walk_len"] = spec.walk_len;
  return j;
}

json model_to_json(const ModelSpec& model) {
  json j;
  j["aug_a"] = augment_to_json(model.aug_a);
  j["aug_b"] = augment_to_json(model.aug_b);
  json view;
  view["left_graph"] = graph_side_name(model.view.left_graph);
  view["right_graph"] = graph_side_name(model.view.right_graph);
  view["l"] = model.view.l;
  view["r"] = model.view.r;
  view["pair_mode"] = pair_mode_name(model.view.pair_mode);
  view["stop_gradient_right"] = model.view.stop_gradient_right;
  if (model.view.decode_right) view["decode_right"] = *model.view.decode_right;
  j["view"] = view;
  json dec;
  dec["kind"] = decoder_kind_name(model.decoder.kind);
  if (!model.decoder.hidden_dims.empty()) {
    dec["hidden_dims"] = model.decoder.hidden_dims;
  }
  if (model.decoder.output_dim != 0) dec["output_dim"] = model.decoder.output_dim;
  j["decoder"] = dec;
  json loss;
  loss["kind"] = loss_kind_name(model.loss.kind);
  loss["temperature"] = model.loss.temperature;
  loss["sce_gamma"] = model.loss.sce_gamma;
  j["loss"] = loss;
  json neg;
  neg["strategy"] = neg_strategy_name(model.neg.strategy);
  neg["multiplier"] = model.neg.multiplier;
  j["neg_sampler"] = neg;
  return j;
}

json sbm_to_json(const SbmSpec& spec) {
  json j;
  j["block_sizes"] = spec.block_sizes;
  j["p_in"] = spec.p_in;
  j["p_out"] = spec.p_out;
  j["feature_dim"] = spec.feature_dim;
  j["noise"] = spec.noise;
  j["seed"] = spec.seed;
  return j;
}

}  // namespace

nlohmann::json config_snapshot(const ExperimentConfig& cfg) {
  json j;
  if (cfg.dataset.sbm) {
    j["dataset"] = json{{"sbm", sbm_to_json(*cfg.dataset.sbm)}};
  } else {
    j["dataset"] = cfg.dataset.path;
  }
  j["task"] = task_name(cfg.task);
  json model = model_to_json(cfg.model);
  if (cfg.model.preset_name) {
    // Keep the family name for report grouping; the expanded block is
    // authoritative for re-running.
    model["preset"] = *cfg.model.preset_name;
  }
  j["model"] = model;
  json enc;
  enc["arch"] = encoder_arch_name(cfg.encoder.arch);
  enc["num_layers"] = cfg.encoder.num_layers;
  enc["hidden_dim"] = cfg.encoder.hidden_dim;
  enc["activation"] = cfg.encoder.activation == Activation::relu ? "relu" : "none";
  enc["dropout_keep"] = cfg.encoder.dropout_keep;
  if (cfg.encoder.arch == EncoderArch::gat) enc["gat_heads"] = cfg.encoder.gat_heads;
  j["encoder"] = enc;
  json train;
  train["epochs"] = cfg.train.epochs;
  train["learning_rate"] = cfg.train.learning_rate;
  train["weight_decay"] = cfg.train.weight_decay;
  train["beta1"] = cfg.train.beta1;
  train["beta2"] = cfg.train.beta2;
  train["eps"] = cfg.train.eps;
  if (cfg.train.grad_clip) train["grad_clip"] = *cfg.train.grad_clip;
  if (cfg.train.eval_every) train["eval_every"] = cfg.train.eval_every;
  j["train"] = train;
  j["embed_mode"] = cfg.embed_mode == EmbedMode::last ? "last" : "concat";
  j["seeds"] = cfg.seeds;
  if (!cfg.output.empty()) j["output"] = cfg.output;
  return j;
}

// ---- execution -------------------------------------------------------------------

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Splits are a pure function of (dataset, seed) so that every model sees
// identical splits and negatives on a given dataset and seed.
std::uint64_t split_seed_for(const DatasetSpec& dataset, std::uint64_t seed) {
  return Rng::mix(fnv1a(dataset.id()) ^ Rng::mix(seed));
}

std::vector<double> score_edges(const ExperimentConfig& cfg,
                                const Graph& train_graph, ParamStore& params,
                                std::span<const Edge> edges) {
  EncoderConfig enc = cfg.encoder;
  enc.input_dim = train_graph.feature_dim();
  Tape tape;
  Rng unused = Rng::seeded(0);
  GraphView view = no_augment(train_graph);
  EmbeddingStack stack =
      encode(tape, view, enc, params, /*training=*/false, unused, nullptr);

  const ModelSpec& model = cfg.model;
  const bool structural = model.loss.kind == LossKind::bce &&
                          model.decoder.kind != DecoderKind::mlp_feature;

  std::vector<double> scores;
  scores.reserve(edges.size());
  if (!structural) {
    // Feature-trained models score links by the inner product of the
    // learned representations.
    const Tensor& z = stack.layers.back();
    for (const Edge& e : edges) {
      double dot = 0.0;
      for (std::size_t j = 0; j < z.cols(); ++j) {
        dot += z.at(e.u, j) * z.at(e.v, j);
      }
      scores.push_back(dot);
    }
    return scores;
  }

  // Structural models reuse the trained edge decoder on the same branch
  // layers seen in training; both orientations are averaged so asymmetric
  // branches score undirected pairs consistently.
  const Tensor& left_layer = stack.layers.at(model.view.l);
  const Tensor& right_layer = stack.layers.at(model.view.r);
  std::vector<std::size_t> fwd_l, fwd_r, bwd_l, bwd_r;
  for (const Edge& e : edges) {
    fwd_l.push_back(e.u);
    fwd_r.push_back(e.v);
    bwd_l.push_back(e.v);
    bwd_r.push_back(e.u);
  }
  Tensor s_fwd = decode_edge(tape, model.decoder.kind,
                             gather_rows(tape, left_layer, fwd_l),
                             gather_rows(tape, right_layer, fwd_r), params);
  Tensor s_bwd = decode_edge(tape, model.decoder.kind,
                             gather_rows(tape, left_layer, bwd_l),
                             gather_rows(tape, right_layer, bwd_r), params);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    scores.push_back(0.5 * (s_fwd.at(i, 0) + s_bwd.at(i, 0)));
  }
  return scores;
}

}  // namespace

SeedResult run_single_seed(const ExperimentConfig& cfg, const Graph& g,
                           std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  SeedResult result;
  result.seed = seed;
  result.epochs = cfg.train.epochs;

  TrainConfig tcfg = cfg.train;
  tcfg.seed = seed;
  const std::uint64_t split_seed = split_seed_for(cfg.dataset, seed);

  switch (cfg.task) {
    case Task::node_classification: {
      if (!g.has_labels()) {
        throw ContractError("node_classification requires labels");
      }
      const NodeSplit split = node_split(g, {0.8, 0.1, 0.1}, split_seed);
      auto [params, record] =
          train(g, cfg.model.aug_a, cfg.model.aug_b, cfg.model.view,
                cfg.encoder, cfg.model.decoder, cfg.model.loss, cfg.model.neg,
                tcfg);
      Tensor z = embed(g, cfg.encoder, params, cfg.embed_mode);
      ProbeConfig probe;
      probe.seed = Rng::mix(seed ^ stream::kProbe);
      result.metrics["accuracy"] = linear_probe(z, g.labels(), split, probe);
      break;
    }
    case Task::link_prediction: {
      const LinkSplit split = link_split(g, {0.85, 0.05, 0.10}, split_seed);
      Graph train_graph(g.n(), split.train_edges, g.features(),
                        g.has_labels()
                            ? std::optional<std::vector<int>>(std::vector<int>(
                                  g.labels().begin(), g.labels().end()))
                            : std::nullopt);
      auto [params, record] =
          train(train_graph, cfg.model.aug_a, cfg.model.aug_b, cfg.model.view,
                cfg.encoder, cfg.model.decoder, cfg.model.loss, cfg.model.neg,
                tcfg);
      const auto pos = score_edges(cfg, train_graph, params, split.test_pos);
      const auto neg = score_edges(cfg, train_graph, params, split.test_neg);
      const auto [auc, ap] = link_metrics(pos, neg);
      result.metrics["auc"] = auc;
      result.metrics["ap"] = ap;
      break;
    }
    case Task::clustering: {
      if (!g.has_labels()) throw ContractError("clustering requires labels");
      auto [params, record] =
          train(g, cfg.model.aug_a, cfg.model.aug_b, cfg.model.view,
                cfg.encoder, cfg.model.decoder, cfg.model.loss, cfg.model.neg,
                tcfg);
      Tensor z = embed(g, cfg.encoder, params, cfg.embed_mode);
      Rng cluster_rng = Rng::seeded(Rng::mix(seed ^ stream::kCluster));
      const auto assignment =
          kmeans(z, static_cast<std::size_t>(g.num_classes()), 10, cluster_rng);
      result.metrics["nmi"] = nmi(assignment, g.labels());
      break;
    }
  }
  result.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.seeds.empty()) throw ConfigError("config.seeds: empty");

  Graph g = cfg.dataset.sbm ? generate_synthetic(*cfg.dataset.sbm)
                            : load_graph(cfg.dataset.path);

  std::size_t threads = 1;
  if (const char* env = std::getenv("LRGAE_THREADS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed > 0) threads = static_cast<std::size_t>(parsed);
  }
  threads = std::min(threads, cfg.seeds.size());

  ExperimentResult result;
  result.config = config_snapshot(cfg);
  result.per_seed.resize(cfg.seeds.size());

  if (threads <= 1) {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
      result.per_seed[i] = run_single_seed(cfg, g, cfg.seeds[i]);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cfg.seeds.size()) return;
        try {
          result.per_seed[i] = run_single_seed(cfg, g, cfg.seeds[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  // Aggregate (population std).
  std::set<std::string> metric_names;
  for (const auto& sr : result.per_seed) {
    for (const auto& [k, v] : sr.metrics) metric_names.insert(k);
  }
  for (const std::string& name : metric_names) {
    double sum = 0.0;
    for (const auto& sr : result.per_seed) sum += sr.metrics.at(name);
    const double mean = sum / static_cast<double>(result.per_seed.size());
    double var = 0.0;
    for (const auto& sr : result.per_seed) {
      const double d = sr.metrics.at(name) - mean;
      var += d * d;
    }
    var /= static_cast<double>(result.per_seed.size());
    result.aggregate[name] = {mean, std::sqrt(var)};
  }
  result.total_wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  if (!cfg.output.empty()) {
    const fs::path out(cfg.output);
    if (out.has_parent_path()) {
      std::error_code ec;
      fs::create_directories(out.parent_path(), ec);
    }
    std::ofstream file(out);
    if (!file) throw IoError("cannot write " + cfg.output);
    file << result_to_json(result).dump(2) << '\n';
  }
  return result;
}

nlohmann::json result_to_json(const ExperimentResult& result) {
  json j;
  j["config"] = result.config;
  json per_seed = json::array();
  for (const auto& sr : result.per_seed) {
    json entry;
    entry["seed"] = sr.seed;
    entry["metrics"] = sr.metrics;
    entry["epochs"] = sr.epochs;
    entry["wall_clock_s"] = sr.wall_clock_s;
    per_seed.push_back(entry);
  }
  j["per_seed"] = per_seed;
  json aggregate;
  for (const auto& [name, stats] : result.aggregate) {
    aggregate[name] = json{{"mean", stats.first}, {"std", stats.second}};
  }
  j["aggregate"] = aggregate;
  j["versions"] = json{{"lrgae", kEngineVersion}};
  j["total_wall_clock_s"] = result.total_wall_clock_s;
  return j;
}

// ---- report ---------------------------------------------------------------------

std::pair<std::string, std::string> render_report(
    const std::vector<std::string>& result_paths) {
  if (result_paths.empty()) {
    throw ContractError("report: no result files given");
  }
  struct Row {
    std::map<std::string, std::vector<double>> metric_values;
  };
  std::map<std::pair<std::string, std::string>, Row> rows;
  for (const std::string& path : result_paths) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ParseError(path + ": " + e.what());
    }
    const json& config = j.at("config");
    std::string dataset;
    if (config.at("dataset").is_string()) {
      dataset = config.at("dataset").get<std::string>();
    } else {
      dataset = config.at("dataset").dump();
    }
    std::string model = "explicit";
    if (config.contains("model") && config.at("model").contains("preset")) {
      model = config.at("model").at("preset").get<std::string>();
    }
    Row& row = rows[{dataset, model}];
    for (const auto& entry : j.at("per_seed")) {
      for (const auto& [name, value] : entry.at("metrics").items()) {
        row.metric_values[name].push_back(value.get<double>());
      }
    }
  }

  std::set<std::string> metric_names;
  for (const auto& [key, row] : rows) {
    for (const auto& [name, values] : row.metric_values) {
      metric_names.insert(name);
    }
  }

  auto cell = [](const std::vector<double>& values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f±%.1f", 100.0 * mean,
                  100.0 * std::sqrt(var));
    return std::string(buf);
  };

  // Column widths for the text table.
  std::vector<std::string> headers = {"dataset", "model"};
  headers.insert(headers.end(), metric_names.begin(), metric_names.end());
  std::vector<std::vector<std::string>> table;
  for (const auto& [key, row] : rows) {
    std::vector<std::string> line = {key.first, key.second};
    for (const std::string& name : metric_names) {
      const auto it = row.metric_values.find(name);
      line.push_back(it == row.metric_values.end() ? "-" : cell(it->second));
    }
    table.push_back(std::move(line));
  }
  std::vector<std::size_t> widths(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) widths[c] = headers[c].size();
  for (const auto& line : table) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      // The ± sign is two bytes in UTF-8 but one display column.
      std::size_t display = line[c].size();
      for (std::size_t i = 0; i + 1 < line[c].size(); ++i) {
        if (static_cast<unsigned char>(line[c][i]) == 0xC2 &&
            static_cast<unsigned char>(line[c][i + 1]) == 0xB1) {
          --display;
        }
      }
      widths[c] = std::max(widths[c], display);
    }
  }

  std::ostringstream text, csv;
  auto emit_row = [&](const std::vector<std::string>& line) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      std::size_t display = line[c].size();
      for (std::size_t i = 0; i + 1 < line[c].size(); ++i) {
        if (static_cast<unsigned char>(line[c][i]) == 0xC2 &&
            static_cast<unsigned char>(line[c][i + 1]) == 0xB1) {
          --display;
        }
      }
      text << line[c] << std::string(widths[c] - display + 2, ' ');
    }
    text << '\n';
  };
  emit_row(headers);
  for (const auto& line : table) emit_row(line);

  for (std::size_t c = 0; c < headers.size(); ++c) {
    csv << (c ? "," : "") << headers[c];
  }
  csv << '\n';
  for (const auto& line : table) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      csv << (c ? "," : "") << line[c];
    }
    csv << '\n';
  }
  return {text.str(), csv.str()};
}

const char* task_name(Task t) {
  switch (t) {
    case Task::node_classification: return "node_classification";
    case Task::link_prediction: return "link_prediction";
    case Task::clustering: return "clustering";
  }
  return "?";
}

std::optional<Task> task_from_name(const std::string& name) {
  if (name == "node_classification") return Task::node_classification;
  if (name == "link_prediction") return Task::link_prediction;
  if (name == "clustering") return Task::clustering;
  return std::nullopt;
}

}  // namespace lrgae
