#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "train.hpp"

namespace lrgae {

inline constexpr const char* kEngineVersion = "0.1.0";

enum class Task { node_classification, link_prediction, clustering };

struct DatasetSpec {
  std::string path;             // directory; empty when synthetic
  std::optional<SbmSpec> sbm;   // synthetic generator spec

  // Stable identifier used as the report grouping key.
  std::string id() const;
};

// Fully resolved model block: augmentations, contrastive view, decoder,
// loss, and negative sampler.
struct ModelSpec {
  std::optional<std::string> preset_name;  // set when built from a preset
  AugmentSpec aug_a;
  AugmentSpec aug_b;
  ViewSpec view;
  DecoderConfig decoder;
  LossConfig loss;
  NegSamplerConfig neg;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  Task task = Task::node_classification;
  ModelSpec model;
  EncoderConfig encoder;
  TrainConfig train;
  EmbedMode embed_mode = EmbedMode::last;
  std::vector<std::uint64_t> seeds;
  std::string output;
};

// Parses and validates a config document. Unknown keys are errors; every
// failure message names the offending field path.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);

// Canonical re-parseable form of a resolved config; embedding this snapshot
// in the result file makes every run reproducible from its output alone.
nlohmann::json config_snapshot(const ExperimentConfig& cfg);

struct SeedResult {
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;
  std::size_t epochs = 0;
  double wall_clock_s = 0.0;
};

struct ExperimentResult {
  nlohmann::json config;
  std::vector<SeedResult> per_seed;
  std::map<std::string, std::pair<double, double>> aggregate;  // mean, std
  double total_wall_clock_s = 0.0;
};

// Executes every seed (in parallel up to LRGAE_THREADS), writes the result
// JSON to cfg.output when nonempty, and returns the report.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

nlohmann::json result_to_json(const ExperimentResult& result);

// One pretraining + evaluation pass; exposed for tests.
SeedResult run_single_seed(const ExperimentConfig& cfg, const Graph& g,
                           std::uint64_t seed);

// Parses the dataset-generator document ({"sbm": {...}} or bare SBM spec).
SbmSpec parse_sbm_spec(const nlohmann::json& j, const std::string& path);

// Renders the mean+-std table over previously written result files.
// Returns (text table, csv). Missing or unreadable files raise IoError.
std::pair<std::string, std::string> render_report(
    const std::vector<std::string>& result_paths);

const char* task_name(Task t);
std::optional<Task> task_from_name(const std::string& name);

}  // namespace lrgae
