#include "lrgae.h"

#include <cstring>
#include <string>

#include "experiment.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
lrgae_status guarded(Fn&& fn) {
  try {
    fn();
    return LRGAE_OK;
  } catch (const lrgae::IoError& e) {
    g_last_error = e.what();
    return LRGAE_ERROR_IO;
  } catch (const lrgae::ConfigError& e) {
    g_last_error = e.what();
    return LRGAE_ERROR_INVALID;
  } catch (const lrgae::ParseError& e) {
    g_last_error = e.what();
    return LRGAE_ERROR_INVALID;
  } catch (const lrgae::ValidationError& e) {
    g_last_error = e.what();
    return LRGAE_ERROR_INVALID;
  } catch (const lrgae::ContractError& e) {
    g_last_error = e.what();
    return LRGAE_ERROR_INVALID;
  } catch (const lrgae::DimensionError& e) {
    g_last_error = e.what();
    return LRGAE_ERROR_INVALID;
  } catch (const lrgae::DomainError& e) {
    g_last_error = e.what();
    return LRGAE_ERROR_INVALID;
  } catch (const lrgae::IndexError& e) {
    g_last_error = e.what();
    return LRGAE_ERROR_INVALID;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LRGAE_ERROR_RUNTIME;
  }
}

nlohmann::json parse_json_text(const char* text, const char* what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw lrgae::ParseError(std::string(what) + ": " + e.what());
  }
}

lrgae::SbmSpec sbm_spec_from_text(const char* text) {
  nlohmann::json j = parse_json_text(text, "sbm spec");
  if (j.is_object() && j.contains("sbm")) j = j.at("sbm");
  return lrgae::parse_sbm_spec(j, "sbm");
}

}  // namespace

struct lrgae_graph {
  lrgae::Graph graph;
};

extern "C" {

const char* lrgae_version(void) { return LRGAE_VERSION_STRING; }

const char* lrgae_last_error(void) { return g_last_error.c_str(); }

void lrgae_string_free(char* s) { std::free(s); }

lrgae_status lrgae_graph_load(const char* dir, lrgae_graph** out) {
  if (!dir || !out) {
    g_last_error = "lrgae_graph_load: NULL argument";
    return LRGAE_ERROR_BAD_ARGUMENT;
  }
  *out = nullptr;
  return guarded([&] {
    *out = new lrgae_graph{lrgae::load_graph(dir)};
  });
}

lrgae_status lrgae_graph_generate(const char* sbm_spec_json, lrgae_graph** out) {
  if (!sbm_spec_json || !out) {
    g_last_error = "lrgae_graph_generate: NULL argument";
    return LRGAE_ERROR_BAD_ARGUMENT;
  }
  *out = nullptr;
  return guarded([&] {
    *out = new lrgae_graph{
        lrgae::generate_synthetic(sbm_spec_from_text(sbm_spec_json))};
  });
}

lrgae_status lrgae_graph_save(const lrgae_graph* g, const char* dir) {
  if (!g || !dir) {
    g_last_error = "lrgae_graph_save: NULL argument";
    return LRGAE_ERROR_BAD_ARGUMENT;
  }
  return guarded([&] { lrgae::save_graph(g->graph, dir); });
}

void lrgae_graph_free(lrgae_graph* g) { delete g; }

size_t lrgae_graph_num_nodes(const lrgae_graph* g) {
  return g ? g->graph.n() : 0;
}

size_t lrgae_graph_num_edges(const lrgae_graph* g) {
  return g ? g->graph.num_edges() : 0;
}

size_t lrgae_graph_feature_dim(const lrgae_graph* g) {
  return g ? g->graph.feature_dim() : 0;
}

lrgae_status lrgae_run_experiment(const char* config_json,
                                  char** result_json_out) {
  if (!config_json) {
    g_last_error = "lrgae_run_experiment: NULL config";
    return LRGAE_ERROR_BAD_ARGUMENT;
  }
  return guarded([&] {
    const lrgae::ExperimentConfig cfg =
        lrgae::parse_experiment_config(parse_json_text(config_json, "config"));
    const lrgae::ExperimentResult result = lrgae::run_experiment(cfg);
    if (result_json_out) {
      *result_json_out = dup_string(lrgae::result_to_json(result).dump(2));
    }
  });
}

lrgae_status lrgae_generate_dataset(const char* sbm_spec_json,
                                    const char* out_dir) {
  if (!sbm_spec_json || !out_dir) {
    g_last_error = "lrgae_generate_dataset: NULL argument";
    return LRGAE_ERROR_BAD_ARGUMENT;
  }
  return guarded([&] {
    lrgae::save_graph(
        lrgae::generate_synthetic(sbm_spec_from_text(sbm_spec_json)), out_dir);
  });
}

lrgae_status lrgae_render_report(const char* const* result_paths, size_t count,
                                 char** text_out, char** csv_out) {
  if (!result_paths && count > 0) {
    g_last_error = "lrgae_render_report: NULL paths";
    return LRGAE_ERROR_BAD_ARGUMENT;
  }
  return guarded([&] {
    std::vector<std::string> paths;
    paths.reserve(count);
    for (size_t i = 0; i < count; ++i) paths.emplace_back(result_paths[i]);
    const auto [text, csv] = lrgae::render_report(paths);
    if (text_out) *text_out = dup_string(text);
    if (csv_out) *csv_out = dup_string(csv);
  });
}

}  // extern "C"
