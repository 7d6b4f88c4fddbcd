// Experiment runner CLI. Talks to the engine exclusively through the
// public C API in lrgae.h.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lrgae.h"

namespace fs = std::filesystem;

namespace {

int exit_code_for(lrgae_status status) {
  return status == LRGAE_ERROR_INVALID ? 2 : 1;
}

int fail(lrgae_status status) {
  std::cerr << "error: " << lrgae_last_error() << "\n";
  return exit_code_for(status);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    std::exit(2);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Shell-style match supporting '*' and '?' within one path component.
bool wildcard_match(const std::string& pattern, const std::string& text) {
  std::size_t p = 0, t = 0, star = std::string::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() &&
        (pattern[p] == '?' || pattern[p] == text[t])) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

std::vector<std::string> expand_globs(const std::vector<std::string>& args) {
  std::vector<std::string> paths;
  for (const std::string& arg : args) {
    if (arg.find('*') == std::string::npos &&
        arg.find('?') == std::string::npos) {
      paths.push_back(arg);
      continue;
    }
    const fs::path pattern(arg);
    const fs::path dir =
        pattern.has_parent_path() ? pattern.parent_path() : fs::path(".");
    const std::string name_pattern = pattern.filename().string();
    std::vector<std::string> matched;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
      if (entry.is_regular_file() &&
          wildcard_match(name_pattern, entry.path().filename().string())) {
        matched.push_back(entry.path().string());
      }
    }
    std::sort(matched.begin(), matched.end());
    paths.insert(paths.end(), matched.begin(), matched.end());
  }
  return paths;
}

void print_run_summary(const std::string& result_json) {
  const auto j = nlohmann::json::parse(result_json);
  const auto& config = j.at("config");
  std::string dataset = config.at("dataset").is_string()
                            ? config.at("dataset").get<std::string>()
                            : config.at("dataset").dump();
  std::string model = "explicit";
  if (config.at("model").contains("preset")) {
    model = config.at("model").at("preset").get<std::string>();
  }
  std::cout << "dataset: " << dataset << "\n";
  std::cout << "task:    " << config.at("task").get<std::string>() << "\n";
  std::cout << "model:   " << model << "\n";
  std::cout << "seeds:   " << j.at("per_seed").size() << "\n";
  for (const auto& [name, stats] : j.at("aggregate").items()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f ± %.4f",
                  stats.at("mean").get<double>(), stats.at("std").get<double>());
    std::cout << name << ": " << buf << "\n";
  }
  std::cout << "wall clock: " << j.at("total_wall_clock_s").get<double>()
            << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lrgae: graph self-supervised learning benchmark"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("config", config_path, "Path to config.json")->required();

  std::string spec_path, out_dir;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic SBM dataset");
  gen->add_option("spec", spec_path, "Path to SBM spec JSON")->required();
  gen->add_option("out_dir", out_dir, "Output dataset directory")->required();

  std::vector<std::string> report_globs;
  std::string csv_path;
  auto* report = app.add_subcommand("report", "Aggregate result files");
  report->add_option("results", report_globs, "Result files or globs")
      ->required();
  report->add_option("--csv", csv_path, "Also write the table as CSV");

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    const std::string config = read_file(config_path);
    char* result_json = nullptr;
    const lrgae_status status = lrgae_run_experiment(config.c_str(), &result_json);
    if (status != LRGAE_OK) return fail(status);
    print_run_summary(result_json);
    lrgae_string_free(result_json);
    return 0;
  }

  if (*gen) {
    const std::string spec = read_file(spec_path);
    const lrgae_status status =
        lrgae_generate_dataset(spec.c_str(), out_dir.c_str());
    if (status != LRGAE_OK) return fail(status);
    std::cout << "wrote dataset to " << out_dir << "\n";
    return 0;
  }

  if (*report) {
    const auto paths = expand_globs(report_globs);
    if (paths.empty()) {
      std::cerr << "error: no result files matched\n";
      return 2;
    }
    std::vector<const char*> c_paths;
    c_paths.reserve(paths.size());
    for (const auto& p : paths) c_paths.push_back(p.c_str());
    char* text = nullptr;
    char* csv = nullptr;
    const lrgae_status status = lrgae_render_report(
        c_paths.data(), c_paths.size(), &text, csv_path.empty() ? nullptr : &csv);
    if (status != LRGAE_OK) return fail(status);
    std::cout << text;
    lrgae_string_free(text);
    if (!csv_path.empty()) {
      std::ofstream out(csv_path);
      if (!out) {
        std::cerr << "error: cannot write " << csv_path << "\n";
        lrgae_string_free(csv);
        return 1;
      }
      out << csv;
      lrgae_string_free(csv);
      std::cout << "csv written to " << csv_path << "\n";
    }
    return 0;
  }
  return 0;
}
