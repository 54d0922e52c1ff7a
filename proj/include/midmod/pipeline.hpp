#pragma once

// Pipeline stages behind the command-line tool. Every stage reads and writes
// files under one output directory and leaves a manifest with the config
// echo, the root seed and a SHA-256 of each file it wrote.

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "midmod/blr.hpp"
#include "midmod/eval.hpp"
#include "midmod/eventlog.hpp"
#include "midmod/features.hpp"
#include "midmod/forest.hpp"
#include "midmod/graph.hpp"
#include "midmod/simulator.hpp"
#include "midmod/virality.hpp"

namespace midmod {

std::string sha256_hex(std::string_view data);

struct PipelinePaths {
  std::string graph = "graph.txt";
  std::string events = "events.jsonl";
  std::string profiles = "profiles.jsonl";
  std::string topic = "topic.json";
  std::optional<std::string> lexicon;
};

struct EvalOptions {
  std::size_t k = 10;
  double train_fraction = 0.8;
  std::size_t repeats = 10;
  double threshold = 0.5;
  std::size_t select_top = 0;  // forest top-k selection inside each fold; 0 keeps all features
};

struct PipelineConfig {
  std::uint64_t rng_seed = 0;
  bool seed_given = false;  // stochastic stages refuse to run on an implicit seed
  std::filesystem::path output_dir = ".";
  PipelinePaths paths;
  SimulationConfig simulation;
  BlrOptions blr;
  ForestOptions forest;
  EvalOptions eval;
  std::size_t top_k = 15;
  bool strict = false;
  std::optional<std::string> model;    // cross-test inputs; the full bin matrix when absent
  std::optional<std::string> dataset;
  ViralityConfig virality;

  std::filesystem::path resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : output_dir / path;
  }
};

// The echo leaves out the output directory so runs in different places
// produce identical manifests.
nlohmann::json to_json(const PipelineConfig& c);

// Sets a dotted key ("blr.prior_variance") in a JSON object. The value is
// parsed as JSON when possible and kept as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

struct Manifest {
  std::string subcommand;
  std::map<std::string, std::string> outputs;  // file name -> sha256

  nlohmann::json to_json(const PipelineConfig& cfg) const {
    nlohmann::json files = nlohmann::json::array();
    for (const auto& [name, hash] : outputs) files.push_back({{"file", name}, {"sha256", hash}});
    return {{"subcommand", subcommand},
            {"rng_seed", cfg.rng_seed},
            {"config", midmod::to_json(cfg)},
            {"outputs", files}};
  }
};

// Writes outputs under the output directory and records their hashes.
class Workspace {
 public:
  Workspace(const PipelineConfig& cfg, std::string subcommand) : cfg_(cfg) {
    manifest_.subcommand = std::move(subcommand);
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + cfg.output_dir.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const auto path = cfg_.output_dir / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw DataError("cannot write " + path.string());
    manifest_.outputs[name] = sha256_hex(content);
  }

  template <typename Fn>
  void write_with(const std::string& name, Fn&& fn) {
    std::ostringstream out;
    fn(out);
    write(name, out.str());
  }

  void write_json(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n"); }

  // Input path that must exist.
  std::string input(const std::string& p) const {
    const auto path = cfg_.resolve(p);
    if (!std::filesystem::exists(path)) throw ConfigError("input does not exist: " + path.string());
    return path.string();
  }

  const Manifest& finish() {
    const std::string name = "manifest_" + manifest_.subcommand + ".json";
    const auto path = cfg_.output_dir / name;
    std::ofstream out(path, std::ios::binary);
    out << manifest_.to_json(cfg_).dump(2) << "\n";
    if (!out) throw DataError("cannot write " + path.string());
    return manifest_;
  }

 private:
  const PipelineConfig& cfg_;
  Manifest manifest_;
};

std::string bin_file(const std::string& stem, std::size_t b, const std::string& ext);

namespace detail {

inline IngestResult load_inputs(Workspace& ws, const PipelineConfig& cfg) {
  IngestResult in = ingest(ws.input(cfg.paths.events), ws.input(cfg.paths.profiles));
  if (cfg.strict && (in.report.malformed > 0 || in.report.profiles_malformed > 0)) {
    throw DataError("strict ingest: " + std::to_string(in.report.malformed) + " malformed event lines, " +
                    std::to_string(in.report.profiles_malformed) + " malformed profile lines");
  }
  return in;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

inline std::array<Dataset, kBinCount> load_bin_datasets(const Workspace& ws) {
  std::array<Dataset, kBinCount> out;
  for (std::size_t b = 0; b < kBinCount; ++b) out[b] = load_csv(ws.input(bin_file("dataset", b, ".csv")));
  return out;
}

inline std::vector<BlrModel> load_bin_models(const Workspace& ws, const std::string& stem) {
  std::vector<BlrModel> out;
  for (std::size_t b = 0; b < kBinCount; ++b) out.push_back(blr_from_json(read_json_file(ws.input(bin_file(stem, b, ".json")))));
  return out;
}

inline ForestOptions stage_forest(const PipelineConfig& cfg, std::string_view stage, std::size_t b) {
  ForestOptions f = cfg.forest;
  f.seed = hash_combine(derive_seed(cfg.rng_seed, stage), b);
  return f;
}

}  // namespace detail

Manifest run_simulate(const PipelineConfig& cfg);

Manifest run_ingest(const PipelineConfig& cfg);

Manifest run_extract(const PipelineConfig& cfg);

Manifest run_train(const PipelineConfig& cfg);

Manifest run_rank(const PipelineConfig& cfg);

inline std::string topk_stem(std::size_t k) { return "model_top" + std::to_string(k); }

Manifest run_retrain_topk(const PipelineConfig& cfg);

Manifest run_evaluate(const PipelineConfig& cfg);

Manifest run_cross_test(const PipelineConfig& cfg);

Manifest run_time_report(const PipelineConfig& cfg);

Manifest run_predict_virality(const PipelineConfig& cfg);

const std::vector<std::string>& subcommands();

bool is_stochastic(const std::string& name);

Manifest run_subcommand(const std::string& name, const PipelineConfig& cfg);

// Exit status for an exception escaping a stage.
int exit_code_for(const std::exception& e);

}  // namespace midmod
