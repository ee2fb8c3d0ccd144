#pragma once

// Whole-run configuration and the training driver: corpus in, artifacts out.
// A single master seed derives every sub-seed (corpus synthesis, simulator,
// rollout streams, split shuffle), so equal configs give byte-equal runs.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phgpo/environment.hpp"
#include "phgpo/metrics.hpp"
#include "phgpo/pheromone.hpp"
#include "phgpo/sampling.hpp"
#include "phgpo/trainer.hpp"

namespace phgpo {

struct RunConfig {
  std::uint64_t seed = 0;
  std::string corpus_path;  // empty: synthesize from `synth`
  SynthConfig synth;
  double train_ratio = 0.8;
  double val_ratio = 0.1;
  double test_ratio = 0.1;
  int embedding_dim = 64;
  int n_buckets = 32;
  PheromoneParams pheromone;
  SamplerConfig sampler;
  SimulatorConfig simulator;
  TrainerConfig trainer;

  void validate() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  // FNV-1a over the canonical dump; resume refuses a mismatch.
  std::uint64_t hash() const;
};

RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& cfg);

// PHGPO_SEED, when set, overrides cfg.seed. Returns true when applied.
bool apply_env_seed(RunConfig& cfg);

// Overwrites synth/simulator/trainer sub-seeds from the master seed. Called
// by run_training before hashing, so sub-seeds in a config file are ignored.
void resolve_seeds(RunConfig& cfg);

// Named ablations patched onto a base config. Unknown names throw and the
// message lists the valid ones.
void apply_variant(RunConfig& cfg, const std::string& variant);
const std::vector<std::string>& variant_names();

struct RunArtifacts {
  std::string out_dir;
  EvalReport test_report;  // final-schedule greedy evaluation, test split
};

// Full pipeline: corpus (load or synthesize), graph, splits, training with
// per-epoch metrics/discovery rewrites and periodic checkpoints, then final
// artifacts (policy.json, pheromone.json, graph.json, run_checkpoint.json,
// eval_report.json). With resume=true an existing run_checkpoint.json in
// out_dir continues the run; its config hash must match.
RunArtifacts run_training(const RunConfig& cfg, const std::string& out_dir,
                          bool resume);

}  // namespace phgpo
