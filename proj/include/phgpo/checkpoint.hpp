#pragma once

// Resumable run state. Everything mutable during training is captured here;
// rng streams are derived from (seed, counters) so storing the counters is
// enough for bit-identical continuation.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace phgpo {

struct RunState {
  int version = 1;
  std::uint64_t config_hash = 0;  // resume refuses a different config
  bool warmed = false;
  int epochs_done = 0;
  std::int64_t global_step = 0;
  std::uint64_t rollout_counter = 0;
  nlohmann::json policy;
  nlohmann::json store;
  nlohmann::json banks;
  nlohmann::json graph;
  std::vector<double> ppo_baselines;
  std::vector<bool> ppo_has_baseline;
  std::vector<std::optional<std::int64_t>> discovery;
  std::vector<std::string> metric_lines;

  nlohmann::json to_json() const;
  static RunState from_json(const nlohmann::json& j);
};

void save_run_state(const std::string& path, const RunState& s);
RunState load_run_state(const std::string& path);  // throws on version mismatch

}  // namespace phgpo
