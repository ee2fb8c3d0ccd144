#pragma once

// Episodes, the scripted execution environment, the synthetic corpus
// generator and corpus/split plumbing. The simulator is a pure function of
// (seed, tool, invocation, task, recent history): no hidden state, so
// identical calls always agree and caching can never change results.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "phgpo/tool_graph.hpp"

namespace phgpo {

struct Episode {
  std::string task_id;
  std::string text;
  std::vector<Action> reference;
};

// Maps corpus records onto graph ids. Throws when a step names a tool or an
// invocation pattern the graph does not have, identifying the offending step.
std::vector<Episode> resolve_episodes(const ToolGraph& g,
                                      const std::vector<RawEpisode>& raw);

struct SimResult {
  std::string output;
  bool is_error = false;
  bool is_complete = false;

  bool operator==(const SimResult& o) const {
    return output == o.output && is_error == o.is_error &&
           is_complete == o.is_complete;
  }
};

struct SimulatorConfig {
  std::uint64_t seed = 0;
  double error_rate = 0.05;   // scripted failure probability per call
  int history_window = 4;     // recent steps folded into the content hash
  bool cache_enabled = true;
};

// Completion marker emitted on the final line of raw simulator output and
// stripped before the result is returned.
inline constexpr const char* kEndMarker = "<<END>>";

// In-memory idempotence cache keyed by content hash, with hit accounting.
class SimCache {
 public:
  const SimResult* find(std::uint64_t key) const;
  void insert(std::uint64_t key, const SimResult& r);
  std::size_t size() const { return map_.size(); }
  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }

  nlohmann::json to_json() const;
  static SimCache from_json(const nlohmann::json& j);

 private:
  std::unordered_map<std::uint64_t, SimResult> map_;
  mutable std::uint64_t hits_ = 0;
  mutable std::uint64_t misses_ = 0;
};

// Deterministic content hash over tool variant, invocation, task and the
// trailing history window.
std::uint64_t sim_content_hash(const ToolGraph& g, const Action& action,
                               const Episode& episode,
                               const std::vector<Action>& history,
                               const SimulatorConfig& cfg);

// Raw templated output including the completion marker line when the executed
// prefix (history + action) equals the full reference.
std::string compose_raw_output(const ToolGraph& g, const Action& action,
                               bool is_error, bool is_complete,
                               std::uint64_t content_hash);

// Removes a trailing completion marker line; returns the cleaned text and
// whether the marker was present.
std::pair<std::string, bool> strip_completion_marker(const std::string& raw);

// Executes one action. `history` is the executed prefix before this action.
// Invalid tool/pattern indices throw.
SimResult simulate(const ToolGraph& g, const Action& action,
                   const Episode& episode, const std::vector<Action>& history,
                   const SimulatorConfig& cfg, SimCache* cache = nullptr);

struct SynthConfig {
  int n_tools = 50;           // excluding the START marker
  int n_categories = 5;
  int patterns_per_tool = 2;
  int out_degree = 6;         // successor fan-out of the walk substrate
  int n_episodes = 200;
  int n_families = 25;        // distinct workflow chains episodes recur over
  int min_len = 4;
  int max_len = 20;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static SynthConfig from_json(const nlohmann::json& j);
};

// Seeded synthetic corpus: a pool of family chains (random walks over a fixed
// sparse transition substrate) that episodes recur over, task text built from
// the tool names on the chain so same-family tasks embed close to each other.
std::vector<RawEpisode> generate_synthetic(const SynthConfig& cfg);

// JSONL corpus IO; one record per line.
std::vector<RawEpisode> load_corpus(const std::string& path);
void save_corpus(const std::string& path, const std::vector<RawEpisode>& eps);
nlohmann::json raw_episode_to_json(const RawEpisode& ep);
RawEpisode raw_episode_from_json(const nlohmann::json& j);

struct SplitIndices {
  std::vector<int> train, val, test;
};

// Seeded shuffle then contiguous slices. Ratios must be nonnegative and sum
// to 1 (within 1e-9); an episode lands in exactly one slice.
SplitIndices split_corpus(int n_episodes, double train_ratio, double val_ratio,
                          double test_ratio, std::uint64_t seed);

}  // namespace phgpo
