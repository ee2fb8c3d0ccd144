#pragma once

// Evaluation metrics and exports: teacher-forced next-tool accuracy, greedy
// rollout match ratio, exploration diversity, discovery-speed records and the
// pheromone heatmap CSV.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phgpo/environment.hpp"
#include "phgpo/pheromone.hpp"
#include "phgpo/policy.hpp"
#include "phgpo/sampling.hpp"
#include "phgpo/tool_graph.hpp"

namespace phgpo {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

struct EvalOptions {
  SamplerConfig sampler;          // beta as scheduled for the evaluation
  double w = 0.5;                 // fusion weight
  bool use_pheromone = true;      // false: never consult trails (plain policy)
  int embedding_dim = 64;
  SimulatorConfig simulator;
};

// Every tool except START is a candidate action.
std::vector<ToolId> selectable_tools(const ToolGraph& g);

// Teacher-forced argmax accuracy: condition each step on the reference
// prefix, predict via the (optionally fused) guided distribution, argmax with
// ties to the lower tool id. Mean over all steps of all episodes.
double eval_next_tool_accuracy(const LinearPolicy& policy, const ToolGraph& g,
                               const PheromoneStore& store,
                               const MemoryBanks& banks,
                               const std::vector<Episode>& episodes,
                               const EvalOptions& opts);

// Mean normalized entropy H(guided)/log(n_selectable) of the sampling
// distribution over every reference-prefix state. 1.0 iff uniform over all
// selectable tools (requires top_k >= n_selectable).
double exploration_diversity(const LinearPolicy& policy, const ToolGraph& g,
                             const PheromoneStore& store,
                             const MemoryBanks& banks,
                             const std::vector<Episode>& episodes,
                             const EvalOptions& opts);

struct EpisodeEval {
  std::string task_id;
  double match_ratio = 0.0;
  bool completed = false;
};

struct EvalReport {
  int n_episodes = 0;
  double match_ratio_mean = 0.0;
  double completion_rate = 0.0;
  double tool_accuracy = 0.0;
  double diversity = 0.0;
  std::vector<EpisodeEval> episodes;

  nlohmann::json to_json() const;
};

// Deterministic greedy rollout for one episode: argmax tool, argmax
// invocation, simulator in the loop, stops on completion or after exactly
// reference-length steps (later steps cannot change the match ratio).
EpisodeEval greedy_rollout_eval(const LinearPolicy& policy, const ToolGraph& g,
                                const PheromoneStore& store,
                                const MemoryBanks& banks, const Episode& ep,
                                const EvalOptions& opts);

// Full report over a split. Throws on an empty episode list.
EvalReport evaluate(const LinearPolicy& policy, const ToolGraph& g,
                    const PheromoneStore& store, const MemoryBanks& banks,
                    const std::vector<Episode>& episodes,
                    const EvalOptions& opts);

struct DiscoveryRecord {
  std::string task_id;
  std::optional<std::int64_t> first_success_step;  // absent: never reached
};

// Mean first-success step with never-discovered episodes censored at
// censor_step. Throws on empty records.
double mean_first_success(const std::vector<DiscoveryRecord>& records,
                          std::int64_t censor_step);

void save_discovery_records(const std::string& path,
                            const std::vector<DiscoveryRecord>& records);
std::vector<DiscoveryRecord> load_discovery_records(const std::string& path);

// Writes the fused-trail matrix over a tool subset for one task text:
// header row and column of tool names, |subset|+1 rows total. The sidecar
// edge table lists from,to,value,on_chain with consecutive `chain` pairs
// flagged 1. Unknown tool names throw.
void export_heatmap(const PheromoneStore& store, const MemoryBanks& banks,
                    const ToolGraph& g, const std::string& task_text,
                    const std::vector<std::string>& subset,
                    const std::vector<std::string>& chain, double w,
                    int embedding_dim, const std::string& matrix_path,
                    const std::string& edges_path);

struct HeatmapData {
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;
};

HeatmapData parse_heatmap_csv(const std::string& path);

}  // namespace phgpo
