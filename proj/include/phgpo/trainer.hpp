#pragma once

// Progressive training pipeline: supervised warm-up, a horizon curriculum
// with teacher forcing annealed away, then a fully pheromone-guided final
// phase. Policy updates use a group-relative clipped surrogate; pheromone
// updates replay verified successful trajectories.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phgpo/checkpoint.hpp"
#include "phgpo/environment.hpp"
#include "phgpo/metrics.hpp"
#include "phgpo/pheromone.hpp"
#include "phgpo/policy.hpp"
#include "phgpo/rewards.hpp"
#include "phgpo/sampling.hpp"
#include "phgpo/tool_graph.hpp"

namespace phgpo {

enum class AdvantageMode { kGRPO, kPPO, kRLOO };
enum class BetaMode { kDynamic, kFixed };

std::string advantage_mode_name(AdvantageMode m);
AdvantageMode advantage_mode_from(const std::string& name);

struct TrainerConfig {
  int group_size = 5;                // rollouts per episode visit
  double clip_eps = 0.2;
  double entropy_coef = 0.005;
  double adv_eps = 1e-8;
  AdvantageMode advantage_mode = AdvantageMode::kGRPO;
  double ppo_baseline_decay = 0.9;   // per-episode return EMA
  double elite_gate = 0.3;           // deposits only once p_tf < this
  double q_gate = 0.6;               // quality gate for deposits / discovery
  double sl_lr = 0.1;
  double pg_lr = 0.01;
  int warmup_epochs = 5;
  std::vector<int> stage_horizons = {5, 10, 15, 20};
  int epochs_per_stage = 3;
  int final_epochs = 4;
  double p_tf_start = 1.0;
  double p_tf_final = 0.15;          // value at the end of the curriculum
  double lambda_start = 1.0;
  double beta_max = 0.8;
  BetaMode beta_mode = BetaMode::kDynamic;
  double beta_fixed = 0.0;           // used when beta_mode == kFixed
  double beta_ramp_fraction = 0.3;   // share of epochs spent ramping beta / w
  double w_max = 0.5;
  bool pheromone_enabled = true;     // master switch; false = plain optimizer
  bool pheromone_updates = true;     // deposits, banks, lazy edge discovery
  bool evaporate_final_phase = true; // false: rho forced to 0 in final phase
  bool freeze_after_curriculum = false;  // no pheromone writes in final phase
  double complete_bonus = 2.0;
  double partial_coef = 1.0;
  int checkpoint_every = 0;          // epochs between checkpoints; 0 = end only
  int n_threads = 1;
  std::uint64_t seed = 0;

  int n_stages() const { return static_cast<int>(stage_horizons.size()); }
  int curriculum_epochs() const { return n_stages() * epochs_per_stage; }
  int total_epochs() const { return curriculum_epochs() + final_epochs; }
  void validate() const;

  nlohmann::json to_json() const;
  static TrainerConfig from_json(const nlohmann::json& j);
};

struct ScheduleState {
  int epoch = 0;
  int stage = 1;     // 1..S during the curriculum, S+1 in the final phase
  int horizon = 0;
  double p_tf = 1.0;
  double lambda = 1.0;
  double beta = 0.0;
  double w = 0.0;
};

// Pure schedule lookup; epoch indexes the post-warm-up loop from 0.
ScheduleState schedule_at(const TrainerConfig& cfg, int epoch);

// Group-relative advantages. kPPO subtracts `ppo_baseline` (must be present);
// kRLOO needs at least two returns; kGRPO standardizes by the population std.
std::vector<double> compute_advantages(const std::vector<double>& returns,
                                       AdvantageMode mode, double eps,
                                       std::optional<double> ppo_baseline = {});

struct RolloutStep {
  State state;                      // decision-time state
  StepChoice choice;
  std::optional<ToolId> ref_tool;   // reference tool at this position
  SimResult sim;
  double intent = 0.0;
  double exec = 0.0;
};

struct Rollout {
  std::vector<RolloutStep> steps;
  std::vector<Action> actions;
  bool completed = false;
  double q = 0.0;                    // match ratio incl. forced steps
  std::optional<double> q_model;     // match ratio on free steps only
  double outcome = 0.0;
  double ret = 0.0;
};

struct RolloutGroup {
  std::vector<Rollout> rollouts;
  std::uint64_t policy_version = 0;     // snapshot ids for staleness checks
  std::uint64_t pheromone_version = 0;
};

struct EpochRecord {
  int epoch = 0;
  int stage = 0;
  double avg_return = 0.0;
  double match_ratio = 0.0;
  double tool_acc = 0.0;
  double diversity = 0.0;
  int edge_count = 0;
  double p_tf = 0.0, beta = 0.0, lambda = 0.0, w = 0.0;

  std::string to_json_line() const;  // canonical single-line JSON
};

class Trainer {
 public:
  Trainer(ToolGraph graph, std::vector<Episode> train_episodes,
          std::vector<Episode> val_episodes, TrainerConfig cfg,
          PheromoneParams pheromone_params, SamplerConfig sampler_base,
          SimulatorConfig sim_cfg, int n_buckets, int embedding_dim);

  // Supervised warm-up over every (state, next reference tool) pair; one SGD
  // step per pair. Returns mean cross-entropy per epoch (descent diagnostic).
  std::vector<double> run_warmup();

  // One curriculum/final-phase epoch: per train episode a rollout group, an
  // advantage-weighted policy update and a gated pheromone update, then
  // epoch-level evaporation and a metrics row.
  void run_epoch(int epoch);

  // Warm-up (if still pending) plus all remaining epochs. `after_epoch` fires
  // once per completed epoch, e.g. to persist checkpoints.
  void run(const std::function<void(const Trainer&, int)>& after_epoch = {});

  RolloutGroup rollout_group(int episode_index, const ScheduleState& sched);
  std::vector<double> group_advantages(const RolloutGroup& group,
                                       int episode_index);
  void update_policy(const RolloutGroup& group,
                     const std::vector<double>& advantages,
                     const ScheduleState& sched);
  void update_pheromone(const RolloutGroup& group, int episode_index,
                        const ScheduleState& sched);

  const ToolGraph& graph() const { return graph_; }
  const LinearPolicy& policy() const { return policy_; }
  const PheromoneStore& store() const { return store_; }
  const MemoryBanks& banks() const { return banks_; }
  const TrainerConfig& config() const { return cfg_; }
  const std::vector<Episode>& train_episodes() const { return train_; }
  const std::vector<std::string>& metric_lines() const { return metric_lines_; }
  std::vector<DiscoveryRecord> discovery_records() const;
  std::int64_t global_step() const { return global_step_; }
  int epochs_done() const { return epochs_done_; }
  bool warmed() const { return warmed_; }
  EvalOptions eval_options(const ScheduleState& sched) const;

  RunState capture(std::uint64_t config_hash) const;
  void restore(const RunState& state);

 private:
  Rollout roll_one(const Episode& ep, const TaskEmbedding& e_x, int bucket,
                   const ScheduleState& sched, const FusedEvaluator& fe,
                   std::uint64_t rollout_id) const;
  const TaskEmbedding& embedding_of(int episode_index);
  bool updates_active(const ScheduleState& sched) const;

  ToolGraph graph_;
  std::vector<Episode> train_, val_;
  TrainerConfig cfg_;
  SamplerConfig sampler_base_;
  SimulatorConfig sim_cfg_;
  int embedding_dim_;

  LinearPolicy policy_;
  PheromoneStore store_;
  MemoryBanks banks_;
  std::vector<ToolId> eligible_;
  std::vector<TaskEmbedding> embeddings_;
  std::vector<int> buckets_;
  std::vector<double> ppo_baselines_;
  std::vector<bool> ppo_has_baseline_;
  std::vector<std::optional<std::int64_t>> discovery_;
  std::vector<std::string> metric_lines_;
  std::vector<double> grad_buf_;

  bool warmed_ = false;
  int epochs_done_ = 0;
  std::int64_t global_step_ = 0;
  std::uint64_t rollout_counter_ = 0;
  std::uint64_t policy_version_ = 0;
  std::uint64_t pheromone_version_ = 0;
};

}  // namespace phgpo
