#include "phgpo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <stdexcept>

#include "phgpo/embedding.hpp"
#include "phgpo/rng.hpp"

namespace phgpo {

std::string advantage_mode_name(AdvantageMode m) {
  switch (m) {
    case AdvantageMode::kGRPO: return "grpo";
    case AdvantageMode::kPPO: return "ppo";
    case AdvantageMode::kRLOO: return "rloo";
  }
  throw std::logic_error("advantage_mode_name: bad mode");
}

AdvantageMode advantage_mode_from(const std::string& name) {
  if (name == "grpo") return AdvantageMode::kGRPO;
  if (name == "ppo") return AdvantageMode::kPPO;
  if (name == "rloo") return AdvantageMode::kRLOO;
  throw std::invalid_argument("unknown advantage mode '" + name + "'");
}

void TrainerConfig::validate() const {
  if (group_size < 1) throw std::invalid_argument("TrainerConfig: group_size >= 1");
  if (advantage_mode == AdvantageMode::kRLOO && group_size < 2)
    throw std::invalid_argument("TrainerConfig: rloo needs group_size >= 2");
  if (clip_eps < 0.0) throw std::invalid_argument("TrainerConfig: clip_eps >= 0");
  if (adv_eps <= 0.0) throw std::invalid_argument("TrainerConfig: adv_eps > 0");
  if (ppo_baseline_decay < 0.0 || ppo_baseline_decay >= 1.0)
    throw std::invalid_argument("TrainerConfig: ppo_baseline_decay in [0,1)");
  if (elite_gate < 0.0 || elite_gate > 1.0 || q_gate < 0.0 || q_gate > 1.0)
    throw std::invalid_argument("TrainerConfig: gates must be in [0,1]");
  if (sl_lr <= 0.0 || pg_lr <= 0.0)
    throw std::invalid_argument("TrainerConfig: learning rates must be > 0");
  if (warmup_epochs < 0 || epochs_per_stage < 1 || final_epochs < 0)
    throw std::invalid_argument("TrainerConfig: bad epoch counts");
  if (stage_horizons.empty())
    throw std::invalid_argument("TrainerConfig: need at least one stage");
  for (std::size_t i = 0; i < stage_horizons.size(); ++i) {
    if (stage_horizons[i] < 1)
      throw std::invalid_argument("TrainerConfig: horizons must be >= 1");
    if (i > 0 && stage_horizons[i] < stage_horizons[i - 1])
      throw std::invalid_argument("TrainerConfig: horizons must be nondecreasing");
  }
  if (p_tf_start < 0.0 || p_tf_start > 1.0 || p_tf_final < 0.0 ||
      p_tf_final > p_tf_start)
    throw std::invalid_argument("TrainerConfig: need 0 <= p_tf_final <= p_tf_start <= 1");
  if (lambda_start < 0.0 || lambda_start > 1.0)
    throw std::invalid_argument("TrainerConfig: lambda_start in [0,1]");
  if (beta_max < 0.0 || beta_fixed < 0.0)
    throw std::invalid_argument("TrainerConfig: beta values must be >= 0");
  if (beta_ramp_fraction <= 0.0 || beta_ramp_fraction > 1.0)
    throw std::invalid_argument("TrainerConfig: beta_ramp_fraction in (0,1]");
  if (w_max < 0.0 || w_max > 1.0)
    throw std::invalid_argument("TrainerConfig: w_max in [0,1]");
  if (checkpoint_every < 0 || n_threads < 1)
    throw std::invalid_argument("TrainerConfig: bad checkpoint/thread counts");
}

nlohmann::json TrainerConfig::to_json() const {
  return {{"group_size", group_size},
          {"clip_eps", clip_eps},
          {"entropy_coef", entropy_coef},
          {"adv_eps", adv_eps},
          {"advantage_mode", advantage_mode_name(advantage_mode)},
          {"ppo_baseline_decay", ppo_baseline_decay},
          {"elite_gate", elite_gate},
          {"q_gate", q_gate},
          {"sl_lr", sl_lr},
          {"pg_lr", pg_lr},
          {"warmup_epochs", warmup_epochs},
          {"stage_horizons", stage_horizons},
          {"epochs_per_stage", epochs_per_stage},
          {"final_epochs", final_epochs},
          {"p_tf_start", p_tf_start},
          {"p_tf_final", p_tf_final},
          {"lambda_start", lambda_start},
          {"beta_max", beta_max},
          {"beta_mode", beta_mode == BetaMode::kDynamic ? "dynamic" : "fixed"},
          {"beta_fixed", beta_fixed},
          {"beta_ramp_fraction", beta_ramp_fraction},
          {"w_max", w_max},
          {"pheromone_enabled", pheromone_enabled},
          {"pheromone_updates", pheromone_updates},
          {"evaporate_final_phase", evaporate_final_phase},
          {"freeze_after_curriculum", freeze_after_curriculum},
          {"complete_bonus", complete_bonus},
          {"partial_coef", partial_coef},
          {"checkpoint_every", checkpoint_every},
          {"n_threads", n_threads},
          {"seed", seed}};
}

TrainerConfig TrainerConfig::from_json(const nlohmann::json& j) {
  TrainerConfig c;
  c.group_size = j.value("group_size", c.group_size);
  c.clip_eps = j.value("clip_eps", c.clip_eps);
  c.entropy_coef = j.value("entropy_coef", c.entropy_coef);
  c.adv_eps = j.value("adv_eps", c.adv_eps);
  if (j.contains("advantage_mode"))
    c.advantage_mode = advantage_mode_from(j.at("advantage_mode").get<std::string>());
  c.ppo_baseline_decay = j.value("ppo_baseline_decay", c.ppo_baseline_decay);
  c.elite_gate = j.value("elite_gate", c.elite_gate);
  c.q_gate = j.value("q_gate", c.q_gate);
  c.sl_lr = j.value("sl_lr", c.sl_lr);
  c.pg_lr = j.value("pg_lr", c.pg_lr);
  c.warmup_epochs = j.value("warmup_epochs", c.warmup_epochs);
  c.stage_horizons = j.value("stage_horizons", c.stage_horizons);
  c.epochs_per_stage = j.value("epochs_per_stage", c.epochs_per_stage);
  c.final_epochs = j.value("final_epochs", c.final_epochs);
  c.p_tf_start = j.value("p_tf_start", c.p_tf_start);
  c.p_tf_final = j.value("p_tf_final", c.p_tf_final);
  c.lambda_start = j.value("lambda_start", c.lambda_start);
  c.beta_max = j.value("beta_max", c.beta_max);
  if (j.contains("beta_mode")) {
    std::string m = j.at("beta_mode").get<std::string>();
    if (m == "dynamic")
      c.beta_mode = BetaMode::kDynamic;
    else if (m == "fixed")
      c.beta_mode = BetaMode::kFixed;
    else
      throw std::invalid_argument("unknown beta_mode '" + m + "'");
  }
  c.beta_fixed = j.value("beta_fixed", c.beta_fixed);
  c.beta_ramp_fraction = j.value("beta_ramp_fraction", c.beta_ramp_fraction);
  c.w_max = j.value("w_max", c.w_max);
  c.pheromone_enabled = j.value("pheromone_enabled", c.pheromone_enabled);
  c.pheromone_updates = j.value("pheromone_updates", c.pheromone_updates);
  c.evaporate_final_phase = j.value("evaporate_final_phase", c.evaporate_final_phase);
  c.freeze_after_curriculum = j.value("freeze_after_curriculum", c.freeze_after_curriculum);
  c.complete_bonus = j.value("complete_bonus", c.complete_bonus);
  c.partial_coef = j.value("partial_coef", c.partial_coef);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.n_threads = j.value("n_threads", c.n_threads);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

ScheduleState schedule_at(const TrainerConfig& cfg, int epoch) {
  cfg.validate();
  int curr = cfg.curriculum_epochs();
  int total = cfg.total_epochs();
  if (epoch < 0 || epoch >= total)
    throw std::out_of_range("schedule_at: epoch out of range");

  ScheduleState s;
  s.epoch = epoch;
  if (epoch < curr) {
    int stage_idx = epoch / cfg.epochs_per_stage;
    s.stage = stage_idx + 1;
    s.horizon = cfg.stage_horizons[static_cast<std::size_t>(stage_idx)];
    double f = curr <= 1 ? 1.0
                         : static_cast<double>(epoch) / static_cast<double>(curr - 1);
    s.p_tf = cfg.p_tf_start - f * (cfg.p_tf_start - cfg.p_tf_final);
    s.lambda = cfg.lambda_start * (1.0 - f);
  } else {
    s.stage = cfg.n_stages() + 1;
    s.horizon = cfg.stage_horizons.back();
    s.p_tf = 0.0;
    s.lambda = 0.0;
  }

  int ramp = std::max(1, static_cast<int>(std::llround(cfg.beta_ramp_fraction * total)));
  double g = ramp <= 1 ? 1.0
                       : std::min(1.0, static_cast<double>(epoch) /
                                           static_cast<double>(ramp - 1));
  s.beta = cfg.beta_mode == BetaMode::kFixed ? cfg.beta_fixed : cfg.beta_max * g;
  s.w = cfg.w_max * g;
  return s;
}

std::vector<double> compute_advantages(const std::vector<double>& returns,
                                       AdvantageMode mode, double eps,
                                       std::optional<double> ppo_baseline) {
  if (returns.empty())
    throw std::invalid_argument("compute_advantages: empty group");
  std::size_t n = returns.size();
  std::vector<double> adv(n);
  switch (mode) {
    case AdvantageMode::kGRPO: {
      double mean = std::accumulate(returns.begin(), returns.end(), 0.0) /
                    static_cast<double>(n);
      double var = 0.0;
      for (double r : returns) var += (r - mean) * (r - mean);
      var /= static_cast<double>(n);  // population variance
      double denom = std::sqrt(var) + eps;
      for (std::size_t i = 0; i < n; ++i) adv[i] = (returns[i] - mean) / denom;
      break;
    }
    case AdvantageMode::kPPO: {
      if (!ppo_baseline.has_value())
        throw std::invalid_argument("compute_advantages: ppo needs a baseline");
      for (std::size_t i = 0; i < n; ++i) adv[i] = returns[i] - *ppo_baseline;
      break;
    }
    case AdvantageMode::kRLOO: {
      if (n < 2)
        throw std::invalid_argument("compute_advantages: rloo needs >= 2 rollouts");
      double sum = std::accumulate(returns.begin(), returns.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i)
        adv[i] = returns[i] - (sum - returns[i]) / static_cast<double>(n - 1);
      break;
    }
  }
  return adv;
}

std::string EpochRecord::to_json_line() const {
  nlohmann::json j{{"epoch", epoch},
                   {"stage", stage},
                   {"avg_return", avg_return},
                   {"match_ratio", match_ratio},
                   {"tool_acc", tool_acc},
                   {"diversity", diversity},
                   {"edge_count", edge_count},
                   {"p_tf", p_tf},
                   {"beta", beta},
                   {"lambda", lambda},
                   {"w", w}};
  return j.dump();
}

namespace {

void advance_state(State& s, ToolId executed) {
  s.prev_tool = s.last_tool;
  s.last_tool = executed;
}

}  // namespace

Trainer::Trainer(ToolGraph graph, std::vector<Episode> train_episodes,
                 std::vector<Episode> val_episodes, TrainerConfig cfg,
                 PheromoneParams pheromone_params, SamplerConfig sampler_base,
                 SimulatorConfig sim_cfg, int n_buckets, int embedding_dim)
    : graph_(std::move(graph)),
      train_(std::move(train_episodes)),
      val_(std::move(val_episodes)),
      cfg_(cfg),
      sampler_base_(sampler_base),
      sim_cfg_(sim_cfg),
      embedding_dim_(embedding_dim),
      policy_(graph_.n_tools(), n_buckets),
      store_(pheromone_params) {
  cfg_.validate();
  sampler_base_.validate();
  if (train_.empty()) throw std::invalid_argument("Trainer: no training episodes");
  if (embedding_dim_ < 1) throw std::invalid_argument("Trainer: embedding_dim >= 1");
  store_.init_from_graph(graph_);
  eligible_ = selectable_tools(graph_);
  embeddings_.reserve(train_.size());
  buckets_.reserve(train_.size());
  for (const auto& ep : train_) {
    embeddings_.push_back(encode(ep.text, embedding_dim_));
    buckets_.push_back(text_bucket(ep.text, n_buckets));
  }
  ppo_baselines_.assign(train_.size(), 0.0);
  ppo_has_baseline_.assign(train_.size(), false);
  discovery_.assign(train_.size(), std::nullopt);
  grad_buf_.assign(policy_.weight_count(), 0.0);
}

const TaskEmbedding& Trainer::embedding_of(int episode_index) {
  return embeddings_.at(static_cast<std::size_t>(episode_index));
}

std::vector<double> Trainer::run_warmup() {
  std::vector<double> losses;
  for (int e = 0; e < cfg_.warmup_epochs; ++e) {
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t idx = 0; idx < train_.size(); ++idx) {
      State s{buckets_[idx], kStartTool, kStartTool};
      for (const auto& ref : train_[idx].reference) {
        std::fill(grad_buf_.begin(), grad_buf_.end(), 0.0);
        total += accumulate_sl_grad(policy_, s, ref.tool, 1.0, grad_buf_);
        apply_update(policy_, grad_buf_, cfg_.sl_lr);
        ++count;
        advance_state(s, ref.tool);
      }
    }
    losses.push_back(count > 0 ? total / static_cast<double>(count) : 0.0);
  }
  warmed_ = true;
  ++policy_version_;
  return losses;
}

Rollout Trainer::roll_one(const Episode& ep, const TaskEmbedding& e_x,
                          int bucket, const ScheduleState& sched,
                          const FusedEvaluator& fe,
                          std::uint64_t rollout_id) const {
  (void)e_x;
  auto rng = make_rng(stream_seed(cfg_.seed, "rollout", rollout_id));

  SamplerConfig scfg = sampler_base_;
  scfg.beta = cfg_.pheromone_enabled ? sched.beta : 0.0;

  FusedToolFn tool_tau;
  FusedArgFn arg_tau;
  if (cfg_.pheromone_enabled) {
    tool_tau = [&fe](ToolId a, ToolId b) { return fe.tool(a, b); };
    arg_tau = [&fe](ToolId t, int k) { return fe.arg(t, k); };
  } else {
    double tau0 = store_.params().tau0;
    arg_tau = [tau0](ToolId, int) { return FusedPheromone{tau0, 0.0}; };
  }

  Rollout r;
  State s{bucket, kStartTool, kStartTool};
  const auto& ref = ep.reference;
  for (int t = 0; t < sched.horizon; ++t) {
    std::optional<Action> ref_action;
    if (static_cast<std::size_t>(t) < ref.size())
      ref_action = ref[static_cast<std::size_t>(t)];

    auto dist = guided_tool_distribution(policy_.logits(s), s.last_tool,
                                         eligible_, tool_tau, scfg);
    StepChoice choice = mixed_step(dist, ref_action, sched.p_tf, rng);
    if (!choice.teacher_forced)
      choice.pattern = arg_sample(graph_, choice.tool, arg_tau, rng);

    Action act{choice.tool, choice.pattern};
    SimResult sim = simulate(graph_, act, ep, r.actions, sim_cfg_);

    std::optional<ToolId> ref_tool;
    if (ref_action.has_value()) ref_tool = ref_action->tool;
    std::optional<ToolId> prev_ref;
    if (t == 0)
      prev_ref = kStartTool;  // both trajectories are anchored at START
    else if (static_cast<std::size_t>(t - 1) < ref.size())
      prev_ref = ref[static_cast<std::size_t>(t - 1)].tool;
    double intent = intent_reward(choice.tool, ref_tool, s.last_tool, prev_ref, graph_);
    double exec = exec_reward(sim);

    r.steps.push_back(RolloutStep{s, choice, ref_tool, sim, intent, exec});
    r.actions.push_back(act);
    advance_state(s, choice.tool);
    if (sim.is_complete) {
      r.completed = true;
      break;
    }
  }

  r.q = match_ratio(r.actions, ref);
  std::vector<bool> forced;
  forced.reserve(r.steps.size());
  for (const auto& st : r.steps) forced.push_back(st.choice.teacher_forced);
  r.q_model = model_quality(r.actions, forced, ref);
  r.outcome = outcome_bonus(r.completed, r.q, cfg_.complete_bonus, cfg_.partial_coef);
  std::vector<double> step_rewards;
  step_rewards.reserve(r.steps.size());
  for (const auto& st : r.steps) step_rewards.push_back(st.intent + st.exec);
  r.ret = episode_return(step_rewards, r.outcome);
  return r;
}

RolloutGroup Trainer::rollout_group(int episode_index, const ScheduleState& sched) {
  const Episode& ep = train_.at(static_cast<std::size_t>(episode_index));
  const TaskEmbedding& e_x = embedding_of(episode_index);
  int bucket = buckets_.at(static_cast<std::size_t>(episode_index));

  RolloutGroup g;
  g.policy_version = policy_version_;
  g.pheromone_version = pheromone_version_;

  std::vector<std::uint64_t> ids(static_cast<std::size_t>(cfg_.group_size));
  for (auto& id : ids) id = rollout_counter_++;

  g.rollouts.resize(ids.size());
  if (cfg_.n_threads > 1) {
    // Rollouts are independent given the frozen snapshot; each worker keeps
    // its own memoizer so results land in preassigned slots.
    std::size_t next = 0;
    while (next < ids.size()) {
      std::size_t batch = std::min<std::size_t>(
          static_cast<std::size_t>(cfg_.n_threads), ids.size() - next);
      std::vector<std::future<Rollout>> futs;
      futs.reserve(batch);
      for (std::size_t b = 0; b < batch; ++b) {
        std::uint64_t id = ids[next + b];
        futs.push_back(std::async(std::launch::async, [&, id] {
          FusedEvaluator own(store_, banks_, e_x, sched.w);
          return roll_one(ep, e_x, bucket, sched, own, id);
        }));
      }
      for (std::size_t b = 0; b < batch; ++b)
        g.rollouts[next + b] = futs[b].get();
      next += batch;
    }
  } else {
    FusedEvaluator fe(store_, banks_, e_x, sched.w);
    for (std::size_t m = 0; m < ids.size(); ++m)
      g.rollouts[m] = roll_one(ep, e_x, bucket, sched, fe, ids[m]);
  }
  return g;
}

std::vector<double> Trainer::group_advantages(const RolloutGroup& group,
                                              int episode_index) {
  std::vector<double> returns;
  returns.reserve(group.rollouts.size());
  for (const auto& r : group.rollouts) returns.push_back(r.ret);

  if (cfg_.advantage_mode != AdvantageMode::kPPO)
    return compute_advantages(returns, cfg_.advantage_mode, cfg_.adv_eps);

  std::size_t idx = static_cast<std::size_t>(episode_index);
  double mean = std::accumulate(returns.begin(), returns.end(), 0.0) /
                static_cast<double>(returns.size());
  if (!ppo_has_baseline_[idx]) {
    ppo_baselines_[idx] = mean;  // first visit: centered advantages
    ppo_has_baseline_[idx] = true;
  }
  auto adv = compute_advantages(returns, AdvantageMode::kPPO, cfg_.adv_eps,
                                ppo_baselines_[idx]);
  ppo_baselines_[idx] = cfg_.ppo_baseline_decay * ppo_baselines_[idx] +
                        (1.0 - cfg_.ppo_baseline_decay) * mean;
  return adv;
}

void Trainer::update_policy(const RolloutGroup& group,
                            const std::vector<double>& advantages,
                            const ScheduleState& sched) {
  if (advantages.size() != group.rollouts.size())
    throw std::invalid_argument("update_policy: advantage count mismatch");
  if (group.policy_version != policy_version_)
    throw std::logic_error("update_policy: stale rollout group");

  std::size_t n_steps = 0, n_sl = 0;
  for (const auto& r : group.rollouts) {
    n_steps += r.steps.size();
    for (const auto& st : r.steps)
      if (st.ref_tool.has_value()) ++n_sl;
  }
  if (n_steps == 0) return;

  double lam = sched.lambda;
  double gamma = cfg_.entropy_coef;
  std::fill(grad_buf_.begin(), grad_buf_.end(), 0.0);
  for (std::size_t m = 0; m < group.rollouts.size(); ++m) {
    for (const auto& st : group.rollouts[m].steps) {
      if (lam > 0.0 && st.ref_tool.has_value())
        accumulate_sl_grad(policy_, st.state, *st.ref_tool,
                           lam / static_cast<double>(n_sl), grad_buf_);
      if (lam < 1.0 && advantages[m] != 0.0)
        accumulate_pg_grad(policy_, st.state, st.choice.tool,
                           st.choice.policy_logprob_old, advantages[m],
                           cfg_.clip_eps,
                           (1.0 - lam) / static_cast<double>(n_steps), grad_buf_);
      if (gamma != 0.0)  // entropy is a bonus: gradient enters negated
        accumulate_entropy_grad(policy_, st.state,
                                -gamma / static_cast<double>(n_steps), grad_buf_);
    }
  }
  apply_update(policy_, grad_buf_, cfg_.pg_lr);
  ++policy_version_;
}

bool Trainer::updates_active(const ScheduleState& sched) const {
  if (!cfg_.pheromone_enabled || !cfg_.pheromone_updates) return false;
  if (cfg_.freeze_after_curriculum && sched.stage > cfg_.n_stages()) return false;
  return true;
}

void Trainer::update_pheromone(const RolloutGroup& group, int episode_index,
                               const ScheduleState& sched) {
  if (!updates_active(sched)) return;
  if (group.pheromone_version != pheromone_version_)
    throw std::logic_error("update_pheromone: stale rollout group");

  // Transitions discovered by any rollout join the graph at tau0.
  for (const auto& r : group.rollouts) {
    ToolId prev = kStartTool;
    for (const auto& act : r.actions) {
      if (graph_.add_edge(prev, act.tool)) store_.ensure_tool(prev, act.tool);
      prev = act.tool;
    }
  }

  // Elite replay: verified successes deposit only after teacher forcing has
  // decayed below the gate.
  if (sched.p_tf < cfg_.elite_gate) {
    const TaskEmbedding& e_x = embedding_of(episode_index);
    for (const auto& r : group.rollouts)
      if (r.completed || r.q >= cfg_.q_gate)
        record_success(store_, banks_, r.actions, e_x, r.q);
  }
  ++pheromone_version_;
}

EvalOptions Trainer::eval_options(const ScheduleState& sched) const {
  EvalOptions o;
  o.sampler = sampler_base_;
  o.sampler.beta = cfg_.pheromone_enabled ? sched.beta : 0.0;
  o.w = sched.w;
  o.use_pheromone = cfg_.pheromone_enabled;
  o.embedding_dim = embedding_dim_;
  o.simulator = sim_cfg_;
  return o;
}

void Trainer::run_epoch(int epoch) {
  ScheduleState sched = schedule_at(cfg_, epoch);
  bool final_phase = sched.stage > cfg_.n_stages();
  if (final_phase && !cfg_.evaporate_final_phase)
    store_.set_rho(0.0);  // accumulation-only ablation

  double ret_sum = 0.0, q_sum = 0.0;
  std::size_t n_rollouts = 0;
  for (std::size_t idx = 0; idx < train_.size(); ++idx) {
    auto group = rollout_group(static_cast<int>(idx), sched);
    auto adv = group_advantages(group, static_cast<int>(idx));
    update_policy(group, adv, sched);
    update_pheromone(group, static_cast<int>(idx), sched);
    ++global_step_;
    if (!discovery_[idx].has_value()) {
      // discovery means the policy succeeded without any forced step
      for (const auto& r : group.rollouts) {
        bool assisted = false;
        for (const auto& s : r.steps) assisted = assisted || s.choice.teacher_forced;
        if (!assisted && (r.completed || r.q >= cfg_.q_gate)) {
          discovery_[idx] = global_step_;
          break;
        }
      }
    }
    for (const auto& r : group.rollouts) {
      ret_sum += r.ret;
      q_sum += r.q;
      ++n_rollouts;
    }
  }

  if (updates_active(sched)) store_.evaporate_epoch();

  const std::vector<Episode>& eval_split = val_.empty() ? train_ : val_;
  EvalOptions opts = eval_options(sched);
  EpochRecord rec;
  rec.epoch = epoch;
  rec.stage = sched.stage;
  rec.avg_return = ret_sum / static_cast<double>(n_rollouts);
  rec.match_ratio = q_sum / static_cast<double>(n_rollouts);
  rec.tool_acc =
      eval_next_tool_accuracy(policy_, graph_, store_, banks_, eval_split, opts);
  rec.diversity =
      exploration_diversity(policy_, graph_, store_, banks_, eval_split, opts);
  rec.edge_count = store_.deposited_tool_edge_count();
  rec.p_tf = sched.p_tf;
  rec.beta = sched.beta;
  rec.lambda = sched.lambda;
  rec.w = sched.w;
  metric_lines_.push_back(rec.to_json_line());
  epochs_done_ = epoch + 1;
}

void Trainer::run(const std::function<void(const Trainer&, int)>& after_epoch) {
  if (!warmed_) run_warmup();
  for (int e = epochs_done_; e < cfg_.total_epochs(); ++e) {
    run_epoch(e);
    if (after_epoch) after_epoch(*this, e);
  }
}

std::vector<DiscoveryRecord> Trainer::discovery_records() const {
  std::vector<DiscoveryRecord> out;
  out.reserve(train_.size());
  for (std::size_t i = 0; i < train_.size(); ++i)
    out.push_back(DiscoveryRecord{train_[i].task_id, discovery_[i]});
  return out;
}

RunState Trainer::capture(std::uint64_t config_hash) const {
  RunState s;
  s.config_hash = config_hash;
  s.warmed = warmed_;
  s.epochs_done = epochs_done_;
  s.global_step = global_step_;
  s.rollout_counter = rollout_counter_;
  s.policy = policy_.to_json();
  s.store = store_.to_json();
  s.banks = banks_.to_json();
  s.graph = graph_.to_json();
  s.ppo_baselines = ppo_baselines_;
  s.ppo_has_baseline.assign(ppo_has_baseline_.begin(), ppo_has_baseline_.end());
  s.discovery = discovery_;
  s.metric_lines = metric_lines_;
  return s;
}

void Trainer::restore(const RunState& s) {
  if (s.ppo_baselines.size() != train_.size() ||
      s.discovery.size() != train_.size())
    throw std::runtime_error("Trainer::restore: checkpoint episode count mismatch");
  policy_ = LinearPolicy::from_json(s.policy);
  if (policy_.n_tools() != graph_.n_tools())
    throw std::runtime_error("Trainer::restore: policy/graph tool count mismatch");
  store_ = PheromoneStore::from_json(s.store);
  banks_ = MemoryBanks::from_json(s.banks);
  graph_ = ToolGraph::from_json(s.graph);
  eligible_ = selectable_tools(graph_);
  ppo_baselines_ = s.ppo_baselines;
  ppo_has_baseline_.assign(s.ppo_has_baseline.begin(), s.ppo_has_baseline.end());
  discovery_ = s.discovery;
  metric_lines_ = s.metric_lines;
  warmed_ = s.warmed;
  epochs_done_ = s.epochs_done;
  global_step_ = s.global_step;
  rollout_counter_ = s.rollout_counter;
  grad_buf_.assign(policy_.weight_count(), 0.0);
}

}  // namespace phgpo
