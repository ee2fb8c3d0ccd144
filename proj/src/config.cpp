#include "phgpo/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "phgpo/checkpoint.hpp"
#include "phgpo/rng.hpp"

namespace phgpo {

namespace {

nlohmann::json sampler_to_json(const SamplerConfig& c) {
  return {{"top_k", c.top_k},
          {"temperature", c.temperature},
          {"epsilon_greedy", c.epsilon_greedy},
          {"beta", c.beta}};
}

SamplerConfig sampler_from_json(const nlohmann::json& j) {
  SamplerConfig c;
  c.top_k = j.value("top_k", c.top_k);
  c.temperature = j.value("temperature", c.temperature);
  c.epsilon_greedy = j.value("epsilon_greedy", c.epsilon_greedy);
  c.beta = j.value("beta", c.beta);
  c.validate();
  return c;
}

nlohmann::json simulator_to_json(const SimulatorConfig& c) {
  return {{"seed", c.seed},
          {"error_rate", c.error_rate},
          {"history_window", c.history_window},
          {"cache_enabled", c.cache_enabled}};
}

SimulatorConfig simulator_from_json(const nlohmann::json& j) {
  SimulatorConfig c;
  c.seed = j.value("seed", c.seed);
  c.error_rate = j.value("error_rate", c.error_rate);
  c.history_window = j.value("history_window", c.history_window);
  c.cache_enabled = j.value("cache_enabled", c.cache_enabled);
  if (c.error_rate < 0.0 || c.error_rate > 1.0)
    throw std::invalid_argument("simulator: error_rate in [0,1]");
  if (c.history_window < 0)
    throw std::invalid_argument("simulator: history_window >= 0");
  return c;
}

}  // namespace

void RunConfig::validate() const {
  if (train_ratio < 0.0 || val_ratio < 0.0 || test_ratio < 0.0 ||
      std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9)
    throw std::invalid_argument("RunConfig: split ratios must be >= 0 and sum to 1");
  if (embedding_dim < 1) throw std::invalid_argument("RunConfig: embedding_dim >= 1");
  if (n_buckets < 1) throw std::invalid_argument("RunConfig: n_buckets >= 1");
  pheromone.validate();
  sampler.validate();
  trainer.validate();
}

nlohmann::json RunConfig::to_json() const {
  return {{"seed", seed},
          {"corpus_path", corpus_path},
          {"synth", synth.to_json()},
          {"train_ratio", train_ratio},
          {"val_ratio", val_ratio},
          {"test_ratio", test_ratio},
          {"embedding_dim", embedding_dim},
          {"n_buckets", n_buckets},
          {"pheromone", pheromone.to_json()},
          {"sampler", sampler_to_json(sampler)},
          {"simulator", simulator_to_json(simulator)},
          {"trainer", trainer.to_json()}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  c.seed = j.value("seed", c.seed);
  c.corpus_path = j.value("corpus_path", c.corpus_path);
  if (j.contains("synth")) c.synth = SynthConfig::from_json(j.at("synth"));
  c.train_ratio = j.value("train_ratio", c.train_ratio);
  c.val_ratio = j.value("val_ratio", c.val_ratio);
  c.test_ratio = j.value("test_ratio", c.test_ratio);
  c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
  c.n_buckets = j.value("n_buckets", c.n_buckets);
  if (j.contains("pheromone"))
    c.pheromone = PheromoneParams::from_json(j.at("pheromone"));
  if (j.contains("sampler")) c.sampler = sampler_from_json(j.at("sampler"));
  if (j.contains("simulator"))
    c.simulator = simulator_from_json(j.at("simulator"));
  if (j.contains("trainer")) c.trainer = TrainerConfig::from_json(j.at("trainer"));
  c.validate();
  return c;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(to_json().dump()); }

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file '" + path + "'");
  nlohmann::json j;
  f >> j;
  return RunConfig::from_json(j);
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write config file '" + path + "'");
  f << cfg.to_json().dump(2) << '\n';
}

bool apply_env_seed(RunConfig& cfg) {
  const char* env = std::getenv("PHGPO_SEED");
  if (env == nullptr || *env == '\0') return false;
  std::uint64_t v = 0;
  const char* end = env + std::string_view(env).size();
  auto [ptr, ec] = std::from_chars(env, end, v);
  if (ec != std::errc() || ptr != end)
    throw std::invalid_argument("PHGPO_SEED must be an unsigned integer");
  cfg.seed = v;
  return true;
}

void resolve_seeds(RunConfig& cfg) {
  cfg.synth.seed = stream_seed(cfg.seed, "synth");
  cfg.simulator.seed = stream_seed(cfg.seed, "simulator");
  cfg.trainer.seed = cfg.seed;
}

const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names = {
      "baseline",      "no_pheromone",     "no_curriculum", "static_prior",
      "no_evaporation", "no_task_dependent", "beta_0",       "beta_1",
      "beta_5",        "beta_dynamic",     "grpo",          "ppo",
      "rloo"};
  return names;
}

void apply_variant(RunConfig& cfg, const std::string& variant) {
  TrainerConfig& t = cfg.trainer;
  if (variant == "baseline") {
    return;
  } else if (variant == "no_pheromone") {
    t.beta_mode = BetaMode::kFixed;
    t.beta_fixed = 0.0;
  } else if (variant == "no_curriculum") {
    // Single stage at the full horizon, same number of RL epochs, no teacher
    // forcing and no supervised mixing; the warm-up phase is kept.
    int epochs = t.curriculum_epochs();
    t.stage_horizons = {t.stage_horizons.back()};
    t.epochs_per_stage = epochs;
    t.p_tf_start = 0.0;
    t.p_tf_final = 0.0;
    t.lambda_start = 0.0;
  } else if (variant == "static_prior") {
    t.freeze_after_curriculum = true;
  } else if (variant == "no_evaporation") {
    t.evaporate_final_phase = false;
  } else if (variant == "no_task_dependent") {
    t.w_max = 0.0;
  } else if (variant == "beta_0") {
    t.beta_mode = BetaMode::kFixed;
    t.beta_fixed = 0.0;
  } else if (variant == "beta_1") {
    t.beta_mode = BetaMode::kFixed;
    t.beta_fixed = 1.0;
  } else if (variant == "beta_5") {
    t.beta_mode = BetaMode::kFixed;
    t.beta_fixed = 5.0;
  } else if (variant == "beta_dynamic") {
    t.beta_mode = BetaMode::kDynamic;
  } else if (variant == "grpo" || variant == "ppo" || variant == "rloo") {
    t.advantage_mode = advantage_mode_from(variant);
  } else {
    std::ostringstream msg;
    msg << "unknown variant '" << variant << "'; valid:";
    for (const auto& n : variant_names()) msg << ' ' << n;
    throw std::invalid_argument(msg.str());
  }
  t.validate();
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  for (const auto& l : lines) f << l << '\n';
}

std::vector<Episode> take(const std::vector<Episode>& all,
                          const std::vector<int>& idx) {
  std::vector<Episode> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(all.at(static_cast<std::size_t>(i)));
  return out;
}

}  // namespace

RunArtifacts run_training(const RunConfig& cfg_in, const std::string& out_dir,
                          bool resume) {
  RunConfig cfg = cfg_in;
  cfg.validate();
  resolve_seeds(cfg);
  const std::uint64_t hash = cfg.hash();

  std::filesystem::create_directories(out_dir);
  const std::string ckpt_path = out_dir + "/run_checkpoint.json";

  std::vector<RawEpisode> raw;
  if (cfg.corpus_path.empty()) {
    raw = generate_synthetic(cfg.synth);
    save_corpus(out_dir + "/corpus.jsonl", raw);
  } else {
    raw = load_corpus(cfg.corpus_path);
  }

  ToolGraph graph = ToolGraph::build(raw);
  std::vector<Episode> all = resolve_episodes(graph, raw);
  SplitIndices split =
      split_corpus(static_cast<int>(all.size()), cfg.train_ratio,
                   cfg.val_ratio, cfg.test_ratio, stream_seed(cfg.seed, "split"));
  std::vector<Episode> train = take(all, split.train);
  std::vector<Episode> val = take(all, split.val);
  std::vector<Episode> test = take(all, split.test);

  Trainer trainer(std::move(graph), std::move(train), val, cfg.trainer,
                  cfg.pheromone, cfg.sampler, cfg.simulator, cfg.n_buckets,
                  cfg.embedding_dim);

  if (resume && std::filesystem::exists(ckpt_path)) {
    RunState st = load_run_state(ckpt_path);
    if (st.config_hash != hash)
      throw std::runtime_error("resume: checkpoint was written by a different config");
    trainer.restore(st);
  }

  save_run_config(out_dir + "/config.json", cfg);

  const int total = cfg.trainer.total_epochs();
  const int every = cfg.trainer.checkpoint_every;
  trainer.run([&](const Trainer& t, int e) {
    write_lines(out_dir + "/metrics.jsonl", t.metric_lines());
    save_discovery_records(out_dir + "/discovery.jsonl", t.discovery_records());
    if ((every > 0 && (e + 1) % every == 0) || e + 1 == total)
      save_run_state(ckpt_path, t.capture(hash));
  });

  // Refresh everything once more so a resumed-at-completion run still leaves
  // a consistent artifact set.
  write_lines(out_dir + "/metrics.jsonl", trainer.metric_lines());
  save_discovery_records(out_dir + "/discovery.jsonl",
                         trainer.discovery_records());
  save_run_state(ckpt_path, trainer.capture(hash));
  write_text(out_dir + "/policy.json", trainer.policy().to_json().dump() + "\n");
  nlohmann::json pher{{"store", trainer.store().to_json()},
                      {"banks", trainer.banks().to_json()}};
  write_text(out_dir + "/pheromone.json", pher.dump() + "\n");
  write_text(out_dir + "/graph.json", trainer.graph().to_json().dump() + "\n");

  ScheduleState final_sched = schedule_at(cfg.trainer, total - 1);
  const std::vector<Episode>& eval_split =
      !test.empty() ? test : (!val.empty() ? val : trainer.train_episodes());
  EvalReport report =
      evaluate(trainer.policy(), trainer.graph(), trainer.store(),
               trainer.banks(), eval_split, trainer.eval_options(final_sched));
  write_text(out_dir + "/eval_report.json", report.to_json().dump(2) + "\n");

  return RunArtifacts{out_dir, report};
}

}  // namespace phgpo
