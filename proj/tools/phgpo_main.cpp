// Command-line front end: corpus synthesis, training (with resume), split
// evaluation, ablation sweeps and pheromone heatmap export.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phgpo/config.hpp"
#include "phgpo/rng.hpp"

namespace {

using namespace phgpo;

RunConfig config_for(const std::string& path, std::uint64_t seed_flag,
                     bool seed_set) {
  RunConfig cfg = path.empty() ? RunConfig{} : load_run_config(path);
  if (seed_set) cfg.seed = seed_flag;
  apply_env_seed(cfg);  // PHGPO_SEED wins over file and flag
  return cfg;
}

// Reconstructs the trained state of a finished run directory.
struct LoadedRun {
  RunConfig cfg;
  ToolGraph graph;
  LinearPolicy policy;
  PheromoneStore store;
  MemoryBanks banks;
  std::vector<Episode> train, val, test;
};

LoadedRun load_run(const std::string& run_dir) {
  LoadedRun r;
  r.cfg = load_run_config(run_dir + "/config.json");
  resolve_seeds(r.cfg);
  RunState st = load_run_state(run_dir + "/run_checkpoint.json");
  r.graph = ToolGraph::from_json(st.graph);
  r.policy = LinearPolicy::from_json(st.policy);
  r.store = PheromoneStore::from_json(st.store);
  r.banks = MemoryBanks::from_json(st.banks);

  std::vector<RawEpisode> raw = r.cfg.corpus_path.empty()
                                    ? generate_synthetic(r.cfg.synth)
                                    : load_corpus(r.cfg.corpus_path);
  // The stored graph may hold transitions discovered during training; resolve
  // against a fresh build so episode ids match either way.
  std::vector<Episode> all = resolve_episodes(r.graph, raw);
  SplitIndices split = split_corpus(
      static_cast<int>(all.size()), r.cfg.train_ratio, r.cfg.val_ratio,
      r.cfg.test_ratio, stream_seed(r.cfg.seed, "split"));
  auto take = [&](const std::vector<int>& idx) {
    std::vector<Episode> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(all.at(static_cast<std::size_t>(i)));
    return out;
  };
  r.train = take(split.train);
  r.val = take(split.val);
  r.test = take(split.test);
  return r;
}

EvalOptions final_eval_options(const RunConfig& cfg) {
  ScheduleState sched = schedule_at(cfg.trainer, cfg.trainer.total_epochs() - 1);
  EvalOptions o;
  o.sampler = cfg.sampler;
  o.sampler.beta = cfg.trainer.pheromone_enabled ? sched.beta : 0.0;
  o.w = sched.w;
  o.use_pheromone = cfg.trainer.pheromone_enabled;
  o.embedding_dim = cfg.embedding_dim;
  o.simulator = cfg.simulator;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pheromone-guided tool-use policy trainer"};
  app.require_subcommand(1);

  std::string config_path, out_path, run_dir, split_name = "test";
  std::string variant, task_text, matrix_path, edges_path;
  std::vector<std::string> subset, chain;
  std::uint64_t seed_flag = 0;
  bool resume = false;

  auto* synth = app.add_subcommand("synth", "write a synthetic corpus as jsonl");
  synth->add_option("-c,--config", config_path, "run config json");
  synth->add_option("-o,--out", out_path, "output corpus path")->required();
  auto* synth_seed = synth->add_option("--seed", seed_flag, "master seed");

  auto* train = app.add_subcommand("train", "train and write run artifacts");
  train->add_option("-c,--config", config_path, "run config json");
  train->add_option("-o,--out", out_path, "output directory")->required();
  auto* train_seed = train->add_option("--seed", seed_flag, "master seed");
  train->add_flag("--resume", resume, "continue from run_checkpoint.json");

  auto* eval = app.add_subcommand("eval", "greedy evaluation of a finished run");
  eval->add_option("-r,--run", run_dir, "run directory")->required();
  eval->add_option("--split", split_name, "train | val | test")
      ->check(CLI::IsMember({"train", "val", "test"}));

  auto* ablate = app.add_subcommand("ablate", "train one named config variant");
  ablate->add_option("-c,--config", config_path, "base run config json");
  ablate->add_option("-o,--out", out_path, "output directory")->required();
  ablate->add_option("--variant", variant, "variant name")->required();
  auto* ablate_seed = ablate->add_option("--seed", seed_flag, "master seed");

  auto* exp = app.add_subcommand("export", "fused pheromone heatmap csv");
  exp->add_option("-r,--run", run_dir, "run directory")->required();
  exp->add_option("--task", task_text, "task text to condition on")->required();
  exp->add_option("--tools", subset, "tool names for the matrix")->required();
  exp->add_option("--chain", chain, "tool names flagged as the target chain");
  exp->add_option("--matrix", matrix_path, "matrix csv path")->required();
  exp->add_option("--edges", edges_path, "edge table csv path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      RunConfig cfg = config_for(config_path, seed_flag, !synth_seed->empty());
      resolve_seeds(cfg);
      save_corpus(out_path, generate_synthetic(cfg.synth));
      std::cout << "wrote " << cfg.synth.n_episodes << " episodes to "
                << out_path << "\n";
    } else if (train->parsed()) {
      RunConfig cfg = config_for(config_path, seed_flag, !train_seed->empty());
      RunArtifacts art = run_training(cfg, out_path, resume);
      std::cout << "run complete: " << art.out_dir << "\n"
                << "test match_ratio " << art.test_report.match_ratio_mean
                << ", completion " << art.test_report.completion_rate << "\n";
    } else if (eval->parsed()) {
      LoadedRun r = load_run(run_dir);
      const std::vector<Episode>& eps =
          split_name == "train" ? r.train : split_name == "val" ? r.val : r.test;
      EvalReport rep = evaluate(r.policy, r.graph, r.store, r.banks, eps,
                                final_eval_options(r.cfg));
      std::cout << rep.to_json().dump(2) << "\n";
    } else if (ablate->parsed()) {
      RunConfig cfg = config_for(config_path, seed_flag, !ablate_seed->empty());
      apply_variant(cfg, variant);
      std::string dir = out_path + "/" + variant;
      RunArtifacts art = run_training(cfg, dir, false);
      std::cout << variant << ": test match_ratio "
                << art.test_report.match_ratio_mean << ", completion "
                << art.test_report.completion_rate << " (" << dir << ")\n";
    } else if (exp->parsed()) {
      LoadedRun r = load_run(run_dir);
      ScheduleState sched =
          schedule_at(r.cfg.trainer, r.cfg.trainer.total_epochs() - 1);
      export_heatmap(r.store, r.banks, r.graph, task_text, subset, chain,
                     sched.w, r.cfg.embedding_dim, matrix_path, edges_path);
      std::cout << "wrote " << matrix_path << " and " << edges_path << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
