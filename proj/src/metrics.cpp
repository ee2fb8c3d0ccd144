#include "phgpo/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "phgpo/embedding.hpp"
#include "phgpo/rewards.hpp"

namespace phgpo {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<ToolId> selectable_tools(const ToolGraph& g) {
  std::vector<ToolId> out;
  out.reserve(static_cast<std::size_t>(g.n_tools()) - 1);
  for (ToolId t = 0; t < g.n_tools(); ++t)
    if (t != kStartTool) out.push_back(t);
  return out;
}

namespace {

GuidedDistribution state_distribution(const LinearPolicy& policy,
                                      const std::vector<ToolId>& eligible,
                                      const FusedEvaluator* fe,
                                      const State& state,
                                      const EvalOptions& opts) {
  FusedToolFn tau;
  if (fe != nullptr && opts.sampler.beta != 0.0)
    tau = [fe](ToolId a, ToolId b) { return fe->tool(a, b); };
  return guided_tool_distribution(policy.logits(state), state.last_tool,
                                  eligible, tau, opts.sampler);
}

void advance_state(State& s, ToolId executed) {
  s.prev_tool = s.last_tool;
  s.last_tool = executed;
}

}  // namespace

double eval_next_tool_accuracy(const LinearPolicy& policy, const ToolGraph& g,
                               const PheromoneStore& store,
                               const MemoryBanks& banks,
                               const std::vector<Episode>& episodes,
                               const EvalOptions& opts) {
  if (episodes.empty())
    throw std::invalid_argument("eval_next_tool_accuracy: no episodes");
  auto eligible = selectable_tools(g);
  std::size_t total = 0, hits = 0;
  for (const auto& ep : episodes) {
    TaskEmbedding e_x = encode(ep.text, opts.embedding_dim);
    FusedEvaluator fe(store, banks, e_x, opts.w);
    const FusedEvaluator* fep = opts.use_pheromone ? &fe : nullptr;
    State state{text_bucket(ep.text, policy.n_buckets()), kStartTool, kStartTool};
    for (const auto& ref : ep.reference) {
      auto dist = state_distribution(policy, eligible, fep, state, opts);
      if (dist.argmax() == ref.tool) ++hits;
      ++total;
      advance_state(state, ref.tool);
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

double exploration_diversity(const LinearPolicy& policy, const ToolGraph& g,
                             const PheromoneStore& store,
                             const MemoryBanks& banks,
                             const std::vector<Episode>& episodes,
                             const EvalOptions& opts) {
  if (episodes.empty())
    throw std::invalid_argument("exploration_diversity: no episodes");
  auto eligible = selectable_tools(g);
  double log_n = std::log(static_cast<double>(eligible.size()));
  if (log_n <= 0.0)
    throw std::invalid_argument("exploration_diversity: need >= 2 selectable tools");
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& ep : episodes) {
    TaskEmbedding e_x = encode(ep.text, opts.embedding_dim);
    FusedEvaluator fe(store, banks, e_x, opts.w);
    const FusedEvaluator* fep = opts.use_pheromone ? &fe : nullptr;
    State state{text_bucket(ep.text, policy.n_buckets()), kStartTool, kStartTool};
    for (const auto& ref : ep.reference) {
      auto dist = state_distribution(policy, eligible, fep, state, opts);
      double h = 0.0;
      for (double p : dist.probs)
        if (p > 0.0) h -= p * std::log(p);
      sum += h / log_n;
      ++count;
      advance_state(state, ref.tool);
    }
  }
  return sum / static_cast<double>(count);
}

EpisodeEval greedy_rollout_eval(const LinearPolicy& policy, const ToolGraph& g,
                                const PheromoneStore& store,
                                const MemoryBanks& banks, const Episode& ep,
                                const EvalOptions& opts) {
  TaskEmbedding e_x = encode(ep.text, opts.embedding_dim);
  FusedEvaluator fe(store, banks, e_x, opts.w);
  const FusedEvaluator* fep = opts.use_pheromone ? &fe : nullptr;
  auto eligible = selectable_tools(g);

  EpisodeEval out;
  out.task_id = ep.task_id;
  State state{text_bucket(ep.text, policy.n_buckets()), kStartTool, kStartTool};
  std::vector<Action> executed;
  std::mt19937_64 unused_rng(0);  // argmax paths never draw
  for (std::size_t t = 0; t < ep.reference.size(); ++t) {
    auto dist = state_distribution(policy, eligible, fep, state, opts);
    Action act;
    act.tool = dist.argmax();
    FusedArgFn arg_tau;
    if (fep != nullptr) {
      arg_tau = [fep](ToolId tool, int k) { return fep->arg(tool, k); };
    } else {
      arg_tau = [&store](ToolId tool, int k) {
        return FusedPheromone{store.arg_value(tool, k), 0.0};
      };
    }
    act.pattern = arg_sample(g, act.tool, arg_tau, unused_rng, /*argmax=*/true);
    SimResult sim = simulate(g, act, ep, executed, opts.simulator);
    executed.push_back(act);
    if (sim.is_complete) {
      out.completed = true;
      break;
    }
    advance_state(state, act.tool);
  }
  out.match_ratio = match_ratio(executed, ep.reference);
  return out;
}

EvalReport evaluate(const LinearPolicy& policy, const ToolGraph& g,
                    const PheromoneStore& store, const MemoryBanks& banks,
                    const std::vector<Episode>& episodes,
                    const EvalOptions& opts) {
  if (episodes.empty()) throw std::invalid_argument("evaluate: empty split");
  EvalReport rep;
  rep.n_episodes = static_cast<int>(episodes.size());
  double completed = 0.0;
  for (const auto& ep : episodes) {
    rep.episodes.push_back(greedy_rollout_eval(policy, g, store, banks, ep, opts));
    rep.match_ratio_mean += rep.episodes.back().match_ratio;
    completed += rep.episodes.back().completed ? 1.0 : 0.0;
  }
  rep.match_ratio_mean /= static_cast<double>(episodes.size());
  rep.completion_rate = completed / static_cast<double>(episodes.size());
  rep.tool_accuracy = eval_next_tool_accuracy(policy, g, store, banks, episodes, opts);
  rep.diversity = exploration_diversity(policy, g, store, banks, episodes, opts);
  return rep;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json eps = nlohmann::json::array();
  for (const auto& e : episodes)
    eps.push_back({{"task_id", e.task_id},
                   {"match_ratio", e.match_ratio},
                   {"completed", e.completed}});
  return {{"n_episodes", n_episodes},
          {"match_ratio_mean", match_ratio_mean},
          {"completion_rate", completion_rate},
          {"tool_accuracy", tool_accuracy},
          {"diversity", diversity},
          {"episodes", std::move(eps)}};
}

double mean_first_success(const std::vector<DiscoveryRecord>& records,
                          std::int64_t censor_step) {
  if (records.empty())
    throw std::invalid_argument("mean_first_success: no records");
  double sum = 0.0;
  for (const auto& r : records)
    sum += static_cast<double>(r.first_success_step.value_or(censor_step));
  return sum / static_cast<double>(records.size());
}

void save_discovery_records(const std::string& path,
                            const std::vector<DiscoveryRecord>& records) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("save_discovery_records: cannot open '" + path + "'");
  for (const auto& r : records) {
    nlohmann::json j;
    j["task_id"] = r.task_id;
    if (r.first_success_step.has_value())
      j["first_success_step"] = *r.first_success_step;
    else
      j["first_success_step"] = nullptr;
    out << j.dump() << '\n';
  }
}

std::vector<DiscoveryRecord> load_discovery_records(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("load_discovery_records: cannot open '" + path + "'");
  std::vector<DiscoveryRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    DiscoveryRecord r;
    r.task_id = j.at("task_id").get<std::string>();
    if (!j.at("first_success_step").is_null())
      r.first_success_step = j.at("first_success_step").get<std::int64_t>();
    out.push_back(std::move(r));
  }
  return out;
}

void export_heatmap(const PheromoneStore& store, const MemoryBanks& banks,
                    const ToolGraph& g, const std::string& task_text,
                    const std::vector<std::string>& subset,
                    const std::vector<std::string>& chain, double w,
                    int embedding_dim, const std::string& matrix_path,
                    const std::string& edges_path) {
  if (subset.empty()) throw std::invalid_argument("export_heatmap: empty subset");
  std::vector<ToolId> ids;
  ids.reserve(subset.size());
  for (const auto& name : subset) ids.push_back(g.id_of(name));
  std::vector<ToolId> chain_ids;
  chain_ids.reserve(chain.size());
  for (const auto& name : chain) chain_ids.push_back(g.id_of(name));

  TaskEmbedding e_x = encode(task_text, embedding_dim);
  FusedEvaluator fe(store, banks, e_x, w);

  std::ofstream mat(matrix_path);
  if (!mat)
    throw std::runtime_error("export_heatmap: cannot open '" + matrix_path + "'");
  mat << "tool";
  for (const auto& name : subset) mat << ',' << name;
  mat << '\n';
  for (std::size_t i = 0; i < ids.size(); ++i) {
    mat << subset[i];
    for (std::size_t j = 0; j < ids.size(); ++j)
      mat << ',' << format_double(fe.tool(ids[i], ids[j]).value);
    mat << '\n';
  }

  auto on_chain = [&](ToolId a, ToolId b) {
    for (std::size_t k = 0; k + 1 < chain_ids.size(); ++k)
      if (chain_ids[k] == a && chain_ids[k + 1] == b) return true;
    return false;
  };

  std::ofstream edges(edges_path);
  if (!edges)
    throw std::runtime_error("export_heatmap: cannot open '" + edges_path + "'");
  edges << "from,to,value,on_chain\n";
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = 0; j < ids.size(); ++j) {
      if (i == j) continue;
      edges << subset[i] << ',' << subset[j] << ','
            << format_double(fe.tool(ids[i], ids[j]).value) << ','
            << (on_chain(ids[i], ids[j]) ? 1 : 0) << '\n';
    }
}

HeatmapData parse_heatmap_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("parse_heatmap_csv: cannot open '" + path + "'");
  HeatmapData data;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("parse_heatmap_csv: empty file");
  std::stringstream header(line);
  std::string cell;
  std::getline(header, cell, ',');  // corner label
  while (std::getline(header, cell, ',')) data.names.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::getline(row, cell, ',');  // row label
    std::vector<double> values;
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
    if (values.size() != data.names.size())
      throw std::runtime_error("parse_heatmap_csv: ragged row");
    data.values.push_back(std::move(values));
  }
  if (data.values.size() != data.names.size())
    throw std::runtime_error("parse_heatmap_csv: row count mismatch");
  return data;
}

}  // namespace phgpo
