#include "phgpo/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

namespace phgpo {

nlohmann::json RunState::to_json() const {
  nlohmann::json j;
  j["version"] = version;
  j["config_hash"] = config_hash;
  j["warmed"] = warmed;
  j["epochs_done"] = epochs_done;
  j["global_step"] = global_step;
  j["rollout_counter"] = rollout_counter;
  j["policy"] = policy;
  j["store"] = store;
  j["banks"] = banks;
  j["graph"] = graph;
  j["ppo_baselines"] = ppo_baselines;
  j["ppo_has_baseline"] = ppo_has_baseline;
  nlohmann::json disc = nlohmann::json::array();
  for (const auto& d : discovery) {
    if (d.has_value())
      disc.push_back(*d);
    else
      disc.push_back(nullptr);
  }
  j["discovery"] = std::move(disc);
  j["metric_lines"] = metric_lines;
  return j;
}

RunState RunState::from_json(const nlohmann::json& j) {
  RunState s;
  s.version = j.at("version").get<int>();
  if (s.version != 1)
    throw std::runtime_error("RunState: unsupported checkpoint version " +
                             std::to_string(s.version));
  s.config_hash = j.at("config_hash").get<std::uint64_t>();
  s.warmed = j.at("warmed").get<bool>();
  s.epochs_done = j.at("epochs_done").get<int>();
  s.global_step = j.at("global_step").get<std::int64_t>();
  s.rollout_counter = j.at("rollout_counter").get<std::uint64_t>();
  s.policy = j.at("policy");
  s.store = j.at("store");
  s.banks = j.at("banks");
  s.graph = j.at("graph");
  s.ppo_baselines = j.at("ppo_baselines").get<std::vector<double>>();
  s.ppo_has_baseline = j.at("ppo_has_baseline").get<std::vector<bool>>();
  for (const auto& d : j.at("discovery")) {
    if (d.is_null())
      s.discovery.emplace_back(std::nullopt);
    else
      s.discovery.emplace_back(d.get<std::int64_t>());
  }
  s.metric_lines = j.at("metric_lines").get<std::vector<std::string>>();
  return s;
}

void save_run_state(const std::string& path, const RunState& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_run_state: cannot open '" + path + "'");
  out << s.to_json().dump() << '\n';
}

RunState load_run_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_run_state: cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return RunState::from_json(j);
}

}  // namespace phgpo
