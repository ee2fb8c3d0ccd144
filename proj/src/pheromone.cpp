#include "phgpo/pheromone.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace phgpo {

void PheromoneParams::validate() const {
  if (rho < 0.0 || rho > 1.0)
    throw std::invalid_argument("PheromoneParams: rho must be in [0,1]");
  if (alpha < 0.0)
    throw std::invalid_argument("PheromoneParams: alpha must be >= 0");
  if (!(tau_min > 0.0) || !(tau_min <= tau0) || !(tau0 <= tau_max))
    throw std::invalid_argument(
        "PheromoneParams: need 0 < tau_min <= tau0 <= tau_max");
  if (n_min <= 0)
    throw std::invalid_argument("PheromoneParams: n_min must be positive");
  if (epsilon <= 0.0)
    throw std::invalid_argument("PheromoneParams: epsilon must be positive");
  if (bank_cap <= 0)
    throw std::invalid_argument("PheromoneParams: bank_cap must be positive");
}

nlohmann::json PheromoneParams::to_json() const {
  return {{"rho", rho},           {"alpha", alpha},
          {"tau_min", tau_min},   {"tau0", tau0},
          {"tau_max", tau_max},   {"theta_sim", theta_sim},
          {"n_min", n_min},       {"epsilon", epsilon},
          {"bank_cap", bank_cap}};
}

PheromoneParams PheromoneParams::from_json(const nlohmann::json& j) {
  PheromoneParams p;
  p.rho = j.at("rho").get<double>();
  p.alpha = j.at("alpha").get<double>();
  p.tau_min = j.at("tau_min").get<double>();
  p.tau0 = j.at("tau0").get<double>();
  p.tau_max = j.at("tau_max").get<double>();
  p.theta_sim = j.at("theta_sim").get<double>();
  p.n_min = j.at("n_min").get<int>();
  p.epsilon = j.at("epsilon").get<double>();
  p.bank_cap = j.at("bank_cap").get<int>();
  p.validate();
  return p;
}

void MemoryBank::append(TaskEmbedding e, double quality, int cap) {
  if (cap <= 0) throw std::invalid_argument("MemoryBank: cap must be positive");
  entries_.push_back(BankEntry{std::move(e), quality});
  if (entries_.size() > static_cast<std::size_t>(cap))
    entries_.erase(entries_.begin(),
                   entries_.begin() + (entries_.size() - static_cast<std::size_t>(cap)));
}

void PheromoneStore::init_from_graph(const ToolGraph& g) {
  for (auto [a, b] : g.edges()) tool_.emplace(edge_key(a, b), params_.tau0);
  for (ToolId t = 0; t < g.n_tools(); ++t)
    for (int k = 0; k < g.invocation_count(t); ++k)
      arg_.emplace(edge_key(t, k), params_.tau0);
}

double PheromoneStore::tool_value(ToolId from, ToolId to) const {
  auto it = tool_.find(edge_key(from, to));
  return it == tool_.end() ? params_.tau0 : it->second;
}

double PheromoneStore::arg_value(ToolId tool, int pattern) const {
  auto it = arg_.find(edge_key(tool, pattern));
  return it == arg_.end() ? params_.tau0 : it->second;
}

void PheromoneStore::ensure_tool(ToolId from, ToolId to) {
  tool_.try_emplace(edge_key(from, to), params_.tau0);
}

void PheromoneStore::ensure_arg(ToolId tool, int pattern) {
  arg_.try_emplace(edge_key(tool, pattern), params_.tau0);
}

void PheromoneStore::set_rho(double rho) {
  if (rho < 0.0 || rho > 1.0)
    throw std::invalid_argument("set_rho: rho must be in [0,1]");
  params_.rho = rho;
}

double PheromoneStore::deposit_into(std::unordered_map<std::uint64_t, double>& m,
                                    std::unordered_set<std::uint64_t>& touched,
                                    std::uint64_t key, double quality) {
  if (quality < 0.0 || quality > 1.0)
    throw std::invalid_argument("deposit: quality must be in [0,1]");
  auto [it, inserted] = m.try_emplace(key, params_.tau0);
  (void)inserted;
  it->second = params_.clip((1.0 - params_.rho) * it->second + params_.alpha * quality);
  touched.insert(key);
  return it->second;
}

double PheromoneStore::deposit_tool(ToolId from, ToolId to, double quality) {
  std::uint64_t key = edge_key(from, to);
  deposited_tool_.insert(key);
  return deposit_into(tool_, touched_tool_, key, quality);
}

double PheromoneStore::deposit_arg(ToolId tool, int pattern, double quality) {
  return deposit_into(arg_, touched_arg_, edge_key(tool, pattern), quality);
}

void PheromoneStore::evaporate_all() {
  for (auto& [k, v] : tool_) v = params_.clip((1.0 - params_.rho) * v);
  for (auto& [k, v] : arg_) v = params_.clip((1.0 - params_.rho) * v);
}

void PheromoneStore::evaporate_epoch() {
  for (auto& [k, v] : tool_)
    if (!touched_tool_.count(k)) v = params_.clip((1.0 - params_.rho) * v);
  for (auto& [k, v] : arg_)
    if (!touched_arg_.count(k)) v = params_.clip((1.0 - params_.rho) * v);
  touched_tool_.clear();
  touched_arg_.clear();
}

namespace {

nlohmann::json entries_sorted(const std::unordered_map<std::uint64_t, double>& m) {
  std::vector<std::uint64_t> keys;
  keys.reserve(m.size());
  for (const auto& [k, v] : m) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  nlohmann::json out = nlohmann::json::array();
  for (auto k : keys) {
    int a = static_cast<int>(k >> 32);
    int b = static_cast<int>(k & 0xffffffffULL);
    out.push_back({a, b, m.at(k)});
  }
  return out;
}

void entries_load(const nlohmann::json& j,
                  std::unordered_map<std::uint64_t, double>& m) {
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 3)
      throw std::runtime_error("PheromoneStore: malformed edge entry");
    m[edge_key(e[0].get<int>(), e[1].get<int>())] = e[2].get<double>();
  }
}

}  // namespace

namespace {

nlohmann::json keys_sorted(const std::unordered_set<std::uint64_t>& set) {
  std::vector<std::uint64_t> keys(set.begin(), set.end());
  std::sort(keys.begin(), keys.end());
  nlohmann::json out = nlohmann::json::array();
  for (auto k : keys)
    out.push_back({static_cast<int>(k >> 32), static_cast<int>(k & 0xffffffffULL)});
  return out;
}

void keys_load(const nlohmann::json& j, std::unordered_set<std::uint64_t>& set) {
  for (const auto& e : j) set.insert(edge_key(e[0].get<int>(), e[1].get<int>()));
}

}  // namespace

nlohmann::json PheromoneStore::to_json() const {
  nlohmann::json j;
  j["params"] = params_.to_json();
  j["tool_pheromone"] = entries_sorted(tool_);
  j["arg_pheromone"] = entries_sorted(arg_);
  j["deposited_tool_edges"] = keys_sorted(deposited_tool_);
  j["touched_tool_edges"] = keys_sorted(touched_tool_);
  j["touched_arg_edges"] = keys_sorted(touched_arg_);
  return j;
}

PheromoneStore PheromoneStore::from_json(const nlohmann::json& j) {
  PheromoneStore s(PheromoneParams::from_json(j.at("params")));
  entries_load(j.at("tool_pheromone"), s.tool_);
  entries_load(j.at("arg_pheromone"), s.arg_);
  keys_load(j.at("deposited_tool_edges"), s.deposited_tool_);
  keys_load(j.at("touched_tool_edges"), s.touched_tool_);
  keys_load(j.at("touched_arg_edges"), s.touched_arg_);
  return s;
}

const MemoryBank* MemoryBanks::tool_bank(ToolId from, ToolId to) const {
  auto it = tool_.find(edge_key(from, to));
  return it == tool_.end() ? nullptr : &it->second;
}

const MemoryBank* MemoryBanks::arg_bank(ToolId tool, int pattern) const {
  auto it = arg_.find(edge_key(tool, pattern));
  return it == arg_.end() ? nullptr : &it->second;
}

void MemoryBanks::append_tool(ToolId from, ToolId to, const TaskEmbedding& e,
                              double q, int cap) {
  tool_[edge_key(from, to)].append(e, q, cap);
}

void MemoryBanks::append_arg(ToolId tool, int pattern, const TaskEmbedding& e,
                             double q, int cap) {
  arg_[edge_key(tool, pattern)].append(e, q, cap);
}

std::size_t MemoryBanks::total_entries() const {
  std::size_t n = 0;
  for (const auto& [k, b] : tool_) n += b.size();
  for (const auto& [k, b] : arg_) n += b.size();
  return n;
}

namespace {

nlohmann::json banks_sorted(const std::unordered_map<std::uint64_t, MemoryBank>& m) {
  std::vector<std::uint64_t> keys;
  keys.reserve(m.size());
  for (const auto& [k, v] : m) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  nlohmann::json out = nlohmann::json::object();
  for (auto k : keys) {
    std::string name = std::to_string(static_cast<int>(k >> 32)) + "," +
                       std::to_string(static_cast<int>(k & 0xffffffffULL));
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : m.at(k).entries()) {
      nlohmann::json row = nlohmann::json::array();
      for (double v : e.embedding.values) row.push_back(v);
      row.push_back(e.quality);
      entries.push_back(std::move(row));
    }
    out[name] = std::move(entries);
  }
  return out;
}

void banks_load(const nlohmann::json& j,
                std::unordered_map<std::uint64_t, MemoryBank>& m, int cap) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    auto comma = key.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("MemoryBanks: malformed bank key '" + key + "'");
    int a = std::stoi(key.substr(0, comma));
    int b = std::stoi(key.substr(comma + 1));
    MemoryBank& bank = m[edge_key(a, b)];
    for (const auto& row : it.value()) {
      if (!row.is_array() || row.size() < 2)
        throw std::runtime_error("MemoryBanks: malformed bank entry");
      BankEntry e;
      e.embedding.values.assign(row.begin(), row.end() - 1);
      e.quality = row.back().get<double>();
      bank.append(std::move(e.embedding), e.quality, cap);
    }
  }
}

}  // namespace

nlohmann::json MemoryBanks::to_json() const {
  nlohmann::json j;
  j["tool_banks"] = banks_sorted(tool_);
  j["arg_banks"] = banks_sorted(arg_);
  return j;
}

MemoryBanks MemoryBanks::from_json(const nlohmann::json& j) {
  MemoryBanks b;
  // Serialized banks already respect the cap; load with a cap large enough to
  // keep them intact.
  int cap = std::numeric_limits<int>::max();
  banks_load(j.at("tool_banks"), b.tool_, cap);
  banks_load(j.at("arg_banks"), b.arg_, cap);
  return b;
}

std::vector<RetrievedEntry> retrieve(const MemoryBank* bank,
                                     const TaskEmbedding& e_x,
                                     const PheromoneParams& p) {
  std::vector<RetrievedEntry> out;
  if (bank == nullptr) return out;
  for (const auto& entry : bank->entries()) {
    double sim = cosine(entry.embedding, e_x);
    if (sim >= p.theta_sim) out.push_back(RetrievedEntry{sim, entry.quality});
  }
  return out;
}

double task_dependent_value(const std::vector<RetrievedEntry>& retrieved,
                            const PheromoneParams& p) {
  if (retrieved.empty()) return p.tau0;
  double num = 0.0, den = 0.0;
  for (const auto& r : retrieved) {
    num += r.similarity * r.quality;
    den += r.similarity;
  }
  return p.tau0 + num / (den + p.epsilon) * (p.tau_max - p.tau0);
}

double retrieval_confidence(const std::vector<RetrievedEntry>& retrieved,
                            const PheromoneParams& p) {
  if (retrieved.empty()) return 0.0;
  double s_max = 0.0, q_sum = 0.0;
  for (const auto& r : retrieved) {
    s_max = std::max(s_max, r.similarity);
    q_sum += r.quality;
  }
  double n_term = std::min(1.0, static_cast<double>(retrieved.size()) /
                                    static_cast<double>(p.n_min));
  return n_term * s_max * (q_sum / static_cast<double>(retrieved.size()));
}

FusedPheromone fuse(double tau_agn, double tau_dep, double confidence,
                    double w, const PheromoneParams& p) {
  if (w < 0.0 || w > 1.0)
    throw std::invalid_argument("fuse: w must be in [0,1]");
  double wc = w * confidence;
  return FusedPheromone{p.clip((1.0 - wc) * tau_agn + wc * tau_dep), confidence};
}

FusedPheromone fused_tool_value(const PheromoneStore& store,
                                const MemoryBanks& banks, ToolId from,
                                ToolId to, const TaskEmbedding& e_x, double w) {
  const auto& p = store.params();
  auto retrieved = retrieve(banks.tool_bank(from, to), e_x, p);
  return fuse(store.tool_value(from, to), task_dependent_value(retrieved, p),
              retrieval_confidence(retrieved, p), w, p);
}

FusedPheromone fused_arg_value(const PheromoneStore& store,
                               const MemoryBanks& banks, ToolId tool,
                               int pattern, const TaskEmbedding& e_x, double w) {
  const auto& p = store.params();
  auto retrieved = retrieve(banks.arg_bank(tool, pattern), e_x, p);
  return fuse(store.arg_value(tool, pattern), task_dependent_value(retrieved, p),
              retrieval_confidence(retrieved, p), w, p);
}

FusedPheromone FusedEvaluator::tool(ToolId from, ToolId to) const {
  std::uint64_t key = edge_key(from, to);
  auto it = tool_cache_.find(key);
  if (it != tool_cache_.end()) return it->second;
  FusedPheromone f = fused_tool_value(store_, banks_, from, to, e_x_, w_);
  tool_cache_.emplace(key, f);
  return f;
}

FusedPheromone FusedEvaluator::arg(ToolId tool, int pattern) const {
  std::uint64_t key = edge_key(tool, pattern);
  auto it = arg_cache_.find(key);
  if (it != arg_cache_.end()) return it->second;
  FusedPheromone f = fused_arg_value(store_, banks_, tool, pattern, e_x_, w_);
  arg_cache_.emplace(key, f);
  return f;
}

void record_success(PheromoneStore& store, MemoryBanks& banks,
                    const std::vector<Action>& trajectory,
                    const TaskEmbedding& e_x, double quality) {
  int cap = store.params().bank_cap;
  ToolId prev = kStartTool;
  for (const auto& act : trajectory) {
    store.deposit_tool(prev, act.tool, quality);
    banks.append_tool(prev, act.tool, e_x, quality, cap);
    store.deposit_arg(act.tool, act.pattern, quality);
    banks.append_arg(act.tool, act.pattern, e_x, quality, cap);
    prev = act.tool;
  }
}

}  // namespace phgpo
