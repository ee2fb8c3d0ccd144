#include "phgpo/environment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "phgpo/rng.hpp"

namespace phgpo {

std::vector<Episode> resolve_episodes(const ToolGraph& g,
                                      const std::vector<RawEpisode>& raw) {
  std::vector<Episode> out;
  out.reserve(raw.size());
  for (const auto& r : raw) {
    Episode ep;
    ep.task_id = r.task_id;
    ep.text = r.text;
    for (std::size_t t = 0; t < r.reference.size(); ++t) {
      const auto& step = r.reference[t];
      if (!g.has_tool(step.tool))
        throw std::invalid_argument("resolve_episodes: task '" + r.task_id +
                                    "' step " + std::to_string(t) +
                                    " references unknown tool '" + step.tool + "'");
      ToolId id = g.id_of(step.tool);
      int k = g.invocation_index(id, step.arg);
      if (k < 0)
        throw std::invalid_argument("resolve_episodes: task '" + r.task_id +
                                    "' step " + std::to_string(t) +
                                    " references unknown invocation '" +
                                    step.arg + "' of tool '" + step.tool + "'");
      ep.reference.push_back(Action{id, k});
    }
    out.push_back(std::move(ep));
  }
  return out;
}

const SimResult* SimCache::find(std::uint64_t key) const {
  auto it = map_.find(key);
  if (it == map_.end()) {
    ++misses_;
    return nullptr;
  }
  ++hits_;
  return &it->second;
}

void SimCache::insert(std::uint64_t key, const SimResult& r) {
  map_.emplace(key, r);
}

nlohmann::json SimCache::to_json() const {
  std::vector<std::uint64_t> keys;
  keys.reserve(map_.size());
  for (const auto& [k, v] : map_) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  nlohmann::json j = nlohmann::json::object();
  for (auto k : keys) {
    const SimResult& r = map_.at(k);
    j[std::to_string(k)] = {{"output", r.output},
                            {"is_error", r.is_error},
                            {"is_complete", r.is_complete}};
  }
  return j;
}

SimCache SimCache::from_json(const nlohmann::json& j) {
  SimCache c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    SimResult r;
    r.output = it.value().at("output").get<std::string>();
    r.is_error = it.value().at("is_error").get<bool>();
    r.is_complete = it.value().at("is_complete").get<bool>();
    c.map_.emplace(std::stoull(it.key()), r);
  }
  return c;
}

std::uint64_t sim_content_hash(const ToolGraph& g, const Action& action,
                               const Episode& episode,
                               const std::vector<Action>& history,
                               const SimulatorConfig& cfg) {
  std::string content;
  content += g.name_of(action.tool);
  content += '\x1f';
  content += g.invocations(action.tool).at(action.pattern);
  content += '\x1f';
  content += episode.task_id;
  content += '\x1f';
  std::size_t window = static_cast<std::size_t>(std::max(0, cfg.history_window));
  std::size_t start = history.size() > window ? history.size() - window : 0;
  for (std::size_t i = start; i < history.size(); ++i) {
    content += g.name_of(history[i].tool);
    content += ':';
    content += std::to_string(history[i].pattern);
    content += ';';
  }
  return mix64(cfg.seed, fnv1a64(content));
}

std::string compose_raw_output(const ToolGraph& g, const Action& action,
                               bool is_error, bool is_complete,
                               std::uint64_t content_hash) {
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(content_hash));
  std::string out;
  if (is_error) {
    out = "ERROR " + g.name_of(action.tool) + " " +
          g.invocations(action.tool).at(action.pattern) + " #" + hex;
  } else {
    out = "OK " + g.name_of(action.tool) + " " +
          g.invocations(action.tool).at(action.pattern) + " #" + hex;
  }
  if (is_complete) {
    out += '\n';
    out += kEndMarker;
  }
  return out;
}

std::pair<std::string, bool> strip_completion_marker(const std::string& raw) {
  const std::string marker = kEndMarker;
  if (raw == marker) return {std::string(), true};
  std::string suffix = "\n" + marker;
  if (raw.size() >= suffix.size() &&
      raw.compare(raw.size() - suffix.size(), suffix.size(), suffix) == 0)
    return {raw.substr(0, raw.size() - suffix.size()), true};
  return {raw, false};
}

SimResult simulate(const ToolGraph& g, const Action& action,
                   const Episode& episode, const std::vector<Action>& history,
                   const SimulatorConfig& cfg, SimCache* cache) {
  if (action.tool < 0 || action.tool >= g.n_tools())
    throw std::out_of_range("simulate: tool id out of range");
  if (action.pattern < 0 || action.pattern >= g.invocation_count(action.tool))
    throw std::out_of_range("simulate: invocation pattern out of range");

  std::uint64_t h = sim_content_hash(g, action, episode, history, cfg);
  if (cache != nullptr && cfg.cache_enabled) {
    if (const SimResult* hit = cache->find(h)) return *hit;
  }

  double u = static_cast<double>(mix64(h, 0x5e41f7u) >> 11) * 0x1.0p-53;
  bool is_error = u < cfg.error_rate;

  bool is_complete = false;
  if (history.size() + 1 == episode.reference.size()) {
    is_complete = action == episode.reference.back();
    for (std::size_t i = 0; is_complete && i < history.size(); ++i)
      is_complete = history[i] == episode.reference[i];
  }

  std::string raw = compose_raw_output(g, action, is_error, is_complete, h);
  auto [clean, marked] = strip_completion_marker(raw);
  SimResult r{std::move(clean), is_error, marked};
  if (cache != nullptr && cfg.cache_enabled) cache->insert(h, r);
  return r;
}

nlohmann::json SynthConfig::to_json() const {
  return {{"n_tools", n_tools},
          {"n_categories", n_categories},
          {"patterns_per_tool", patterns_per_tool},
          {"out_degree", out_degree},
          {"n_episodes", n_episodes},
          {"n_families", n_families},
          {"min_len", min_len},
          {"max_len", max_len},
          {"seed", seed}};
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
  SynthConfig c;
  c.n_tools = j.value("n_tools", c.n_tools);
  c.n_categories = j.value("n_categories", c.n_categories);
  c.patterns_per_tool = j.value("patterns_per_tool", c.patterns_per_tool);
  c.out_degree = j.value("out_degree", c.out_degree);
  c.n_episodes = j.value("n_episodes", c.n_episodes);
  c.n_families = j.value("n_families", c.n_families);
  c.min_len = j.value("min_len", c.min_len);
  c.max_len = j.value("max_len", c.max_len);
  c.seed = j.value("seed", c.seed);
  return c;
}

std::vector<RawEpisode> generate_synthetic(const SynthConfig& cfg) {
  if (cfg.n_tools < 2 || cfg.n_categories < 1 || cfg.patterns_per_tool < 1 ||
      cfg.n_episodes < 1 || cfg.min_len < 1 || cfg.max_len < cfg.min_len ||
      cfg.out_degree < 1 || cfg.out_degree >= cfg.n_tools)
    throw std::invalid_argument("generate_synthetic: bad config");

  static const char* kCategoryPool[] = {"net",  "file", "data", "calc",
                                        "sys",  "msg",  "img",  "db"};
  constexpr int kPoolSize = 8;

  std::vector<std::string> cats(cfg.n_categories);
  for (int c = 0; c < cfg.n_categories; ++c)
    cats[c] = c < kPoolSize ? kCategoryPool[c] : "cat" + std::to_string(c);

  std::vector<std::string> names(cfg.n_tools);
  std::vector<std::string> tool_cat(cfg.n_tools);
  for (int i = 0; i < cfg.n_tools; ++i) {
    tool_cat[i] = cats[i % cfg.n_categories];
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d", i);
    names[i] = tool_cat[i] + "_t" + buf;
  }

  // Fixed walk substrate: each tool fans out to out_degree distinct others.
  auto rng = make_rng(stream_seed(cfg.seed, "synth"));
  std::vector<std::vector<int>> succ(cfg.n_tools);
  for (int i = 0; i < cfg.n_tools; ++i) {
    std::set<int> s;
    while (static_cast<int>(s.size()) < cfg.out_degree) {
      int j = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(cfg.n_tools)));
      if (j != i) s.insert(j);
    }
    succ[i].assign(s.begin(), s.end());
  }

  // Recurring workflows: episodes are drawn from a pool of family chains, so
  // related tasks share a reference and embed close while their task ids and
  // filler tokens stay distinct.
  int n_families = std::max(1, std::min(cfg.n_families, cfg.n_episodes));
  std::vector<std::vector<RawStep>> family_steps(static_cast<std::size_t>(n_families));
  for (auto& steps : family_steps) {
    int len = cfg.min_len +
              static_cast<int>(uniform_index(
                  rng, static_cast<std::size_t>(cfg.max_len - cfg.min_len + 1)));
    int cur = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(cfg.n_tools)));
    for (int t = 0; t < len; ++t) {
      int k = static_cast<int>(
          uniform_index(rng, static_cast<std::size_t>(cfg.patterns_per_tool)));
      steps.push_back(RawStep{names[cur], names[cur] + "#p" + std::to_string(k)});
      cur = succ[cur][uniform_index(rng, succ[cur].size())];
    }
  }

  std::unordered_map<std::string, std::string> cat_of;
  for (int i = 0; i < cfg.n_tools; ++i)
    cat_of[names[static_cast<std::size_t>(i)]] = tool_cat[static_cast<std::size_t>(i)];

  std::vector<RawEpisode> episodes(static_cast<std::size_t>(cfg.n_episodes));
  for (int e = 0; e < cfg.n_episodes; ++e) {
    RawEpisode& ep = episodes[static_cast<std::size_t>(e)];
    ep.task_id = "synth-" + std::to_string(e);
    ep.reference = family_steps[static_cast<std::size_t>(e % n_families)];
    std::string text = "task use";
    for (const auto& step : ep.reference) {
      ep.categories[step.tool] = cat_of.at(step.tool);
      text += " " + step.tool;
    }
    text += " done job" + std::to_string(e);
    ep.text = std::move(text);
  }
  return episodes;
}

nlohmann::json raw_episode_to_json(const RawEpisode& ep) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : ep.reference)
    steps.push_back({{"tool", s.tool}, {"arg", s.arg}});
  nlohmann::json cats = nlohmann::json::object();
  for (const auto& [tool, cat] : ep.categories) cats[tool] = cat;
  return {{"task_id", ep.task_id},
          {"text", ep.text},
          {"reference", std::move(steps)},
          {"category", std::move(cats)}};
}

RawEpisode raw_episode_from_json(const nlohmann::json& j) {
  RawEpisode ep;
  ep.task_id = j.at("task_id").get<std::string>();
  ep.text = j.at("text").get<std::string>();
  for (const auto& s : j.at("reference"))
    ep.reference.push_back(
        RawStep{s.at("tool").get<std::string>(), s.at("arg").get<std::string>()});
  if (j.contains("category"))
    for (auto it = j.at("category").begin(); it != j.at("category").end(); ++it)
      ep.categories[it.key()] = it.value().get<std::string>();
  return ep;
}

std::vector<RawEpisode> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_corpus: cannot open '" + path + "'");
  std::vector<RawEpisode> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(raw_episode_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("load_corpus: " + path + ":" +
                               std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void save_corpus(const std::string& path, const std::vector<RawEpisode>& eps) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_corpus: cannot open '" + path + "'");
  for (const auto& ep : eps) out << raw_episode_to_json(ep).dump() << '\n';
}

SplitIndices split_corpus(int n_episodes, double train_ratio, double val_ratio,
                          double test_ratio, std::uint64_t seed) {
  if (n_episodes <= 0)
    throw std::invalid_argument("split_corpus: need at least one episode");
  if (train_ratio < 0 || val_ratio < 0 || test_ratio < 0 ||
      std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9)
    throw std::invalid_argument("split_corpus: ratios must be >= 0 and sum to 1");

  std::vector<int> idx(static_cast<std::size_t>(n_episodes));
  std::iota(idx.begin(), idx.end(), 0);
  auto rng = make_rng(stream_seed(seed, "split"));
  shuffle_inplace(idx, rng);

  int n_train = static_cast<int>(std::llround(train_ratio * n_episodes));
  int n_val = static_cast<int>(std::llround(val_ratio * n_episodes));
  n_train = std::min(n_train, n_episodes);
  n_val = std::min(n_val, n_episodes - n_train);

  SplitIndices s;
  s.train.assign(idx.begin(), idx.begin() + n_train);
  s.val.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
  s.test.assign(idx.begin() + n_train + n_val, idx.end());
  return s;
}

}  // namespace phgpo
