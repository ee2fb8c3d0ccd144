#include "phgpo/tool_graph.hpp"

#include <stdexcept>

namespace phgpo {

namespace {

// Fallback when the corpus does not name a category: tool name prefix up to
// the first underscore, or the whole name.
std::string default_category(const std::string& tool_name) {
  auto pos = tool_name.find('_');
  if (pos == std::string::npos || pos == 0) return tool_name;
  return tool_name.substr(0, pos);
}

}  // namespace

ToolId ToolGraph::id_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw std::invalid_argument("ToolGraph: unknown tool '" + name + "'");
  return it->second;
}

int ToolGraph::invocation_index(ToolId t, const std::string& pattern) const {
  check_tool(t);
  const auto& set = invocation_sets_[t];
  for (std::size_t k = 0; k < set.size(); ++k)
    if (set[k] == pattern) return static_cast<int>(k);
  return -1;
}

bool ToolGraph::has_edge(ToolId from, ToolId to) const {
  check_tool(from);
  check_tool(to);
  return succ_[from].count(to) > 0;
}

bool ToolGraph::add_edge(ToolId from, ToolId to) {
  check_tool(from);
  check_tool(to);
  auto [it, inserted] = succ_[from].insert(to);
  (void)it;
  if (inserted) ++n_edges_;
  return inserted;
}

std::vector<ToolId> ToolGraph::successors(ToolId from) const {
  check_tool(from);
  return {succ_[from].begin(), succ_[from].end()};
}

std::vector<std::pair<ToolId, ToolId>> ToolGraph::edges() const {
  std::vector<std::pair<ToolId, ToolId>> out;
  out.reserve(static_cast<std::size_t>(n_edges_));
  for (ToolId i = 0; i < n_tools(); ++i)
    for (ToolId j : succ_[i]) out.emplace_back(i, j);
  return out;
}

ToolId ToolGraph::intern_tool(const std::string& name) {
  auto it = index_.find(name);
  if (it != index_.end()) return it->second;
  ToolId id = static_cast<ToolId>(names_.size());
  names_.push_back(name);
  index_.emplace(name, id);
  invocation_sets_.emplace_back();
  categories_.emplace_back();
  succ_.emplace_back();
  return id;
}

int ToolGraph::intern_invocation(ToolId t, const std::string& pattern) {
  int k = invocation_index(t, pattern);
  if (k >= 0) return k;
  invocation_sets_[t].push_back(pattern);
  return static_cast<int>(invocation_sets_[t].size()) - 1;
}

void ToolGraph::check_tool(ToolId t) const {
  if (t < 0 || t >= n_tools())
    throw std::out_of_range("ToolGraph: tool id out of range");
}

ToolGraph ToolGraph::build(const std::vector<RawEpisode>& episodes) {
  if (episodes.empty())
    throw std::invalid_argument("ToolGraph::build: empty corpus");

  ToolGraph g;
  ToolId start = g.intern_tool(kStartToolName);
  g.intern_invocation(start, "noop");
  g.categories_[start] = "system";

  for (const auto& ep : episodes) {
    if (ep.reference.empty())
      throw std::invalid_argument("ToolGraph::build: episode '" + ep.task_id +
                                  "' has an empty reference trajectory");
    ToolId prev = start;
    for (const auto& step : ep.reference) {
      ToolId t = g.intern_tool(step.tool);
      g.intern_invocation(t, step.arg);
      g.add_edge(prev, t);
      prev = t;
    }
    for (const auto& [tool, cat] : ep.categories) {
      ToolId t = g.intern_tool(tool);
      if (g.categories_[t].empty()) g.categories_[t] = cat;
    }
  }

  for (ToolId t = 0; t < g.n_tools(); ++t)
    if (g.categories_[t].empty()) g.categories_[t] = default_category(g.names_[t]);
  return g;
}

nlohmann::json ToolGraph::to_json() const {
  nlohmann::json j;
  j["tools"] = names_;
  j["categories"] = categories_;
  j["invocation_sets"] = invocation_sets_;
  nlohmann::json edges = nlohmann::json::array();
  for (auto [a, b] : this->edges()) edges.push_back({a, b});
  j["edges"] = std::move(edges);
  return j;
}

ToolGraph ToolGraph::from_json(const nlohmann::json& j) {
  ToolGraph g;
  g.names_ = j.at("tools").get<std::vector<std::string>>();
  g.categories_ = j.at("categories").get<std::vector<std::string>>();
  g.invocation_sets_ = j.at("invocation_sets").get<std::vector<std::vector<std::string>>>();
  if (g.names_.size() != g.categories_.size() ||
      g.names_.size() != g.invocation_sets_.size())
    throw std::runtime_error("ToolGraph::from_json: inconsistent array sizes");
  for (std::size_t i = 0; i < g.names_.size(); ++i)
    g.index_.emplace(g.names_[i], static_cast<ToolId>(i));
  g.succ_.resize(g.names_.size());
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2)
      throw std::runtime_error("ToolGraph::from_json: malformed edge entry");
    g.add_edge(e[0].get<ToolId>(), e[1].get<ToolId>());
  }
  return g;
}

}  // namespace phgpo
