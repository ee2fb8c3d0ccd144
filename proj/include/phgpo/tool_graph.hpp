#pragma once

// Two-layer action space: base tools with directed transition edges, plus a
// per-tool set of argument invocation patterns. Tool 0 is always the
// synthetic START marker that anchors trajectories.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace phgpo {

using ToolId = int;
inline constexpr ToolId kStartTool = 0;
inline constexpr const char* kStartToolName = "<START>";

// One executed or reference action: a tool plus an invocation pattern index
// into that tool's invocation set.
struct Action {
  ToolId tool = -1;
  int pattern = -1;

  bool operator==(const Action& o) const {
    return tool == o.tool && pattern == o.pattern;
  }
};

// Raw corpus record as read from JSONL, before names are resolved to ids.
struct RawStep {
  std::string tool;
  std::string arg;
};

struct RawEpisode {
  std::string task_id;
  std::string text;
  std::vector<RawStep> reference;
  std::map<std::string, std::string> categories;  // tool name -> category
};

class ToolGraph {
 public:
  ToolGraph() = default;

  // Collects tools, invocation patterns, transition edges and categories from
  // reference trajectories. Tool/pattern order follows first appearance so
  // rebuilding from the same corpus is always identical. Throws on an empty
  // corpus or an episode with an empty reference.
  static ToolGraph build(const std::vector<RawEpisode>& episodes);

  int n_tools() const { return static_cast<int>(names_.size()); }
  bool has_tool(const std::string& name) const { return index_.count(name) > 0; }
  ToolId id_of(const std::string& name) const;  // throws on unknown name
  const std::string& name_of(ToolId t) const { return names_.at(t); }
  const std::string& category_of(ToolId t) const { return categories_.at(t); }

  const std::vector<std::string>& invocations(ToolId t) const {
    return invocation_sets_.at(t);
  }
  int invocation_count(ToolId t) const {
    return static_cast<int>(invocation_sets_.at(t).size());
  }
  // Index of an invocation pattern string, -1 if the tool does not have it.
  int invocation_index(ToolId t, const std::string& pattern) const;

  bool has_edge(ToolId from, ToolId to) const;
  // Lazy insertion for transitions discovered during rollouts. Returns true
  // when the edge was new. Idempotent.
  bool add_edge(ToolId from, ToolId to);
  int edge_count() const { return n_edges_; }
  std::vector<ToolId> successors(ToolId from) const;
  std::vector<std::pair<ToolId, ToolId>> edges() const;  // sorted

  nlohmann::json to_json() const;
  static ToolGraph from_json(const nlohmann::json& j);

 private:
  ToolId intern_tool(const std::string& name);
  int intern_invocation(ToolId t, const std::string& pattern);
  void check_tool(ToolId t) const;

  std::vector<std::string> names_;
  std::unordered_map<std::string, ToolId> index_;
  std::vector<std::vector<std::string>> invocation_sets_;
  std::vector<std::string> categories_;
  std::vector<std::set<ToolId>> succ_;  // ordered for deterministic iteration
  int n_edges_ = 0;
};

}  // namespace phgpo
