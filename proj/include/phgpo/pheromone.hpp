#pragma once

// Pheromone state over the tool graph: task-agnostic scalar trails per edge
// plus per-edge memory banks of (task embedding, quality) pairs that provide
// the task-dependent component. All values live in [tau_min, tau_max].

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "phgpo/embedding.hpp"
#include "phgpo/tool_graph.hpp"

namespace phgpo {

struct PheromoneParams {
  double rho = 0.01;       // evaporation rate
  double alpha = 1.0;      // deposition gain
  double tau_min = 0.05;
  double tau0 = 1.0;       // initial / default trail value
  double tau_max = 5.0;
  double theta_sim = 0.5;  // retrieval similarity threshold
  int n_min = 3;           // retrieved entries for full confidence
  double epsilon = 1e-8;   // denominator guard
  int bank_cap = 256;      // FIFO capacity per edge bank

  void validate() const;  // throws std::invalid_argument on bad ranges
  double clip(double v) const {
    if (v < tau_min) return tau_min;
    if (v > tau_max) return tau_max;
    return v;
  }

  nlohmann::json to_json() const;
  static PheromoneParams from_json(const nlohmann::json& j);
};

struct FusedPheromone {
  double value = 0.0;
  double confidence = 0.0;
};

struct BankEntry {
  TaskEmbedding embedding;
  double quality = 0.0;
};

struct RetrievedEntry {
  double similarity = 0.0;
  double quality = 0.0;
};

// FIFO bank of successful-episode evidence for one edge.
class MemoryBank {
 public:
  void append(TaskEmbedding e, double quality, int cap);
  const std::vector<BankEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<BankEntry> entries_;
};

// Edge keys pack two 32-bit indices; tool edges use (from, to), invocation
// edges use (tool, pattern index).
inline std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(b));
}

class PheromoneStore {
 public:
  PheromoneStore() = default;
  explicit PheromoneStore(PheromoneParams p) : params_(p) { p.validate(); }

  const PheromoneParams& params() const { return params_; }

  // Materializes every graph edge (tool transitions and invocation slots) at
  // tau0 so epoch evaporation applies to untouched edges as well.
  void init_from_graph(const ToolGraph& g);

  // Reads fall back to tau0 for edges never materialized (lazy discovery).
  double tool_value(ToolId from, ToolId to) const;
  double arg_value(ToolId tool, int pattern) const;

  // Materializes an edge at tau0 without depositing, so later evaporation
  // applies to it. No-ops when the edge already has a value.
  void ensure_tool(ToolId from, ToolId to);
  void ensure_arg(ToolId tool, int pattern);

  // Evaporation-rate override for ablations that stop decay mid-run.
  void set_rho(double rho);

  // One deposition step: value <- clip((1-rho)*old + alpha*q). Unseen edges
  // start from tau0. Quality outside [0,1] throws. Returns the new value.
  double deposit_tool(ToolId from, ToolId to, double quality);
  double deposit_arg(ToolId tool, int pattern, double quality);

  // Decays every stored value by (1-rho), clipped.
  void evaporate_all();
  // Epoch-boundary variant: decays only edges not deposited since the last
  // call, then clears the touch set.
  void evaporate_epoch();

  // Number of distinct tool edges that ever received a deposit (discovery
  // growth metric).
  int deposited_tool_edge_count() const {
    return static_cast<int>(deposited_tool_.size());
  }

  std::size_t tool_entry_count() const { return tool_.size(); }
  std::size_t arg_entry_count() const { return arg_.size(); }

  nlohmann::json to_json() const;               // entries sorted by key
  static PheromoneStore from_json(const nlohmann::json& j);

 private:
  double deposit_into(std::unordered_map<std::uint64_t, double>& m,
                      std::unordered_set<std::uint64_t>& touched,
                      std::uint64_t key, double quality);

  PheromoneParams params_;
  std::unordered_map<std::uint64_t, double> tool_;
  std::unordered_map<std::uint64_t, double> arg_;
  std::unordered_set<std::uint64_t> touched_tool_, touched_arg_;
  std::unordered_set<std::uint64_t> deposited_tool_;
};

// Per-edge memory banks for both edge kinds.
class MemoryBanks {
 public:
  const MemoryBank* tool_bank(ToolId from, ToolId to) const;
  const MemoryBank* arg_bank(ToolId tool, int pattern) const;
  void append_tool(ToolId from, ToolId to, const TaskEmbedding& e, double q, int cap);
  void append_arg(ToolId tool, int pattern, const TaskEmbedding& e, double q, int cap);
  std::size_t tool_bank_count() const { return tool_.size(); }
  std::size_t total_entries() const;

  nlohmann::json to_json() const;
  static MemoryBanks from_json(const nlohmann::json& j);

 private:
  std::unordered_map<std::uint64_t, MemoryBank> tool_;
  std::unordered_map<std::uint64_t, MemoryBank> arg_;
};

// Entries of the bank whose similarity to e_x passes theta_sim, in bank
// (insertion) order. Null bank means no evidence: empty result.
std::vector<RetrievedEntry> retrieve(const MemoryBank* bank,
                                     const TaskEmbedding& e_x,
                                     const PheromoneParams& p);

// tau0 + [sum(sim*q) / (sum(sim) + eps)] * (tau_max - tau0); tau0 if empty.
double task_dependent_value(const std::vector<RetrievedEntry>& retrieved,
                            const PheromoneParams& p);

// min(1, n/n_min) * max(sim) * mean(q); 0 if empty.
double retrieval_confidence(const std::vector<RetrievedEntry>& retrieved,
                            const PheromoneParams& p);

// clip((1 - w*c)*tau_agn + w*c*tau_dep). w outside [0,1] throws.
FusedPheromone fuse(double tau_agn, double tau_dep, double confidence,
                    double w, const PheromoneParams& p);

// Full per-edge fusion pipeline used by the sampler.
FusedPheromone fused_tool_value(const PheromoneStore& store,
                                const MemoryBanks& banks, ToolId from,
                                ToolId to, const TaskEmbedding& e_x, double w);
FusedPheromone fused_arg_value(const PheromoneStore& store,
                               const MemoryBanks& banks, ToolId tool,
                               int pattern, const TaskEmbedding& e_x, double w);

// Deposits along every transition and invocation edge of an executed
// trajectory (START anchors the first transition) and appends (e_x, q) to the
// corresponding banks. Caller is responsible for quality gating.
void record_success(PheromoneStore& store, MemoryBanks& banks,
                    const std::vector<Action>& trajectory,
                    const TaskEmbedding& e_x, double quality);

// Binds a frozen (store, banks, task embedding, w) tuple and memoizes fused
// values per edge. Valid only while the store and banks are unmodified, i.e.
// within one rollout group or evaluation pass.
class FusedEvaluator {
 public:
  FusedEvaluator(const PheromoneStore& store, const MemoryBanks& banks,
                 const TaskEmbedding& e_x, double w)
      : store_(store), banks_(banks), e_x_(e_x), w_(w) {}

  FusedPheromone tool(ToolId from, ToolId to) const;
  FusedPheromone arg(ToolId tool, int pattern) const;

 private:
  const PheromoneStore& store_;
  const MemoryBanks& banks_;
  const TaskEmbedding& e_x_;
  double w_;
  mutable std::unordered_map<std::uint64_t, FusedPheromone> tool_cache_;
  mutable std::unordered_map<std::uint64_t, FusedPheromone> arg_cache_;
};

}  // namespace phgpo
