#pragma once

// Pheromone-guided action sampling. Tool choice: restrict to the top-K tools
// by policy logit, score each candidate logit/T + beta * log(trail), softmax,
// then mix an epsilon-greedy uniform floor over the support. Invocation
// choice: proportional to the (fused) invocation trail alone.

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "phgpo/pheromone.hpp"
#include "phgpo/tool_graph.hpp"

namespace phgpo {

struct SamplerConfig {
  int top_k = 20;
  double temperature = 0.7;
  double epsilon_greedy = 0.05;
  double beta = 0.0;  // pheromone guidance strength for tool choice

  void validate() const;  // throws on top_k < 1, temperature <= 0, eps not in [0,1]
};

using FusedToolFn = std::function<FusedPheromone(ToolId from, ToolId to)>;
using FusedArgFn = std::function<FusedPheromone(ToolId tool, int pattern)>;

struct StepChoice {
  ToolId tool = -1;
  int pattern = -1;
  double behavior_logprob = 0.0;    // log mass the behavior mixture put on tool
  double policy_logprob_old = 0.0;  // log pi_theta(tool | state), T = 1
  bool teacher_forced = false;
};

// The guided tool distribution over its top-K support, with the epsilon floor
// already mixed in. probs sums to 1.
struct GuidedDistribution {
  std::vector<ToolId> support;        // descending logit, ties by lower id
  std::vector<double> probs;          // aligned with support
  std::vector<double> policy_logprob; // full-vocabulary log softmax (T = 1)

  double prob_of(ToolId tool) const;  // 0 for tools outside the support
  ToolId argmax() const;              // ties broken by lower tool id
};

// `eligible` lists the selectable tools (normally every tool except START).
// `tau` may be empty when beta == 0; it is only consulted when beta != 0.
GuidedDistribution guided_tool_distribution(const std::vector<double>& logits,
                                            ToolId prev_tool,
                                            const std::vector<ToolId>& eligible,
                                            const FusedToolFn& tau,
                                            const SamplerConfig& cfg);

// Draws from the guided distribution; fills tool, behavior_logprob and
// policy_logprob_old (pattern stays unset).
StepChoice guided_tool_sample(const GuidedDistribution& dist,
                              std::mt19937_64& rng);

// Teacher-forcing mixture: with probability p_tf the reference action is
// executed verbatim, otherwise a tool is drawn from the guided distribution.
// behavior_logprob is always the log of the full mixture mass on the executed
// tool, so exp(behavior_logprob) sums to 1 over possible outcomes. Without a
// reference action the mixture degenerates to the guided distribution.
StepChoice mixed_step(const GuidedDistribution& dist,
                      const std::optional<Action>& reference, double p_tf,
                      std::mt19937_64& rng);

// Invocation choice proportional to the fused invocation trail. argmax mode
// picks the highest trail (ties by lower pattern index) without drawing.
int arg_sample(const ToolGraph& g, ToolId tool, const FusedArgFn& tau,
               std::mt19937_64& rng, bool argmax = false);

}  // namespace phgpo
