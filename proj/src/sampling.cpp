#include "phgpo/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "phgpo/policy.hpp"
#include "phgpo/rng.hpp"

namespace phgpo {

void SamplerConfig::validate() const {
  if (top_k < 1) throw std::invalid_argument("SamplerConfig: top_k must be >= 1");
  if (!(temperature > 0.0))
    throw std::invalid_argument("SamplerConfig: temperature must be > 0");
  if (epsilon_greedy < 0.0 || epsilon_greedy > 1.0)
    throw std::invalid_argument("SamplerConfig: epsilon_greedy must be in [0,1]");
}

double GuidedDistribution::prob_of(ToolId tool) const {
  for (std::size_t i = 0; i < support.size(); ++i)
    if (support[i] == tool) return probs[i];
  return 0.0;
}

ToolId GuidedDistribution::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < support.size(); ++i) {
    if (probs[i] > probs[best] ||
        (probs[i] == probs[best] && support[i] < support[best]))
      best = i;
  }
  return support[best];
}

GuidedDistribution guided_tool_distribution(const std::vector<double>& logits,
                                            ToolId prev_tool,
                                            const std::vector<ToolId>& eligible,
                                            const FusedToolFn& tau,
                                            const SamplerConfig& cfg) {
  cfg.validate();
  if (eligible.empty())
    throw std::invalid_argument("guided_tool_distribution: no eligible tools");
  for (ToolId t : eligible)
    if (t < 0 || static_cast<std::size_t>(t) >= logits.size())
      throw std::out_of_range("guided_tool_distribution: eligible tool out of range");
  if (cfg.beta != 0.0 && !tau)
    throw std::invalid_argument("guided_tool_distribution: beta != 0 needs a trail");

  GuidedDistribution d;
  d.policy_logprob = log_softmax(logits);

  d.support = eligible;
  std::sort(d.support.begin(), d.support.end(), [&](ToolId a, ToolId b) {
    if (logits[a] != logits[b]) return logits[a] > logits[b];
    return a < b;
  });
  if (d.support.size() > static_cast<std::size_t>(cfg.top_k))
    d.support.resize(static_cast<std::size_t>(cfg.top_k));

  // Scores shift by a constant relative to log pi / T, which softmax ignores.
  std::vector<double> score(d.support.size());
  for (std::size_t i = 0; i < d.support.size(); ++i) {
    ToolId t = d.support[i];
    score[i] = logits[t] / cfg.temperature;
    if (cfg.beta != 0.0) score[i] += cfg.beta * std::log(tau(prev_tool, t).value);
  }
  d.probs = softmax(score);

  if (cfg.epsilon_greedy > 0.0) {
    double floor = cfg.epsilon_greedy / static_cast<double>(d.support.size());
    for (double& p : d.probs) p = (1.0 - cfg.epsilon_greedy) * p + floor;
  }
  return d;
}

StepChoice guided_tool_sample(const GuidedDistribution& dist,
                              std::mt19937_64& rng) {
  std::size_t i = categorical(rng, dist.probs);
  StepChoice c;
  c.tool = dist.support[i];
  c.behavior_logprob = std::log(dist.probs[i]);
  c.policy_logprob_old = dist.policy_logprob[c.tool];
  c.teacher_forced = false;
  return c;
}

StepChoice mixed_step(const GuidedDistribution& dist,
                      const std::optional<Action>& reference, double p_tf,
                      std::mt19937_64& rng) {
  if (p_tf < 0.0 || p_tf > 1.0)
    throw std::invalid_argument("mixed_step: p_tf must be in [0,1]");
  double p_force = reference.has_value() ? p_tf : 0.0;

  StepChoice c;
  if (p_force > 0.0 && uniform_double(rng) < p_force) {
    c.tool = reference->tool;
    c.pattern = reference->pattern;
    c.teacher_forced = true;
  } else {
    std::size_t i = categorical(rng, dist.probs);
    c.tool = dist.support[i];
    c.teacher_forced = false;
  }
  double guided = dist.prob_of(c.tool);
  double lump = (reference.has_value() && c.tool == reference->tool) ? p_force : 0.0;
  c.behavior_logprob = std::log(lump + (1.0 - p_force) * guided);
  c.policy_logprob_old = dist.policy_logprob[c.tool];
  return c;
}

int arg_sample(const ToolGraph& g, ToolId tool, const FusedArgFn& tau,
               std::mt19937_64& rng, bool argmax) {
  int n = g.invocation_count(tool);
  if (n <= 0) throw std::invalid_argument("arg_sample: tool has no invocations");
  std::vector<double> weights(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) weights[static_cast<std::size_t>(k)] = tau(tool, k).value;
  if (argmax) {
    int best = 0;
    for (int k = 1; k < n; ++k)
      if (weights[static_cast<std::size_t>(k)] > weights[static_cast<std::size_t>(best)])
        best = k;
    return best;
  }
  return static_cast<int>(categorical(rng, weights));
}

}  // namespace phgpo
