#include "phgpo/rewards.hpp"

#include <numeric>
#include <stdexcept>

namespace phgpo {

double intent_reward(ToolId chosen, std::optional<ToolId> reference,
                     ToolId prev_chosen, std::optional<ToolId> prev_reference,
                     const ToolGraph& g) {
  if (!reference.has_value()) return 0.0;
  if (chosen == *reference) {
    double r = kIntentExact;
    bool prev_wrong = prev_reference.has_value() && prev_chosen != *prev_reference;
    if (prev_wrong) r += kIntentRecovery;
    return r;
  }
  if (g.category_of(chosen) == g.category_of(*reference)) return kIntentCategory;
  return 0.0;
}

double exec_reward(const SimResult& result) {
  return result.is_error ? kExecError : kExecValid;
}

double outcome_bonus(bool completed, double q_final, double complete_bonus,
                     double partial_coef) {
  return completed ? complete_bonus : partial_coef * q_final;
}

double match_ratio(const std::vector<Action>& predicted,
                   const std::vector<Action>& reference) {
  if (reference.empty())
    throw std::invalid_argument("match_ratio: empty reference");
  std::size_t hits = 0;
  for (std::size_t t = 0; t < reference.size(); ++t)
    if (t < predicted.size() && predicted[t].tool == reference[t].tool) ++hits;
  return static_cast<double>(hits) / static_cast<double>(reference.size());
}

std::optional<double> model_quality(const std::vector<Action>& predicted,
                                    const std::vector<bool>& teacher_forced,
                                    const std::vector<Action>& reference) {
  if (predicted.size() != teacher_forced.size())
    throw std::invalid_argument("model_quality: flag count mismatch");
  std::size_t free_steps = 0, hits = 0;
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    if (teacher_forced[t]) continue;
    ++free_steps;
    if (t < reference.size() && predicted[t].tool == reference[t].tool) ++hits;
  }
  if (free_steps == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(free_steps);
}

double episode_return(const std::vector<double>& step_rewards, double outcome) {
  return std::accumulate(step_rewards.begin(), step_rewards.end(), 0.0) + outcome;
}

}  // namespace phgpo
