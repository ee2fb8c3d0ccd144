#pragma once

// Per-step shaping rewards, trajectory quality and episode return. All pure
// functions; constants live in one place so tests can pin the arithmetic.

#include <optional>
#include <vector>

#include "phgpo/environment.hpp"
#include "phgpo/tool_graph.hpp"

namespace phgpo {

inline constexpr double kIntentExact = 0.5;
inline constexpr double kIntentCategory = 0.2;
inline constexpr double kIntentRecovery = 0.1;
inline constexpr double kExecValid = 0.5;
inline constexpr double kExecError = -0.5;

// Intent alignment at one step. Exact tool match pays kIntentExact, a tool of
// the same category pays kIntentCategory, and an exact match right after a
// mismatched step additionally pays kIntentRecovery. Steps past the end of
// the reference (empty optionals) pay 0.
double intent_reward(ToolId chosen, std::optional<ToolId> reference,
                     ToolId prev_chosen, std::optional<ToolId> prev_reference,
                     const ToolGraph& g);

double exec_reward(const SimResult& result);

// Completion pays complete_bonus, otherwise partial_coef * final quality.
double outcome_bonus(bool completed, double q_final,
                     double complete_bonus = 2.0, double partial_coef = 1.0);

// Fraction of reference positions whose executed tool matches. Denominator is
// always the reference length; a trajectory shorter than the reference counts
// the missing tail as mismatches. Empty reference throws.
double match_ratio(const std::vector<Action>& predicted,
                   const std::vector<Action>& reference);

// Match ratio over autonomously chosen steps only (teacher-forced steps
// excluded from numerator and denominator). Empty when every step was forced.
std::optional<double> model_quality(const std::vector<Action>& predicted,
                                    const std::vector<bool>& teacher_forced,
                                    const std::vector<Action>& reference);

// R = sum of per-step rewards + outcome bonus.
double episode_return(const std::vector<double>& step_rewards,
                      double outcome);

}  // namespace phgpo
