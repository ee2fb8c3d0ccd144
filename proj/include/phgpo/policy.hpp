#pragma once

// Trainable scorer: linear softmax over concatenated one-hot features
// (last tool, previous tool, task text bucket). Losses return analytic
// gradients; temperature never enters here, it belongs to the sampler.

#include <vector>

#include <nlohmann/json.hpp>

#include "phgpo/tool_graph.hpp"

namespace phgpo {

struct State {
  int bucket = 0;
  ToolId last_tool = kStartTool;
  ToolId prev_tool = kStartTool;
};

class LinearPolicy {
 public:
  LinearPolicy() = default;
  LinearPolicy(int n_tools, int n_buckets);

  int n_tools() const { return n_tools_; }
  int n_buckets() const { return n_buckets_; }
  int n_features() const { return 2 * n_tools_ + n_buckets_; }
  std::size_t weight_count() const { return weights_.size(); }

  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }
  double weight(int feature, int tool) const {
    return weights_[static_cast<std::size_t>(feature) * n_tools_ + tool];
  }

  // Rows of the weight matrix touched by a state's three active features.
  int row_last(const State& s) const { return s.last_tool; }
  int row_prev(const State& s) const { return n_tools_ + s.prev_tool; }
  int row_bucket(const State& s) const { return 2 * n_tools_ + s.bucket; }

  std::vector<double> logits(const State& s) const;  // throws on bad state

  nlohmann::json to_json() const;
  static LinearPolicy from_json(const nlohmann::json& j);

 private:
  void check_state(const State& s) const;

  int n_tools_ = 0;
  int n_buckets_ = 0;
  std::vector<double> weights_;  // [n_features x n_tools], row-major
};

double logsumexp(const std::vector<double>& v);
std::vector<double> softmax(const std::vector<double>& logits);
std::vector<double> log_softmax(const std::vector<double>& logits);
// Shannon entropy of a softmax distribution given its logits.
double softmax_entropy(const std::vector<double>& logits);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;  // same shape as the policy weights
};

// Cross entropy -log pi(target | state).
LossGrad sl_loss_and_grad(const LinearPolicy& p, const State& s, ToolId target);

// Clipped surrogate -min(r*A, clip(r, 1-eps, 1+eps)*A) with
// r = pi(action|state) / exp(old_logprob). Gradient is zero when the clipped
// branch is strictly active.
LossGrad pg_loss_and_grad(const LinearPolicy& p, const State& s, ToolId action,
                          double old_logprob, double advantage,
                          double clip_eps);

// Entropy H[pi(.|state)] and its gradient (an objective bonus, not a loss).
LossGrad entropy_and_grad(const LinearPolicy& p, const State& s);

// Accumulating variants: add scale * d(term)/dweights into buf (sized like the
// weights) and return the term value. Only the three active feature rows are
// touched.
double accumulate_sl_grad(const LinearPolicy& p, const State& s, ToolId target,
                          double scale, std::vector<double>& buf);
double accumulate_pg_grad(const LinearPolicy& p, const State& s, ToolId action,
                          double old_logprob, double advantage,
                          double clip_eps, double scale,
                          std::vector<double>& buf);
double accumulate_entropy_grad(const LinearPolicy& p, const State& s,
                               double scale, std::vector<double>& buf);

// Plain SGD step: w -= lr * grad.
void apply_update(LinearPolicy& p, const std::vector<double>& grad, double lr);

}  // namespace phgpo
