#include "phgpo/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phgpo {

LinearPolicy::LinearPolicy(int n_tools, int n_buckets)
    : n_tools_(n_tools), n_buckets_(n_buckets) {
  if (n_tools < 2 || n_buckets < 1)
    throw std::invalid_argument("LinearPolicy: need n_tools >= 2, n_buckets >= 1");
  weights_.assign(static_cast<std::size_t>(n_features()) * n_tools_, 0.0);
}

void LinearPolicy::check_state(const State& s) const {
  if (s.bucket < 0 || s.bucket >= n_buckets_ || s.last_tool < 0 ||
      s.last_tool >= n_tools_ || s.prev_tool < 0 || s.prev_tool >= n_tools_)
    throw std::out_of_range("LinearPolicy: state indices out of range");
}

std::vector<double> LinearPolicy::logits(const State& s) const {
  check_state(s);
  std::vector<double> z(static_cast<std::size_t>(n_tools_));
  const double* w_last = weights_.data() + static_cast<std::size_t>(row_last(s)) * n_tools_;
  const double* w_prev = weights_.data() + static_cast<std::size_t>(row_prev(s)) * n_tools_;
  const double* w_bucket = weights_.data() + static_cast<std::size_t>(row_bucket(s)) * n_tools_;
  for (int j = 0; j < n_tools_; ++j) z[j] = w_last[j] + w_prev[j] + w_bucket[j];
  return z;
}

nlohmann::json LinearPolicy::to_json() const {
  return {{"feature_map_version", 1},
          {"n_tools", n_tools_},
          {"n_buckets", n_buckets_},
          {"weights", weights_}};
}

LinearPolicy LinearPolicy::from_json(const nlohmann::json& j) {
  if (j.at("feature_map_version").get<int>() != 1)
    throw std::runtime_error("LinearPolicy: unsupported feature_map_version");
  LinearPolicy p(j.at("n_tools").get<int>(), j.at("n_buckets").get<int>());
  auto w = j.at("weights").get<std::vector<double>>();
  if (w.size() != p.weight_count())
    throw std::runtime_error("LinearPolicy: weight count mismatch");
  p.weights_ = std::move(w);
  return p;
}

double logsumexp(const std::vector<double>& v) {
  double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

std::vector<double> softmax(const std::vector<double>& logits) {
  double lse = logsumexp(logits);
  std::vector<double> p(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) p[i] = std::exp(logits[i] - lse);
  return p;
}

std::vector<double> log_softmax(const std::vector<double>& logits) {
  double lse = logsumexp(logits);
  std::vector<double> lp(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) lp[i] = logits[i] - lse;
  return lp;
}

double softmax_entropy(const std::vector<double>& logits) {
  auto lp = log_softmax(logits);
  double h = 0.0;
  for (double l : lp) h -= std::exp(l) * l;
  return h;
}

namespace {

// Adds scale * dval_dz into the three active feature rows of buf.
void scatter_rows(const LinearPolicy& p, const State& s,
                  const std::vector<double>& dval_dz, double scale,
                  std::vector<double>& buf) {
  const int n = p.n_tools();
  int rows[3] = {p.row_last(s), p.row_prev(s), p.row_bucket(s)};
  for (int r : rows) {
    double* out = buf.data() + static_cast<std::size_t>(r) * n;
    for (int j = 0; j < n; ++j) out[j] += scale * dval_dz[j];
  }
}

void check_buf(const LinearPolicy& p, const std::vector<double>& buf) {
  if (buf.size() != p.weight_count())
    throw std::invalid_argument("gradient buffer size mismatch");
}

}  // namespace

double accumulate_sl_grad(const LinearPolicy& p, const State& s, ToolId target,
                          double scale, std::vector<double>& buf) {
  check_buf(p, buf);
  if (target < 0 || target >= p.n_tools())
    throw std::out_of_range("sl: target out of range");
  auto z = p.logits(s);
  auto prob = softmax(z);
  double loss = logsumexp(z) - z[target];
  prob[target] -= 1.0;  // dloss/dz = softmax - onehot(target)
  scatter_rows(p, s, prob, scale, buf);
  return loss;
}

double accumulate_pg_grad(const LinearPolicy& p, const State& s, ToolId action,
                          double old_logprob, double advantage,
                          double clip_eps, double scale,
                          std::vector<double>& buf) {
  check_buf(p, buf);
  if (action < 0 || action >= p.n_tools())
    throw std::out_of_range("pg: action out of range");
  if (clip_eps < 0.0) throw std::invalid_argument("pg: clip_eps must be >= 0");
  auto z = p.logits(s);
  auto lp = log_softmax(z);
  double ratio = std::exp(lp[action] - old_logprob);
  double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
  double surrogate = std::min(ratio * advantage, clipped * advantage);
  double loss = -surrogate;
  if (ratio * advantage <= clipped * advantage) {
    // Unclipped branch active: dloss/dz_j = -A * r * (onehot_a - p)_j.
    std::vector<double> dz(lp.size());
    for (std::size_t j = 0; j < lp.size(); ++j) dz[j] = advantage * ratio * std::exp(lp[j]);
    dz[action] -= advantage * ratio;
    scatter_rows(p, s, dz, scale, buf);
  }
  return loss;
}

double accumulate_entropy_grad(const LinearPolicy& p, const State& s,
                               double scale, std::vector<double>& buf) {
  check_buf(p, buf);
  auto z = p.logits(s);
  auto lp = log_softmax(z);
  double h = 0.0;
  for (double l : lp) h -= std::exp(l) * l;
  // dH/dz_k = -p_k * (log p_k + H)
  std::vector<double> dz(lp.size());
  for (std::size_t k = 0; k < lp.size(); ++k)
    dz[k] = -std::exp(lp[k]) * (lp[k] + h);
  scatter_rows(p, s, dz, scale, buf);
  return h;
}

LossGrad sl_loss_and_grad(const LinearPolicy& p, const State& s, ToolId target) {
  LossGrad out;
  out.grad.assign(p.weight_count(), 0.0);
  out.loss = accumulate_sl_grad(p, s, target, 1.0, out.grad);
  return out;
}

LossGrad pg_loss_and_grad(const LinearPolicy& p, const State& s, ToolId action,
                          double old_logprob, double advantage,
                          double clip_eps) {
  LossGrad out;
  out.grad.assign(p.weight_count(), 0.0);
  out.loss = accumulate_pg_grad(p, s, action, old_logprob, advantage, clip_eps,
                                1.0, out.grad);
  return out;
}

LossGrad entropy_and_grad(const LinearPolicy& p, const State& s) {
  LossGrad out;
  out.grad.assign(p.weight_count(), 0.0);
  out.loss = accumulate_entropy_grad(p, s, 1.0, out.grad);
  return out;
}

void apply_update(LinearPolicy& p, const std::vector<double>& grad, double lr) {
  check_buf(p, grad);
  auto& w = p.weights();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * grad[i];
}

}  // namespace phgpo
