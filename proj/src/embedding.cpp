#include "phgpo/embedding.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

#include "phgpo/rng.hpp"

namespace phgpo {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

TaskEmbedding encode(std::string_view text, int dim) {
  if (dim <= 0) throw std::invalid_argument("encode: dim must be positive");
  auto tokens = tokenize(text);
  if (tokens.empty()) throw std::invalid_argument("encode: text has no tokens");

  TaskEmbedding e;
  e.values.assign(static_cast<std::size_t>(dim), 0.0);
  for (const auto& tok : tokens) {
    std::uint64_t h = fnv1a64(tok);
    std::size_t bucket = static_cast<std::size_t>(h % static_cast<std::uint64_t>(dim));
    double sign = (h >> 63) ? -1.0 : 1.0;
    e.values[bucket] += sign;
  }

  double norm_sq = 0.0;
  for (double v : e.values) norm_sq += v * v;
  if (norm_sq == 0.0) {
    e.values[0] = 1.0;  // signed counts cancelled out; keep unit norm
    return e;
  }
  double inv = 1.0 / std::sqrt(norm_sq);
  for (double& v : e.values) v *= inv;
  return e;
}

double cosine(const TaskEmbedding& a, const TaskEmbedding& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("cosine: dimension mismatch");
  double dot = 0.0;
  for (int i = 0; i < a.dim(); ++i) dot += a.values[i] * b.values[i];
  if (dot > 1.0) return 1.0;
  if (dot < -1.0) return -1.0;
  return dot;
}

int text_bucket(std::string_view text, int n_buckets) {
  if (n_buckets <= 0) throw std::invalid_argument("text_bucket: n_buckets must be positive");
  return static_cast<int>(fnv1a64(text) % static_cast<std::uint64_t>(n_buckets));
}

}  // namespace phgpo
