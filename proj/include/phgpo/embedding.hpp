#pragma once

// Task text embeddings via feature hashing. Deterministic by construction:
// same text and dimension always produce the same vector, no model weights.

#include <string>
#include <string_view>
#include <vector>

namespace phgpo {

struct TaskEmbedding {
  std::vector<double> values;

  int dim() const { return static_cast<int>(values.size()); }
};

// Lowercase word tokens (runs of alphanumerics, everything else separates).
std::vector<std::string> tokenize(std::string_view text);

// Bag-of-words feature hashing: each token is FNV-1a hashed, bucket = hash %
// dim, sign from the hash top bit, counts L2-normalized. Degenerate all-zero
// accumulation falls back to the first basis vector so the result is always
// unit norm. Empty or tokenless text throws.
TaskEmbedding encode(std::string_view text, int dim = 64);

// Dot product of unit vectors, clamped to [-1, 1]. Dimension mismatch throws.
double cosine(const TaskEmbedding& a, const TaskEmbedding& b);

// Stable bucket for policy features: FNV-1a of the raw text mod n_buckets.
int text_bucket(std::string_view text, int n_buckets);

}  // namespace phgpo
