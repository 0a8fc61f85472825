#pragma once

// Pretrained word vectors with character n-gram fallback for out-of-vocabulary
// tokens, and the normalized bag-of-words point clouds consumed by WMD.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dsearch {

struct EmbeddingStore {
  int dim = 0;
  std::unordered_map<std::string, std::vector<float>> vectors;  // unit-norm
  std::unordered_map<std::string, std::vector<float>> ngrams;   // unit-norm, keys sans marker
  int ngram_min = 3, ngram_max = 6;
  std::vector<std::string> warnings;
};

struct WeightedPointCloud {
  std::vector<std::vector<float>> points;  // unit-norm vectors
  std::vector<double> weights;             // positive, sum to 1 when non-empty

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
};

// Text format: header "count dim", then "token v1 ... v_dim" rows. Rows whose
// token starts with "#ng:" populate the n-gram table. Vectors are
// L2-normalized on load; duplicates keep the last row with a warning.
// A gzip-compressed file (magic 1f 8b) is accepted transparently.
EmbeddingStore load_vectors(const std::filesystem::path& path);

// In-vocabulary lookup, else the renormalized mean over the token's character
// 3..6-grams (with '<' '>' boundary markers) found in the n-gram table.
std::optional<std::vector<float>> embed_token(const EmbeddingStore& store,
                                              const std::string& token);

// Tokens without an embedding are dropped; duplicate tokens merge weight onto
// one point; an all-absent input yields the empty cloud.
WeightedPointCloud embed_tokens(const EmbeddingStore& store,
                                std::span<const std::string> tokens);

// Keeps the `cap` highest-weight points (ties kept in point order) and
// renormalizes the weights.
WeightedPointCloud truncate_cloud(WeightedPointCloud cloud, std::size_t cap);

}  // namespace dsearch
