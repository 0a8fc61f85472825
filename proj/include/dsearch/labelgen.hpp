#pragma once

// Per-column feature extraction and the random-forest schema label generator.
// Features are the 12 curated value statistics concatenated with the learned
// label representation beta; labels are generated top-m then thresholded.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dsearch/cofactor.hpp"
#include "dsearch/cooccur.hpp"
#include "dsearch/corpus.hpp"

namespace dsearch {

inline constexpr int kCuratedDims = 12;

struct LabelGenConfig {
  int trees = 25;
  std::uint64_t seed = 7;
  // embedding part of x: false -> beta of the column's own original label
  // (zeros when absent), true -> mean beta over sibling columns' labels
  bool sibling_mean_embedding = false;
};

// Fixed 12-dim statistics vector:
//   [0] value_count           cells in the column (including empty)
//   [1] distinct_ratio        distinct non-empty / non-empty
//   [2] numeric_ratio         numeric-parseable / non-empty
//   [3] mean_char_len         over non-empty values
//   [4] std_char_len          population std over non-empty values
//   [5] mean_numeric_value    over numeric values, 0 if none
//   [6] std_numeric_value     population std over numeric values
//   [7] empty_ratio           empty / value_count
//   [8] alphabetic_ratio      letters-and-spaces-only / non-empty
//   [9] date_like_ratio       date-like / non-empty (digit groups split by
//                             '-' or '/', or a bare year 1500..2999)
//   [10] mean_token_count     whitespace tokens per non-empty value
//   [11] max_char_len         over all values
std::vector<double> curated_features(const Column& column);

struct TrainingSet {
  std::vector<std::vector<double>> x;
  std::vector<int> y;  // vocabulary label id per sample
  int feature_dim = 0;
  int n_labels = 0;
};

// One sample per column whose original label is in the vocabulary; the target
// is that label (each column carries exactly one original label).
TrainingSet build_training_set(const Corpus& corpus, const FactorModel& model,
                               const LabelVocab& vocab, const LabelGenConfig& cfg = {});

// Inference-time feature vector for one column of a dataset.
std::vector<double> column_features(const Dataset& ds, std::size_t col,
                                    const FactorModel& model, const LabelVocab& vocab,
                                    const LabelGenConfig& cfg = {});

struct RandomForest {
  struct Node {
    int feature = -1;       // -1 for leaves
    double threshold = 0.0; // go left when x[feature] <= threshold
    int left = -1, right = -1;
    int leaf = -1;          // index into leaf_dists for leaves
  };
  struct Tree {
    std::vector<Node> nodes;  // nodes[0] is the root
  };

  std::vector<Tree> trees;
  std::vector<std::vector<std::pair<int, double>>> leaf_dists;  // sparse label distributions
  int feature_dim = 0;
  int n_labels = 0;
};

// CART-style trees on bootstrap samples, ceil(sqrt(d)) split candidates per
// node, Gini criterion, grown to purity; bit-for-bit deterministic per seed.
RandomForest train_generator(const TrainingSet& training, const LabelGenConfig& cfg);

// Mean of the per-tree leaf distributions; sums to 1.
std::vector<double> predict_proba(const RandomForest& forest, std::span<const double> x);

// Top-m labels by probability (ties by label id ascending), then entries
// below the threshold dropped; sorted by descending probability.
std::vector<std::pair<int, double>> generate_labels(const RandomForest& forest,
                                                    std::span<const double> x, int top_m,
                                                    double threshold);

// Fills Dataset::generated_labels for every column of every dataset.
void generate_for_corpus(Corpus& corpus, const RandomForest& forest, const FactorModel& model,
                         const LabelVocab& vocab, const LabelGenConfig& cfg, int top_m,
                         double threshold);

// Tab-separated "dataset_id<TAB>column_index<TAB>label<TAB>probability".
void save_generated_labels(const Corpus& corpus, const std::filesystem::path& path);
void load_generated_labels(Corpus& corpus, const std::filesystem::path& path);

void save_forest(const RandomForest& forest, const std::filesystem::path& path);
RandomForest load_forest(const std::filesystem::path& path);

}  // namespace dsearch
