#pragma once

// Dataset-label preference matrix and shifted-positive-PMI label
// co-occurrence matrix. The vocabulary unit is the whole normalized label
// (tokens joined by single spaces), deduplicated per table.

#include <filesystem>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dsearch/corpus.hpp"

namespace dsearch {

struct LabelVocab {
  std::vector<std::string> labels;              // index -> label
  std::unordered_map<std::string, int> index;   // label -> index
  std::vector<int> dataset_frequency;           // datasets containing each label

  int id(const std::string& label) const {
    auto it = index.find(label);
    return it == index.end() ? -1 : it->second;
  }
  std::size_t size() const { return labels.size(); }
};

// Sparse binary m x n matrix; per dataset the sorted unique label ids.
struct PreferenceMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<std::vector<int>> row_labels;

  std::size_t nnz() const {
    std::size_t total = 0;
    for (const auto& r : row_labels) total += r.size();
    return total;
  }
};

// Generic sparse matrix, rows hold sorted (col, value) pairs.
struct SparseMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<std::vector<std::pair<int, double>>> row;

  double at(int r, int c) const;
  std::size_t nnz() const {
    std::size_t total = 0;
    for (const auto& rr : row) total += rr.size();
    return total;
  }
  double sum() const;
};

using CountMatrix = SparseMatrix;

struct SppmiMatrix {
  SparseMatrix mat;  // n x n, symmetric, entries > 0
  int k_neg = 1;
};

// One row per dataset, one column per distinct normalized label appearing in
// at least min_dataset_frequency datasets. Throws when nothing survives.
std::pair<LabelVocab, PreferenceMatrix> build_vocab_and_preference(
    const Corpus& corpus, int min_dataset_frequency = 1);

// #(i,j) = ordered in-table pair count over per-table deduplicated label
// sets; symmetric, zero diagonal.
CountMatrix cooccurrence_counts(const Corpus& corpus, const LabelVocab& vocab);

// SPPMI(i,j) = max(ln(#(i,j) |D| / (row_i row_j)) - ln(k_neg), 0).
SppmiMatrix build_sppmi(const CountMatrix& counts, int k_neg);

SppmiMatrix empty_sppmi(std::size_t n);

// Sparse triplet text format: "rows cols nnz" header then "row col value".
void save_triplets(const SparseMatrix& m, const std::filesystem::path& path);
SparseMatrix load_triplets(const std::filesystem::path& path);

SparseMatrix preference_to_sparse(const PreferenceMatrix& m);
PreferenceMatrix preference_from_sparse(const SparseMatrix& m);

// One "index<TAB>label<TAB>dataset_frequency" line per label.
void save_vocab(const LabelVocab& vocab, const std::filesystem::path& path);
LabelVocab load_vocab(const std::filesystem::path& path);

}  // namespace dsearch
