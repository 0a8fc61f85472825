#pragma once

// Per-field inverted index with collection statistics and the four classic
// lexical scorers (BM25, TF-IDF, LM Jelinek-Mercer, LM Dirichlet).

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dsearch/corpus.hpp"

namespace dsearch {

enum class Field { text, data, labels_orig, labels_gen, all };

Field parse_field(const std::string& name);
std::string field_name(Field field);

struct FieldIndex {
  struct Postings {
    std::int64_t coll_tf = 0;                 // total occurrences in the collection
    std::vector<std::pair<int, int>> docs;    // (dataset ordinal, tf), sorted by ordinal
    int df() const { return static_cast<int>(docs.size()); }
  };

  Field field = Field::text;
  std::size_t num_docs = 0;
  std::vector<std::string> doc_ids;   // ordinal -> dataset id
  std::vector<std::int64_t> doc_len;
  std::int64_t total_len = 0;
  double avg_doc_len = 0.0;
  std::unordered_map<std::string, Postings> postings;

  int tf(const std::string& token, int doc) const;
  int df(const std::string& token) const;
};

// field sources: text = title + description; data = cell values row-major
// (header excluded); labels_orig / labels_gen = the original / generated
// label tokens of all columns; all = text + labels_orig + data.
FieldIndex build_index(const Corpus& corpus, Field field);

// Robertson IDF ln(1 + (N - df + 0.5)/(df + 0.5)); nonnegative scores.
double bm25_score(const FieldIndex& index, std::span<const std::string> query, int doc,
                  double k1, double b);

double tfidf_score(const FieldIndex& index, std::span<const std::string> query, int doc);

// log(lambda p_doc + (1 - lambda) p_coll), lambda in (0,1)
double lm_jm_score(const FieldIndex& index, std::span<const std::string> query, int doc,
                   double lambda);

// log((tf + mu p_coll)/(len + mu)), mu > 0
double lm_dirichlet_score(const FieldIndex& index, std::span<const std::string> query, int doc,
                          double mu);

// Inspectable text format; round-trips with identical scores.
void save_index(const FieldIndex& index, const std::filesystem::path& path);
FieldIndex load_index(const std::filesystem::path& path);

}  // namespace dsearch
