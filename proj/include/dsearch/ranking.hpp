#pragma once

// Word Mover's Distance scoring, the schema-label mixed ranking function,
// coordinate-ascent weight tuning and semantic feature extraction.

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dsearch/corpus.hpp"
#include "dsearch/embed.hpp"
#include "dsearch/field_index.hpp"

namespace dsearch {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct RankerConfig {
  double w_text = 1.0, w_data = 0.0, w_l = 0.0;
  bool use_text = true, use_data = false, use_labels = false;
  // tuning keeps these fields away from weight 0
  bool force_text = false, force_data = false, force_labels = false;
  Bm25Params text_bm25, data_bm25;
  enum class Normalization { none, minmax_per_query };
  Normalization normalization = Normalization::minmax_per_query;
  double wmd_floor = -2.0;  // label score when either cloud is empty
  bool include_original_labels_in_wmd = false;
  int depth = 100;
  std::size_t wmd_cloud_cap = 64;

  void validate() const;
};

// Exact WMD between two non-empty clouds: optimal transport cost under
// Euclidean ground distances.
double wmd(const WeightedPointCloud& a, const WeightedPointCloud& b);

// -wmd(embed(query), embed(labels)); the floor score when either side embeds
// to an empty cloud.
double score_labels(const EmbeddingStore& store, std::span<const std::string> query_tokens,
                    std::span<const std::string> label_tokens, double floor = -2.0,
                    std::size_t cloud_cap = 64);

// [centroid cosine, max, mean, sum of pairwise cosines, -wmd]; zeros with the
// floor in the WMD slot when either side is empty.
std::array<double, 5> semantic_features(const EmbeddingStore& store,
                                        std::span<const std::string> query_tokens,
                                        std::span<const std::string> label_tokens,
                                        double floor = -2.0, std::size_t cloud_cap = 64);

struct RankedList {
  std::string query_id;
  std::vector<std::pair<std::string, double>> entries;  // descending score, ties by id
};

struct RunEntry {
  std::string topic;  // "<task_id>.q<index>"
  std::vector<std::pair<std::string, double>> ranked;
};

struct RunFile {
  std::string tag = "dsearch";
  std::vector<RunEntry> entries;
};

// Immutable per-corpus scoring context: builds the indexes for the enabled
// fields and caches each dataset's label document for WMD.
class Ranker {
 public:
  Ranker(const Corpus& corpus, const RankerConfig& cfg, const EmbeddingStore* store);

  // raw field scores over all datasets (corpus order)
  std::vector<double> field_scores(Field field, std::span<const std::string> query_tokens) const;

  // scores normalized per the config mode and mixed with the field weights
  std::vector<double> mixed_scores(std::span<const std::string> query_tokens) const;
  std::vector<double> mixed_scores(std::span<const std::string> query_tokens, double w_text,
                                   double w_data, double w_l) const;

  RankedList rank(const std::string& query_id, const std::string& query_text) const;
  RunFile run_all(const TaskSet& tasks, const std::string& tag) const;

  const RankerConfig& config() const { return cfg_; }
  const Corpus& corpus() const { return *corpus_; }

 private:
  std::vector<double> normalized_field_scores(Field field,
                                              std::span<const std::string> query_tokens) const;

  const Corpus* corpus_;
  RankerConfig cfg_;
  const EmbeddingStore* store_;
  std::optional<FieldIndex> text_index_, data_index_;
  std::vector<std::vector<std::string>> label_docs_;  // per dataset, for score_labels
};

RankedList sort_ranked(const std::string& query_id,
                       std::span<const std::string> dataset_ids,
                       std::span<const double> scores, int depth);

// TREC format "topic Q0 dataset_id rank score tag".
void save_run(const RunFile& run, const std::filesystem::path& path);
RunFile load_run(const std::filesystem::path& path);

// task id of a run topic: strips a trailing ".q<digits>" when present
std::string topic_task(const std::string& topic);

// Short summary of the enabled fields ("T+D", "T+D+G", ...): T+D is the
// title/description text field, DT the data table, G the generated labels.
std::string field_summary(const RankerConfig& cfg);

struct Qrels;

// ---------------------------------------------------------------------------
// Single-field document ranking baselines: one index, one classic scorer.

enum class Scorer { bm25, tfidf, lm_jm, lm_dirichlet };

Scorer parse_scorer(const std::string& name);
std::string scorer_name(Scorer scorer);

struct ScorerParams {
  Bm25Params bm25;
  double lm_lambda = 0.5;  // Jelinek-Mercer
  double lm_mu = 1000.0;   // Dirichlet
};

std::vector<double> baseline_scores(const FieldIndex& index, Scorer scorer,
                                    const ScorerParams& params,
                                    std::span<const std::string> query_tokens);

RankedList baseline_rank(const FieldIndex& index, Scorer scorer, const ScorerParams& params,
                         const std::string& query_id, const std::string& query_text, int depth);

RunFile baseline_run_all(const Corpus& corpus, Field field, Scorer scorer,
                         const ScorerParams& params, const TaskSet& tasks,
                         const std::string& tag, int depth = 100);

// Exhaustive search over the pinned parameter grids, maximizing mean
// NDCG@cutoff: k1 in 0.6..2.0 step 0.2 with b in 0.1..0.9 step 0.1 for BM25,
// lambda in 0.1..0.9 step 0.1 for Jelinek-Mercer, mu in {250, 500, 1000,
// 2000, 5000} for Dirichlet. TF-IDF has no parameters.
ScorerParams grid_search_scorer(const Corpus& corpus, Field field, Scorer scorer,
                                const TaskSet& tasks, const Qrels& qrels, int metric_cutoff = 10);

// Cyclic coordinate ascent over the enabled field weights on the grid
// {0, 0.05, ..., 1.0} (0 excluded for forced fields), maximizing mean
// NDCG@metric_cutoff over all queries; stops once a full cycle improves by
// no more than 1e-6. Ties keep the smallest weight.
RankerConfig tune_weights(const Corpus& corpus, const TaskSet& tasks, const Qrels& qrels,
                          const RankerConfig& base, const EmbeddingStore* store,
                          int metric_cutoff = 10);

}  // namespace dsearch
