#pragma once

// End-to-end orchestration of the two-stage pipeline: schema label
// generation (co-occurrence -> joint factorization -> random forest ->
// generated labels) followed by mixed ranking and evaluation. Every stage
// writes a plain inspectable artifact file.

#include <filesystem>
#include <string>
#include <vector>

#include "dsearch/cofactor.hpp"
#include "dsearch/eval.hpp"
#include "dsearch/labelgen.hpp"
#include "dsearch/ranking.hpp"

namespace dsearch {

struct PipelineConfig {
  std::filesystem::path corpus_dir;
  std::filesystem::path tasks_file;
  std::filesystem::path qrels_file;   // optional; evaluation is skipped when empty
  std::filesystem::path vectors_file; // required when the labels field is enabled
  std::filesystem::path out_dir;

  LoadOptions load;
  CoFactorConfig cofactor;
  LabelGenConfig labelgen;
  int k_neg = 1;
  int top_m = 10;
  double threshold = 0.5;
  RankerConfig ranker;
  std::string run_tag = "slmr";
  std::vector<int> eval_ks = {5, 10, 20, 50};
  double rel_threshold = 2.0;
};

struct PipelineArtifacts {
  std::filesystem::path vocab, preference, sppmi, model, forest, labels, run, report;
};

PipelineArtifacts run_pipeline(const PipelineConfig& cfg);

// Semantic feature export for the judged (task, dataset) pairs:
// "task_id<TAB>dataset_id<TAB>f1..f5<TAB>grade" with the query side built
// from the concatenation of the task's queries.
void export_features(const Corpus& corpus, const TaskSet& tasks, const Qrels& qrels,
                     const EmbeddingStore& store, const RankerConfig& cfg,
                     const std::filesystem::path& path);

}  // namespace dsearch
