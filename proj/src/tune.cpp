#include <algorithm>
#include <cmath>
#include <vector>

#include "dsearch/common.hpp"
#include "dsearch/eval.hpp"
#include "dsearch/ranking.hpp"

namespace dsearch {

namespace {

struct QueryCache {
  std::string task;
  // normalized per-field score vectors over the candidate set; empty when the
  // field is disabled
  std::vector<double> text, data, labels;
  std::vector<double> judged;  // the task's judged grades
};

double mean_metric(const std::vector<QueryCache>& queries, const Qrels& qrels,
                   std::span<const std::string> ids, double w_text, double w_data, double w_l,
                   int cutoff) {
  double total = 0.0;
  std::vector<double> mixed(ids.size());
  for (const auto& query : queries) {
    std::fill(mixed.begin(), mixed.end(), 0.0);
    if (!query.text.empty())
      for (std::size_t d = 0; d < mixed.size(); ++d) mixed[d] += w_text * query.text[d];
    if (!query.data.empty())
      for (std::size_t d = 0; d < mixed.size(); ++d) mixed[d] += w_data * query.data[d];
    if (!query.labels.empty())
      for (std::size_t d = 0; d < mixed.size(); ++d) mixed[d] += w_l * query.labels[d];

    const auto ranked = sort_ranked("", ids, mixed, cutoff);
    std::vector<double> grades;
    grades.reserve(ranked.entries.size());
    for (const auto& [id, score] : ranked.entries) grades.push_back(qrels.grade(query.task, id));
    total += ndcg_at_k(grades, query.judged, cutoff);
  }
  return total / static_cast<double>(queries.size());
}

std::vector<double> weight_grid(bool forced) {
  std::vector<double> grid;
  for (int i = forced ? 1 : 0; i <= 20; ++i) grid.push_back(static_cast<double>(i) / 20.0);
  return grid;
}

}  // namespace

RankerConfig tune_weights(const Corpus& corpus, const TaskSet& tasks, const Qrels& qrels,
                          const RankerConfig& base, const EmbeddingStore* store,
                          int metric_cutoff) {
  if (qrels.by_task.empty()) throw Error("cannot tune weights with empty qrels");
  base.validate();

  const Ranker ranker(corpus, base, store);
  std::vector<std::string> ids;
  ids.reserve(corpus.datasets.size());
  for (const auto& ds : corpus.datasets) ids.push_back(ds.id);

  // Field scores do not depend on the weights, so cache them per query.
  std::vector<QueryCache> queries;
  for (const auto& task : tasks.tasks)
    for (const auto& query_text : task.queries) {
      QueryCache cache;
      cache.task = task.id;
      cache.judged = qrels.judged_grades(task.id);
      const auto tokens = tokenize_text(query_text);
      if (base.use_text) cache.text = ranker.mixed_scores(tokens, 1.0, 0.0, 0.0);
      if (base.use_data) cache.data = ranker.mixed_scores(tokens, 0.0, 1.0, 0.0);
      if (base.use_labels) cache.labels = ranker.mixed_scores(tokens, 0.0, 0.0, 1.0);
      queries.push_back(std::move(cache));
    }
  if (queries.empty()) throw Error("cannot tune weights with an empty task set");

  RankerConfig tuned = base;
  double best = mean_metric(queries, qrels, ids, tuned.w_text, tuned.w_data, tuned.w_l,
                            metric_cutoff);

  struct Coord {
    bool enabled;
    bool forced;
    double* weight;
  };
  Coord coords[3] = {{tuned.use_text, tuned.force_text, &tuned.w_text},
                     {tuned.use_data, tuned.force_data, &tuned.w_data},
                     {tuned.use_labels, tuned.force_labels, &tuned.w_l}};

  constexpr double kMinGain = 1e-6;
  for (;;) {
    bool improved = false;
    for (const auto& coord : coords) {
      if (!coord.enabled) continue;
      const double saved = *coord.weight;
      // scan ascending; ties keep the smallest maximizing weight
      double scan_metric = -1.0, scan_weight = saved;
      for (const double w : weight_grid(coord.forced)) {
        *coord.weight = w;
        const double metric = mean_metric(queries, qrels, ids, tuned.w_text, tuned.w_data,
                                          tuned.w_l, metric_cutoff);
        if (metric > scan_metric + 1e-12) {
          scan_metric = metric;
          scan_weight = w;
        }
      }
      if (scan_metric > best + kMinGain) {
        best = scan_metric;
        *coord.weight = scan_weight;
        improved = true;
      } else {
        *coord.weight = saved;  // no ascent step improves this coordinate
      }
    }
    if (!improved) break;
  }
  return tuned;
}

}  // namespace dsearch
