#include <algorithm>
#include <vector>

#include "dsearch/common.hpp"
#include "dsearch/eval.hpp"
#include "dsearch/ranking.hpp"

namespace dsearch {

Scorer parse_scorer(const std::string& name) {
  if (name == "bm25") return Scorer::bm25;
  if (name == "tfidf" || name == "tf-idf") return Scorer::tfidf;
  if (name == "lm-jm") return Scorer::lm_jm;
  if (name == "lm-dirichlet" || name == "lm-dir") return Scorer::lm_dirichlet;
  throw Error("unknown scorer '" + name + "' (bm25|tfidf|lm-jm|lm-dirichlet)");
}

std::string scorer_name(Scorer scorer) {
  switch (scorer) {
    case Scorer::bm25: return "bm25";
    case Scorer::tfidf: return "tfidf";
    case Scorer::lm_jm: return "lm-jm";
    case Scorer::lm_dirichlet: return "lm-dirichlet";
  }
  return "?";
}

std::vector<double> baseline_scores(const FieldIndex& index, Scorer scorer,
                                    const ScorerParams& params,
                                    std::span<const std::string> query_tokens) {
  std::vector<double> scores(index.num_docs, 0.0);
  for (std::size_t d = 0; d < index.num_docs; ++d) {
    const int doc = static_cast<int>(d);
    switch (scorer) {
      case Scorer::bm25:
        scores[d] = bm25_score(index, query_tokens, doc, params.bm25.k1, params.bm25.b);
        break;
      case Scorer::tfidf:
        scores[d] = tfidf_score(index, query_tokens, doc);
        break;
      case Scorer::lm_jm:
        scores[d] = lm_jm_score(index, query_tokens, doc, params.lm_lambda);
        break;
      case Scorer::lm_dirichlet:
        scores[d] = lm_dirichlet_score(index, query_tokens, doc, params.lm_mu);
        break;
    }
  }
  return scores;
}

RankedList baseline_rank(const FieldIndex& index, Scorer scorer, const ScorerParams& params,
                         const std::string& query_id, const std::string& query_text, int depth) {
  const auto tokens = tokenize_text(query_text);
  const auto scores = baseline_scores(index, scorer, params, tokens);
  return sort_ranked(query_id, index.doc_ids, scores, depth);
}

RunFile baseline_run_all(const Corpus& corpus, Field field, Scorer scorer,
                         const ScorerParams& params, const TaskSet& tasks,
                         const std::string& tag, int depth) {
  const auto index = build_index(corpus, field);
  RunFile run;
  run.tag = tag;
  for (const auto& task : tasks.tasks)
    for (std::size_t q = 0; q < task.queries.size(); ++q) {
      const std::string topic = task.id + ".q" + std::to_string(q);
      auto ranked = baseline_rank(index, scorer, params, topic, task.queries[q], depth);
      run.entries.push_back(RunEntry{topic, std::move(ranked.entries)});
    }
  return run;
}

namespace {

double mean_ndcg(const FieldIndex& index, Scorer scorer, const ScorerParams& params,
                 const TaskSet& tasks, const Qrels& qrels, int cutoff) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& task : tasks.tasks) {
    const auto judged = qrels.judged_grades(task.id);
    for (const auto& query : task.queries) {
      const auto ranked = baseline_rank(index, scorer, params, "q", query, cutoff);
      std::vector<double> grades;
      grades.reserve(ranked.entries.size());
      for (const auto& [id, s] : ranked.entries) grades.push_back(qrels.grade(task.id, id));
      total += ndcg_at_k(grades, judged, cutoff);
      ++count;
    }
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

}  // namespace

ScorerParams grid_search_scorer(const Corpus& corpus, Field field, Scorer scorer,
                                const TaskSet& tasks, const Qrels& qrels, int metric_cutoff) {
  if (qrels.by_task.empty()) throw Error("grid search requires non-empty qrels");
  const auto index = build_index(corpus, field);

  std::vector<ScorerParams> grid;
  switch (scorer) {
    case Scorer::bm25:
      for (int k1 = 0; k1 <= 7; ++k1)
        for (int b = 1; b <= 9; ++b) {
          ScorerParams p;
          p.bm25 = {0.6 + 0.2 * k1, 0.1 * b};
          grid.push_back(p);
        }
      break;
    case Scorer::tfidf:
      grid.push_back({});
      break;
    case Scorer::lm_jm:
      for (int l = 1; l <= 9; ++l) {
        ScorerParams p;
        p.lm_lambda = 0.1 * l;
        grid.push_back(p);
      }
      break;
    case Scorer::lm_dirichlet:
      for (const double mu : {250.0, 500.0, 1000.0, 2000.0, 5000.0}) {
        ScorerParams p;
        p.lm_mu = mu;
        grid.push_back(p);
      }
      break;
  }

  ScorerParams best = grid.front();
  double best_metric = -1.0;
  for (const auto& params : grid) {
    const double metric = mean_ndcg(index, scorer, params, tasks, qrels, metric_cutoff);
    if (metric > best_metric + 1e-12) {  // ties keep the first grid point
      best_metric = metric;
      best = params;
    }
  }
  return best;
}

}  // namespace dsearch
