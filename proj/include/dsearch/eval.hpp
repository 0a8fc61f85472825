#pragma once

// Graded-relevance retrieval metrics, pooling and the paired t-test.

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dsearch/ranking.hpp"

namespace dsearch {

struct Qrels {
  // task -> dataset -> grade in [0, 3]; fractional grades come from
  // judge-averaging and are used as-is
  std::map<std::string, std::map<std::string, double>> by_task;

  double grade(const std::string& task, const std::string& dataset) const;
  bool has_task(const std::string& task) const { return by_task.count(task) > 0; }
  // all judged grades of a task (the ideal-ranking pool)
  std::vector<double> judged_grades(const std::string& task) const;
};

// TREC format "task_id 0 dataset_id grade"; grades may be fractional.
Qrels load_qrels(const std::filesystem::path& path);
void save_qrels(const Qrels& qrels, const std::filesystem::path& path);

// Burges gain 2^grade - 1 with log2(i+1) discount; the ideal ranking comes
// from all judged grades of the task; IDCG = 0 yields 0.
double ndcg_at_k(std::span<const double> ranked_grades, std::span<const double> judged_grades,
                 int k);

// Fraction of the top k at or above the threshold; short lists count the
// missing tail as non-relevant.
double precision_at_k(std::span<const double> ranked_grades, int k, double rel_threshold = 2.0);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;  // two-sided
};

// Paired Student t-test over per-query scores; all-zero differences give
// t = 0, p = 1.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

// Union of the top-depth entries per topic over all runs, keyed by task.
std::set<std::pair<std::string, std::string>> pool_results(const std::vector<RunFile>& runs,
                                                           int depth);

struct MetricReport {
  std::string method;
  std::string fields;
  std::vector<int> ks;
  std::map<int, double> ndcg;       // mean over queries per cutoff
  std::map<int, double> precision;  // mean over queries per cutoff
  // per-query NDCG per cutoff, in run order (feeds significance tests)
  std::map<int, std::vector<double>> per_query_ndcg;
};

// Per-query metrics averaged over all of a run's queries; queries inherit
// their task's judgments. Unknown task ids raise an error listing them.
MetricReport evaluate(const RunFile& run, const Qrels& qrels,
                      const std::vector<int>& ks = {5, 10, 20, 50}, double rel_threshold = 2.0,
                      const std::string& fields = "-");

// Tab-separated table: method, fields, then NDCG@k and P@k columns.
void save_report(std::span<const MetricReport> rows, const std::filesystem::path& path);

}  // namespace dsearch
