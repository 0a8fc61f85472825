#include "dsearch/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "dsearch/common.hpp"

namespace dsearch {

double Qrels::grade(const std::string& task, const std::string& dataset) const {
  const auto t = by_task.find(task);
  if (t == by_task.end()) return 0.0;
  const auto d = t->second.find(dataset);
  return d == t->second.end() ? 0.0 : d->second;
}

std::vector<double> Qrels::judged_grades(const std::string& task) const {
  std::vector<double> grades;
  const auto t = by_task.find(task);
  if (t == by_task.end()) return grades;
  grades.reserve(t->second.size());
  for (const auto& [id, g] : t->second) grades.push_back(g);
  return grades;
}

Qrels load_qrels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  Qrels qrels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string task, zero, dataset;
    double grade = 0.0;
    if (!(ls >> task >> zero >> dataset >> grade))
      throw Error(path.string() + ":" + std::to_string(line_no) + ": malformed qrels line");
    if (grade < 0.0 || grade > 3.0)
      throw Error(path.string() + ":" + std::to_string(line_no) + ": grade outside [0, 3]");
    qrels.by_task[task][dataset] = grade;
  }
  if (qrels.by_task.empty()) throw Error(path.string() + ": empty qrels file");
  return qrels;
}

void save_qrels(const Qrels& qrels, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  char buf[32];
  for (const auto& [task, docs] : qrels.by_task)
    for (const auto& [dataset, grade] : docs) {
      std::snprintf(buf, sizeof(buf), "%g", grade);
      out << task << " 0 " << dataset << ' ' << buf << '\n';
    }
}

double ndcg_at_k(std::span<const double> ranked_grades, std::span<const double> judged_grades,
                 int k) {
  if (k < 1) throw Error("NDCG cutoff must be >= 1");
  const auto gain = [](double g) { return std::exp2(g) - 1.0; };
  double dcg = 0.0;
  const std::size_t depth = std::min<std::size_t>(ranked_grades.size(), static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < depth; ++i)
    dcg += gain(ranked_grades[i]) / std::log2(static_cast<double>(i) + 2.0);

  std::vector<double> ideal(judged_grades.begin(), judged_grades.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double idcg = 0.0;
  const std::size_t ideal_depth = std::min<std::size_t>(ideal.size(), static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < ideal_depth; ++i)
    idcg += gain(ideal[i]) / std::log2(static_cast<double>(i) + 2.0);

  return idcg > 0.0 ? dcg / idcg : 0.0;
}

double precision_at_k(std::span<const double> ranked_grades, int k, double rel_threshold) {
  if (k < 1) throw Error("precision cutoff must be >= 1");
  std::size_t relevant = 0;
  const std::size_t depth = std::min<std::size_t>(ranked_grades.size(), static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < depth; ++i)
    if (ranked_grades[i] >= rel_threshold) ++relevant;
  return static_cast<double>(relevant) / static_cast<double>(k);
}

namespace {

// continued fraction for the regularized incomplete beta (Lentz's method)
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14, kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log(1.0 - x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("paired t-test requires equal-length score vectors");
  const std::size_t n = a.size();
  if (n < 2) throw Error("paired t-test requires at least 2 pairs");

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (a[i] - b[i]) - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) {
    if (mean == 0.0) return {0.0, 1.0};
    return {mean > 0 ? std::numeric_limits<double>::infinity()
                     : -std::numeric_limits<double>::infinity(),
            0.0};
  }
  const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
  const double df = static_cast<double>(n - 1);
  const double p = incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
  return {t, p};
}

std::set<std::pair<std::string, std::string>> pool_results(const std::vector<RunFile>& runs,
                                                           int depth) {
  if (runs.empty()) throw Error("pooling requires at least one run");
  if (depth < 1) throw Error("pool depth must be >= 1");
  std::set<std::pair<std::string, std::string>> pool;
  for (const auto& run : runs)
    for (const auto& entry : run.entries) {
      const std::string task = topic_task(entry.topic);
      const std::size_t n = std::min<std::size_t>(entry.ranked.size(), static_cast<std::size_t>(depth));
      for (std::size_t i = 0; i < n; ++i) pool.emplace(task, entry.ranked[i].first);
    }
  return pool;
}

MetricReport evaluate(const RunFile& run, const Qrels& qrels, const std::vector<int>& ks,
                      double rel_threshold, const std::string& fields) {
  if (run.entries.empty()) throw Error("run file has no entries");

  std::set<std::string> unknown;
  for (const auto& entry : run.entries)
    if (!qrels.has_task(topic_task(entry.topic))) unknown.insert(topic_task(entry.topic));
  if (!unknown.empty()) {
    std::string list;
    for (const auto& t : unknown) list += (list.empty() ? "" : ", ") + t;
    throw Error("run references task ids missing from the qrels: " + list);
  }

  MetricReport report;
  report.method = run.tag;
  report.fields = fields;
  report.ks = ks;
  for (const int k : ks) {
    report.ndcg[k] = 0.0;
    report.precision[k] = 0.0;
  }

  for (const auto& entry : run.entries) {
    const std::string task = topic_task(entry.topic);
    std::vector<double> grades;
    grades.reserve(entry.ranked.size());
    for (const auto& [id, score] : entry.ranked) grades.push_back(qrels.grade(task, id));
    const auto judged = qrels.judged_grades(task);
    for (const int k : ks) {
      const double nd = ndcg_at_k(grades, judged, k);
      report.ndcg[k] += nd;
      report.per_query_ndcg[k].push_back(nd);
      report.precision[k] += precision_at_k(grades, k, rel_threshold);
    }
  }
  const auto n = static_cast<double>(run.entries.size());
  for (const int k : ks) {
    report.ndcg[k] /= n;
    report.precision[k] /= n;
  }
  return report;
}

void save_report(std::span<const MetricReport> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  if (rows.empty()) throw Error("no metric rows to write");

  out << "method\tfields";
  for (const int k : rows[0].ks) out << "\tndcg@" << k;
  for (const int k : rows[0].ks) out << "\tp@" << k;
  out << '\n';

  char buf[32];
  for (const auto& row : rows) {
    out << row.method << '\t' << row.fields;
    for (const int k : row.ks) {
      std::snprintf(buf, sizeof(buf), "%.4f", row.ndcg.at(k));
      out << '\t' << buf;
    }
    for (const int k : row.ks) {
      std::snprintf(buf, sizeof(buf), "%.4f", row.precision.at(k));
      out << '\t' << buf;
    }
    out << '\n';
  }
}

}  // namespace dsearch
