#include "dsearch/ranking.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dsearch/common.hpp"
#include "dsearch/transport.hpp"

namespace dsearch {

void RankerConfig::validate() const {
  if (w_text < 0 || w_data < 0 || w_l < 0) throw Error("field weights must be nonnegative");
  if (!( (use_text && w_text > 0) || (use_data && w_data > 0) || (use_labels && w_l > 0) ))
    throw Error("at least one enabled field must have a positive weight");
  if (depth < 1) throw Error("ranking depth must be >= 1");
  if (!(wmd_floor <= 0)) throw Error("wmd floor must be <= 0");
}

namespace {

double euclidean(const std::vector<float>& a, const std::vector<float>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

double wmd(const WeightedPointCloud& a, const WeightedPointCloud& b) {
  if (a.empty() || b.empty()) throw Error("WMD requires non-empty point clouds");
  std::vector<double> cost(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      cost[i * b.size() + j] = euclidean(a.points[i], b.points[j]);
  return transport_min_cost(a.weights, b.weights, cost);
}

double score_labels(const EmbeddingStore& store, std::span<const std::string> query_tokens,
                    std::span<const std::string> label_tokens, double floor,
                    std::size_t cloud_cap) {
  const auto q = truncate_cloud(embed_tokens(store, query_tokens), cloud_cap);
  const auto l = truncate_cloud(embed_tokens(store, label_tokens), cloud_cap);
  if (q.empty() || l.empty()) return floor;
  return -wmd(q, l);
}

std::array<double, 5> semantic_features(const EmbeddingStore& store,
                                        std::span<const std::string> query_tokens,
                                        std::span<const std::string> label_tokens, double floor,
                                        std::size_t cloud_cap) {
  std::array<double, 5> out{0.0, 0.0, 0.0, 0.0, floor};
  const auto q = truncate_cloud(embed_tokens(store, query_tokens), cloud_cap);
  const auto l = truncate_cloud(embed_tokens(store, label_tokens), cloud_cap);
  if (q.empty() || l.empty()) return out;

  const auto centroid = [](const WeightedPointCloud& cloud) {
    std::vector<double> c(cloud.points[0].size(), 0.0);
    for (std::size_t i = 0; i < cloud.size(); ++i)
      for (std::size_t d = 0; d < c.size(); ++d)
        c[d] += cloud.weights[i] * static_cast<double>(cloud.points[i][d]);
    return c;
  };
  out[0] = cosine(centroid(q), centroid(l));  // early fusion

  double max_cos = -1.0, sum_cos = 0.0;
  for (const auto& qp : q.points)
    for (const auto& lp : l.points) {
      double dot = 0.0;
      for (std::size_t d = 0; d < qp.size(); ++d)
        dot += static_cast<double>(qp[d]) * static_cast<double>(lp[d]);
      max_cos = std::max(max_cos, dot);  // unit vectors: dot is the cosine
      sum_cos += dot;
    }
  const auto pairs = static_cast<double>(q.size() * l.size());
  out[1] = max_cos;
  out[2] = sum_cos / pairs;
  out[3] = sum_cos;
  out[4] = -wmd(q, l);
  return out;
}

Ranker::Ranker(const Corpus& corpus, const RankerConfig& cfg, const EmbeddingStore* store)
    : corpus_(&corpus), cfg_(cfg), store_(store) {
  cfg_.validate();
  if (cfg_.use_text) text_index_ = build_index(corpus, Field::text);
  if (cfg_.use_data) data_index_ = build_index(corpus, Field::data);
  if (cfg_.use_labels) {
    if (store_ == nullptr) throw Error("labels field enabled but no embedding store given");
    label_docs_.resize(corpus.datasets.size());
    for (std::size_t d = 0; d < corpus.datasets.size(); ++d) {
      auto& doc = label_docs_[d];
      const auto& ds = corpus.datasets[d];
      for (const auto& col : ds.generated_labels)
        for (const auto& gl : col)
          for (auto& t : split_tokens(gl.label)) doc.push_back(std::move(t));
      if (cfg_.include_original_labels_in_wmd)
        for (const auto& col : ds.columns)
          for (const auto& t : col.label_tokens) doc.push_back(t);
    }
  }
}

std::vector<double> Ranker::field_scores(Field field,
                                         std::span<const std::string> query_tokens) const {
  const std::size_t n = corpus_->datasets.size();
  std::vector<double> scores(n, 0.0);
  switch (field) {
    case Field::text:
      if (!text_index_) throw Error("text field is not enabled in this ranker");
      for (std::size_t d = 0; d < n; ++d)
        scores[d] = bm25_score(*text_index_, query_tokens, static_cast<int>(d),
                               cfg_.text_bm25.k1, cfg_.text_bm25.b);
      break;
    case Field::data:
      if (!data_index_) throw Error("data field is not enabled in this ranker");
      for (std::size_t d = 0; d < n; ++d)
        scores[d] = bm25_score(*data_index_, query_tokens, static_cast<int>(d),
                               cfg_.data_bm25.k1, cfg_.data_bm25.b);
      break;
    case Field::labels_gen:
      if (label_docs_.empty() && n > 0) throw Error("labels field is not enabled in this ranker");
      for (std::size_t d = 0; d < n; ++d)
        scores[d] = score_labels(*store_, query_tokens, label_docs_[d], cfg_.wmd_floor,
                                 cfg_.wmd_cloud_cap);
      break;
    default:
      throw Error("field '" + field_name(field) + "' is not scored by the mixed ranker");
  }
  return scores;
}

std::vector<double> Ranker::normalized_field_scores(
    Field field, std::span<const std::string> query_tokens) const {
  auto scores = field_scores(field, query_tokens);
  if (cfg_.normalization == RankerConfig::Normalization::none) return scores;
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it, hi = *hi_it;
  if (hi - lo <= 0.0) {
    std::fill(scores.begin(), scores.end(), 0.0);  // constant field carries no signal
    return scores;
  }
  for (auto& s : scores) s = (s - lo) / (hi - lo);
  return scores;
}

std::vector<double> Ranker::mixed_scores(std::span<const std::string> query_tokens, double w_text,
                                         double w_data, double w_l) const {
  const std::size_t n = corpus_->datasets.size();
  std::vector<double> mixed(n, 0.0);
  if (cfg_.use_text && w_text != 0.0) {
    const auto s = normalized_field_scores(Field::text, query_tokens);
    for (std::size_t d = 0; d < n; ++d) mixed[d] += w_text * s[d];
  }
  if (cfg_.use_data && w_data != 0.0) {
    const auto s = normalized_field_scores(Field::data, query_tokens);
    for (std::size_t d = 0; d < n; ++d) mixed[d] += w_data * s[d];
  }
  if (cfg_.use_labels && w_l != 0.0) {
    const auto s = normalized_field_scores(Field::labels_gen, query_tokens);
    for (std::size_t d = 0; d < n; ++d) mixed[d] += w_l * s[d];
  }
  return mixed;
}

std::vector<double> Ranker::mixed_scores(std::span<const std::string> query_tokens) const {
  return mixed_scores(query_tokens, cfg_.w_text, cfg_.w_data, cfg_.w_l);
}

RankedList sort_ranked(const std::string& query_id, std::span<const std::string> dataset_ids,
                       std::span<const double> scores, int depth) {
  std::vector<std::size_t> order(dataset_ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return dataset_ids[a] < dataset_ids[b];
  });
  RankedList out;
  out.query_id = query_id;
  const std::size_t keep = std::min<std::size_t>(order.size(), static_cast<std::size_t>(depth));
  out.entries.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i)
    out.entries.emplace_back(dataset_ids[order[i]], scores[order[i]]);
  return out;
}

RankedList Ranker::rank(const std::string& query_id, const std::string& query_text) const {
  const auto tokens = tokenize_text(query_text);
  const auto scores = mixed_scores(tokens);
  std::vector<std::string> ids;
  ids.reserve(corpus_->datasets.size());
  for (const auto& ds : corpus_->datasets) ids.push_back(ds.id);
  return sort_ranked(query_id, ids, scores, cfg_.depth);
}

RunFile Ranker::run_all(const TaskSet& tasks, const std::string& tag) const {
  RunFile run;
  run.tag = tag;
  for (const auto& task : tasks.tasks)
    for (std::size_t q = 0; q < task.queries.size(); ++q) {
      const std::string topic = task.id + ".q" + std::to_string(q);
      auto ranked = rank(topic, task.queries[q]);
      run.entries.push_back(RunEntry{topic, std::move(ranked.entries)});
    }
  return run;
}

void save_run(const RunFile& run, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  char buf[32];
  for (const auto& entry : run.entries) {
    int rank = 1;
    for (const auto& [id, score] : entry.ranked) {
      std::snprintf(buf, sizeof(buf), "%.6f", score);
      out << entry.topic << " Q0 " << id << ' ' << rank++ << ' ' << buf << ' ' << run.tag << '\n';
    }
  }
}

RunFile load_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  RunFile run;
  std::string line;
  std::size_t line_no = 0;
  std::string last_topic;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string topic, q0, id, tag;
    long rank = 0;
    double score = 0.0;
    if (!(ls >> topic >> q0 >> id >> rank >> score >> tag) || q0 != "Q0")
      throw Error(path.string() + ":" + std::to_string(line_no) + ": malformed run line");
    run.tag = tag;
    if (run.entries.empty() || topic != last_topic) {
      run.entries.push_back(RunEntry{topic, {}});
      last_topic = topic;
    }
    auto& entry = run.entries.back();
    if (rank != static_cast<long>(entry.ranked.size()) + 1)
      throw Error(path.string() + ":" + std::to_string(line_no) + ": ranks must be contiguous from 1");
    entry.ranked.emplace_back(id, score);
  }
  return run;
}

std::string field_summary(const RankerConfig& cfg) {
  std::string out;
  auto add = [&](const char* part) {
    if (!out.empty()) out += '+';
    out += part;
  };
  if (cfg.use_text) add("T+D");
  if (cfg.use_data) add("DT");
  if (cfg.use_labels) add("G");
  return out.empty() ? "-" : out;
}

std::string topic_task(const std::string& topic) {
  const auto pos = topic.rfind(".q");
  if (pos == std::string::npos || pos + 2 >= topic.size()) return topic;
  for (std::size_t i = pos + 2; i < topic.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(topic[i]))) return topic;
  return topic.substr(0, pos);
}

}  // namespace dsearch
