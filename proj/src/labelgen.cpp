#include "dsearch/labelgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "dsearch/common.hpp"

namespace dsearch {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool parse_numeric(const std::string& raw, double& out) {
  const std::string s = trim(raw);
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

bool is_alphabetic_value(const std::string& s) {
  bool has_letter = false;
  for (const char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalpha(c)) has_letter = true;
    else if (c != ' ') return false;
  }
  return has_letter;
}

bool is_date_like(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return false;
  // bare year
  if (s.size() == 4 && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
    const int year = std::atoi(s.c_str());
    return year >= 1500 && year <= 2999;
  }
  // 2 or 3 digit groups separated by '-' or '/'
  std::vector<std::size_t> group_lens{0};
  for (const char ch : s) {
    if (std::isdigit(static_cast<unsigned char>(ch))) ++group_lens.back();
    else if (ch == '-' || ch == '/') group_lens.push_back(0);
    else return false;
  }
  if (group_lens.size() < 2 || group_lens.size() > 3) return false;
  for (const std::size_t len : group_lens)
    if (len < 1 || len > 4) return false;
  return true;
}

std::size_t token_count(const std::string& s) {
  std::istringstream in(s);
  std::string tok;
  std::size_t count = 0;
  while (in >> tok) ++count;
  return count;
}

}  // namespace

std::vector<double> curated_features(const Column& column) {
  std::vector<double> f(kCuratedDims, 0.0);
  const auto& values = column.values;
  if (values.empty()) return f;

  std::set<std::string> distinct;
  std::size_t non_empty = 0, empty = 0, numeric = 0, alphabetic = 0, date_like = 0;
  double len_sum = 0, len_sq_sum = 0, num_sum = 0, num_sq_sum = 0, tok_sum = 0;
  std::size_t max_len = 0;

  for (const auto& v : values) {
    max_len = std::max(max_len, v.size());
    if (v.empty()) {
      ++empty;
      continue;
    }
    ++non_empty;
    distinct.insert(v);
    const auto len = static_cast<double>(v.size());
    len_sum += len;
    len_sq_sum += len * len;
    double num;
    if (parse_numeric(v, num)) {
      ++numeric;
      num_sum += num;
      num_sq_sum += num * num;
    }
    if (is_alphabetic_value(v)) ++alphabetic;
    if (is_date_like(v)) ++date_like;
    tok_sum += static_cast<double>(token_count(v));
  }

  auto pop_std = [](double sum, double sq_sum, std::size_t n) {
    if (n == 0) return 0.0;
    const double mean = sum / static_cast<double>(n);
    const double var = sq_sum / static_cast<double>(n) - mean * mean;
    return var > 0 ? std::sqrt(var) : 0.0;
  };

  f[0] = static_cast<double>(values.size());
  if (non_empty > 0) {
    const auto ne = static_cast<double>(non_empty);
    f[1] = static_cast<double>(distinct.size()) / ne;
    f[2] = static_cast<double>(numeric) / ne;
    f[3] = len_sum / ne;
    f[4] = pop_std(len_sum, len_sq_sum, non_empty);
    f[8] = static_cast<double>(alphabetic) / ne;
    f[9] = static_cast<double>(date_like) / ne;
    f[10] = tok_sum / ne;
  }
  if (numeric > 0) {
    f[5] = num_sum / static_cast<double>(numeric);
    f[6] = pop_std(num_sum, num_sq_sum, numeric);
  }
  f[7] = static_cast<double>(empty) / static_cast<double>(values.size());
  f[11] = static_cast<double>(max_len);
  return f;
}

namespace {

// embedding part of x for one column
std::vector<double> embedding_part(const Dataset& ds, std::size_t col, const FactorModel& model,
                                   const LabelVocab& vocab, const LabelGenConfig& cfg) {
  const auto k = static_cast<std::size_t>(model.k);
  std::vector<double> emb(k, 0.0);
  if (!cfg.sibling_mean_embedding) {
    const auto& tokens = ds.columns[col].label_tokens;
    if (tokens.empty()) return emb;
    const int id = vocab.id(join_tokens(tokens));
    if (id < 0) return emb;
    const double* beta = model.beta(static_cast<std::size_t>(id));
    emb.assign(beta, beta + k);
    return emb;
  }
  std::size_t count = 0;
  for (std::size_t other = 0; other < ds.columns.size(); ++other) {
    if (other == col || ds.columns[other].label_tokens.empty()) continue;
    const int id = vocab.id(join_tokens(ds.columns[other].label_tokens));
    if (id < 0) continue;
    const double* beta = model.beta(static_cast<std::size_t>(id));
    for (std::size_t d = 0; d < k; ++d) emb[d] += beta[d];
    ++count;
  }
  if (count > 0)
    for (auto& x : emb) x /= static_cast<double>(count);
  return emb;
}

}  // namespace

std::vector<double> column_features(const Dataset& ds, std::size_t col, const FactorModel& model,
                                    const LabelVocab& vocab, const LabelGenConfig& cfg) {
  auto x = curated_features(ds.columns[col]);
  const auto emb = embedding_part(ds, col, model, vocab, cfg);
  x.insert(x.end(), emb.begin(), emb.end());
  return x;
}

TrainingSet build_training_set(const Corpus& corpus, const FactorModel& model,
                               const LabelVocab& vocab, const LabelGenConfig& cfg) {
  TrainingSet ts;
  ts.feature_dim = kCuratedDims + model.k;
  ts.n_labels = static_cast<int>(vocab.size());
  for (const auto& ds : corpus.datasets) {
    for (std::size_t col = 0; col < ds.columns.size(); ++col) {
      const auto& tokens = ds.columns[col].label_tokens;
      if (tokens.empty()) continue;  // unlabeled columns carry no target
      const int id = vocab.id(join_tokens(tokens));
      if (id < 0) continue;
      ts.x.push_back(column_features(ds, col, model, vocab, cfg));
      ts.y.push_back(id);
    }
  }
  return ts;
}

namespace {

struct TreeBuilder {
  const TrainingSet& ts;
  int mtry;
  Rng rng;
  RandomForest& forest;
  RandomForest::Tree tree;
  std::vector<int> samples;  // bootstrap indices, partitioned in place

  int make_leaf(int lo, int hi) {
    std::vector<int> ys;
    ys.reserve(static_cast<std::size_t>(hi - lo));
    for (int i = lo; i < hi; ++i)
      ys.push_back(ts.y[static_cast<std::size_t>(samples[static_cast<std::size_t>(i)])]);
    std::sort(ys.begin(), ys.end());

    std::vector<std::pair<int, double>> dist;
    const auto total = static_cast<double>(hi - lo);
    for (std::size_t i = 0; i < ys.size();) {
      std::size_t j = i;
      while (j < ys.size() && ys[j] == ys[i]) ++j;
      dist.emplace_back(ys[i], static_cast<double>(j - i) / total);
      i = j;
    }
    forest.leaf_dists.push_back(std::move(dist));

    RandomForest::Node node;
    node.leaf = static_cast<int>(forest.leaf_dists.size()) - 1;
    tree.nodes.push_back(node);
    return static_cast<int>(tree.nodes.size()) - 1;
  }

  bool is_pure(int lo, int hi) const {
    const int first = ts.y[static_cast<std::size_t>(samples[static_cast<std::size_t>(lo)])];
    for (int i = lo + 1; i < hi; ++i)
      if (ts.y[static_cast<std::size_t>(samples[static_cast<std::size_t>(i)])] != first) return false;
    return true;
  }

  // Best threshold for one feature; impurity = sum over sides of
  // n_side * gini_side. Returns false when the feature is constant here.
  bool best_split_on(int feature, int lo, int hi, double& best_impurity, double& best_thr) {
    const int n = hi - lo;
    std::vector<std::pair<double, int>> vals;  // (value, label)
    vals.reserve(static_cast<std::size_t>(n));
    for (int i = lo; i < hi; ++i) {
      const int s = samples[static_cast<std::size_t>(i)];
      vals.emplace_back(ts.x[static_cast<std::size_t>(s)][static_cast<std::size_t>(feature)],
                        ts.y[static_cast<std::size_t>(s)]);
    }
    std::sort(vals.begin(), vals.end());
    if (vals.front().first == vals.back().first) return false;

    std::vector<int> right_counts(static_cast<std::size_t>(ts.n_labels), 0);
    std::vector<int> left_counts(static_cast<std::size_t>(ts.n_labels), 0);
    double sumsq_right = 0.0;
    for (const auto& [v, y] : vals) {
      auto& c = right_counts[static_cast<std::size_t>(y)];
      sumsq_right += 2.0 * c + 1.0;  // (c+1)^2 - c^2
      ++c;
    }
    double sumsq_left = 0.0;
    bool found = false;
    for (int i = 0; i < n - 1; ++i) {
      const int y = vals[static_cast<std::size_t>(i)].second;
      auto& cl = left_counts[static_cast<std::size_t>(y)];
      auto& cr = right_counts[static_cast<std::size_t>(y)];
      sumsq_left += 2.0 * cl + 1.0;
      ++cl;
      sumsq_right -= 2.0 * cr - 1.0;  // c^2 - (c-1)^2
      --cr;
      const double v = vals[static_cast<std::size_t>(i)].first;
      const double v_next = vals[static_cast<std::size_t>(i) + 1].first;
      if (v == v_next) continue;
      const double n_left = i + 1, n_right = n - i - 1;
      const double impurity = (n_left - sumsq_left / n_left) + (n_right - sumsq_right / n_right);
      if (!found || impurity < best_impurity) {
        found = true;
        best_impurity = impurity;
        best_thr = v + (v_next - v) / 2.0;
      }
    }
    return found;
  }

  int build(int lo, int hi) {
    if (hi - lo < 2 || is_pure(lo, hi)) return make_leaf(lo, hi);

    std::vector<int> features(static_cast<std::size_t>(ts.feature_dim));
    std::iota(features.begin(), features.end(), 0);
    for (std::size_t i = features.size() - 1; i > 0; --i)
      std::swap(features[i], features[rng.next_index(i + 1)]);

    int best_feature = -1;
    double best_impurity = 0.0, best_thr = 0.0;
    for (std::size_t fi = 0; fi < features.size(); ++fi) {
      double impurity = 0.0, thr = 0.0;
      if (best_split_on(features[fi], lo, hi, impurity, thr) &&
          (best_feature < 0 || impurity < best_impurity)) {
        best_feature = features[fi];
        best_impurity = impurity;
        best_thr = thr;
      }
      // past the mtry candidates, keep scanning only until something splits
      if (fi + 1 >= static_cast<std::size_t>(mtry) && best_feature >= 0) break;
    }
    if (best_feature < 0) return make_leaf(lo, hi);  // all features constant

    const auto begin = samples.begin() + lo, end = samples.begin() + hi;
    const auto mid = std::stable_partition(begin, end, [&](int s) {
      return ts.x[static_cast<std::size_t>(s)][static_cast<std::size_t>(best_feature)] <= best_thr;
    });
    const int split = lo + static_cast<int>(mid - begin);

    RandomForest::Node node;
    node.feature = best_feature;
    node.threshold = best_thr;
    tree.nodes.push_back(node);
    const int self = static_cast<int>(tree.nodes.size()) - 1;
    tree.nodes[static_cast<std::size_t>(self)].left = build(lo, split);
    tree.nodes[static_cast<std::size_t>(self)].right = build(split, hi);
    return self;
  }
};

}  // namespace

RandomForest train_generator(const TrainingSet& training, const LabelGenConfig& cfg) {
  if (training.x.empty()) throw Error("training set is empty");
  if (cfg.trees < 1) throw Error("tree count must be >= 1");

  RandomForest forest;
  forest.feature_dim = training.feature_dim;
  forest.n_labels = training.n_labels;
  const auto n = static_cast<int>(training.x.size());
  const int mtry = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(training.feature_dim)))));

  for (int t = 0; t < cfg.trees; ++t) {
    TreeBuilder builder{training, mtry, Rng(Rng::derive(cfg.seed, static_cast<std::uint64_t>(t))),
                        forest, {}, {}};
    builder.samples.resize(static_cast<std::size_t>(n));
    for (auto& s : builder.samples) s = static_cast<int>(builder.rng.next_index(static_cast<std::size_t>(n)));
    builder.build(0, n);
    forest.trees.push_back(std::move(builder.tree));
  }
  return forest;
}

std::vector<double> predict_proba(const RandomForest& forest, std::span<const double> x) {
  if (static_cast<int>(x.size()) != forest.feature_dim)
    throw Error("feature vector has dimension " + std::to_string(x.size()) + ", expected " +
                std::to_string(forest.feature_dim));
  std::vector<double> probs(static_cast<std::size_t>(forest.n_labels), 0.0);
  for (const auto& tree : forest.trees) {
    int node = 0;
    while (tree.nodes[static_cast<std::size_t>(node)].leaf < 0) {
      const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
      node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
    for (const auto& [label, p] : forest.leaf_dists[static_cast<std::size_t>(
             tree.nodes[static_cast<std::size_t>(node)].leaf)])
      probs[static_cast<std::size_t>(label)] += p;
  }
  const auto t = static_cast<double>(forest.trees.size());
  for (auto& p : probs) p /= t;
  return probs;
}

std::vector<std::pair<int, double>> generate_labels(const RandomForest& forest,
                                                    std::span<const double> x, int top_m,
                                                    double threshold) {
  if (top_m <= 0) return {};
  const auto probs = predict_proba(forest, x);
  std::vector<int> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  const auto cmp = [&](int a, int b) {
    if (probs[static_cast<std::size_t>(a)] != probs[static_cast<std::size_t>(b)])
      return probs[static_cast<std::size_t>(a)] > probs[static_cast<std::size_t>(b)];
    return a < b;
  };
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(top_m), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), cmp);

  std::vector<std::pair<int, double>> out;
  for (std::size_t i = 0; i < keep; ++i) {
    const double p = probs[static_cast<std::size_t>(order[i])];
    if (p < threshold) continue;
    out.emplace_back(order[i], p);
  }
  return out;
}

void generate_for_corpus(Corpus& corpus, const RandomForest& forest, const FactorModel& model,
                         const LabelVocab& vocab, const LabelGenConfig& cfg, int top_m,
                         double threshold) {
  for (auto& ds : corpus.datasets) {
    ds.generated_labels.assign(ds.columns.size(), {});
    for (std::size_t col = 0; col < ds.columns.size(); ++col) {
      const auto x = column_features(ds, col, model, vocab, cfg);
      for (const auto& [id, p] : generate_labels(forest, x, top_m, threshold))
        ds.generated_labels[col].push_back({vocab.labels[static_cast<std::size_t>(id)], p});
    }
  }
}

void save_generated_labels(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  char buf[32];
  for (const auto& ds : corpus.datasets)
    for (std::size_t col = 0; col < ds.generated_labels.size(); ++col)
      for (const auto& gl : ds.generated_labels[col]) {
        std::snprintf(buf, sizeof(buf), "%.9g", gl.probability);
        out << ds.id << '\t' << col << '\t' << gl.label << '\t' << buf << '\n';
      }
}

void load_generated_labels(Corpus& corpus, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < corpus.datasets.size(); ++i) {
    by_id.emplace(corpus.datasets[i].id, i);
    corpus.datasets[i].generated_labels.assign(corpus.datasets[i].columns.size(), {});
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string id, col_str, label, prob_str;
    if (!std::getline(ls, id, '\t') || !std::getline(ls, col_str, '\t') ||
        !std::getline(ls, label, '\t') || !std::getline(ls, prob_str))
      throw Error(path.string() + ":" + std::to_string(line_no) + ": malformed label line");
    const auto it = by_id.find(id);
    if (it == by_id.end())
      throw Error(path.string() + ":" + std::to_string(line_no) + ": unknown dataset id '" + id + "'");
    auto& ds = corpus.datasets[it->second];
    const auto col = static_cast<std::size_t>(std::stoll(col_str));
    if (col >= ds.columns.size())
      throw Error(path.string() + ":" + std::to_string(line_no) + ": column index out of range");
    ds.generated_labels[col].push_back({label, std::stod(prob_str)});
  }
}

void save_forest(const RandomForest& forest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "dsearch-forest 1\n";
  out << forest.trees.size() << ' ' << forest.feature_dim << ' ' << forest.n_labels << ' '
      << forest.leaf_dists.size() << '\n';
  char buf[48];
  for (const auto& tree : forest.trees) {
    out << "tree " << tree.nodes.size() << '\n';
    for (const auto& nd : tree.nodes) {
      std::snprintf(buf, sizeof(buf), "%.17g", nd.threshold);
      out << nd.feature << ' ' << buf << ' ' << nd.left << ' ' << nd.right << ' ' << nd.leaf << '\n';
    }
  }
  for (const auto& dist : forest.leaf_dists) {
    out << dist.size();
    for (const auto& [label, p] : dist) {
      std::snprintf(buf, sizeof(buf), "%.17g", p);
      out << ' ' << label << ' ' << buf;
    }
    out << '\n';
  }
}

RandomForest load_forest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string magic, version;
  in >> magic >> version;
  if (magic != "dsearch-forest" || version != "1")
    throw Error(path.string() + ": not a dsearch-forest v1 file");
  std::size_t n_trees = 0, n_leaves = 0;
  RandomForest forest;
  if (!(in >> n_trees >> forest.feature_dim >> forest.n_labels >> n_leaves))
    throw Error(path.string() + ": malformed forest header");
  for (std::size_t t = 0; t < n_trees; ++t) {
    std::string tag;
    std::size_t n_nodes = 0;
    if (!(in >> tag >> n_nodes) || tag != "tree")
      throw Error(path.string() + ": malformed tree header");
    RandomForest::Tree tree;
    tree.nodes.resize(n_nodes);
    for (auto& nd : tree.nodes)
      if (!(in >> nd.feature >> nd.threshold >> nd.left >> nd.right >> nd.leaf))
        throw Error(path.string() + ": truncated tree");
    forest.trees.push_back(std::move(tree));
  }
  for (std::size_t l = 0; l < n_leaves; ++l) {
    std::size_t count = 0;
    if (!(in >> count)) throw Error(path.string() + ": truncated leaf table");
    std::vector<std::pair<int, double>> dist(count);
    for (auto& [label, p] : dist)
      if (!(in >> label >> p)) throw Error(path.string() + ": truncated leaf distribution");
    forest.leaf_dists.push_back(std::move(dist));
  }
  return forest;
}

}  // namespace dsearch
