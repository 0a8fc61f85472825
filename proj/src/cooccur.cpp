#include "dsearch/cooccur.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dsearch/common.hpp"

namespace dsearch {

double SparseMatrix::at(int r, int c) const {
  if (r < 0 || static_cast<std::size_t>(r) >= rows) return 0.0;
  const auto& rr = row[static_cast<std::size_t>(r)];
  auto it = std::lower_bound(rr.begin(), rr.end(), c,
                             [](const std::pair<int, double>& e, int col) { return e.first < col; });
  return (it != rr.end() && it->first == c) ? it->second : 0.0;
}

double SparseMatrix::sum() const {
  double total = 0.0;
  for (const auto& rr : row)
    for (const auto& [c, v] : rr) total += v;
  return total;
}

namespace {

// Sorted unique vocabulary ids of a dataset's labeled columns.
std::vector<int> table_label_ids(const Dataset& ds, const LabelVocab& vocab) {
  std::set<int> ids;
  for (const auto& col : ds.columns) {
    if (col.label_tokens.empty()) continue;
    const int id = vocab.id(join_tokens(col.label_tokens));
    if (id >= 0) ids.insert(id);
  }
  return {ids.begin(), ids.end()};
}

}  // namespace

std::pair<LabelVocab, PreferenceMatrix> build_vocab_and_preference(const Corpus& corpus,
                                                                   int min_dataset_frequency) {
  LabelVocab vocab;
  PreferenceMatrix pref;
  pref.rows = corpus.datasets.size();
  pref.row_labels.resize(pref.rows);

  for (std::size_t u = 0; u < corpus.datasets.size(); ++u) {
    std::set<int> ids;
    for (const auto& col : corpus.datasets[u].columns) {
      if (col.label_tokens.empty()) continue;
      const std::string label = join_tokens(col.label_tokens);
      auto it = vocab.index.find(label);
      int id;
      if (it == vocab.index.end()) {
        id = static_cast<int>(vocab.labels.size());
        vocab.index.emplace(label, id);
        vocab.labels.push_back(label);
        vocab.dataset_frequency.push_back(0);
      } else {
        id = it->second;
      }
      ids.insert(id);
    }
    pref.row_labels[u].assign(ids.begin(), ids.end());
    for (const int id : ids) ++vocab.dataset_frequency[static_cast<std::size_t>(id)];
  }
  if (vocab.labels.empty()) throw Error("no schema labels anywhere in the corpus");

  if (min_dataset_frequency > 1) {
    LabelVocab kept;
    std::vector<int> remap(vocab.labels.size(), -1);
    for (std::size_t id = 0; id < vocab.labels.size(); ++id) {
      if (vocab.dataset_frequency[id] < min_dataset_frequency) continue;
      remap[id] = static_cast<int>(kept.labels.size());
      kept.index.emplace(vocab.labels[id], remap[id]);
      kept.labels.push_back(vocab.labels[id]);
      kept.dataset_frequency.push_back(vocab.dataset_frequency[id]);
    }
    if (kept.labels.empty())
      throw Error("no labels reach the minimum dataset frequency of " +
                  std::to_string(min_dataset_frequency));
    for (auto& row : pref.row_labels) {
      std::vector<int> mapped;
      for (const int id : row)
        if (remap[static_cast<std::size_t>(id)] >= 0)
          mapped.push_back(remap[static_cast<std::size_t>(id)]);
      row = std::move(mapped);
    }
    vocab = std::move(kept);
  }
  pref.cols = vocab.labels.size();
  return {std::move(vocab), std::move(pref)};
}

CountMatrix cooccurrence_counts(const Corpus& corpus, const LabelVocab& vocab) {
  const std::size_t n = vocab.size();
  std::vector<std::map<int, double>> acc(n);
  for (const auto& ds : corpus.datasets) {
    const auto ids = table_label_ids(ds, vocab);
    for (std::size_t a = 0; a < ids.size(); ++a)
      for (std::size_t b = a + 1; b < ids.size(); ++b) {
        acc[static_cast<std::size_t>(ids[a])][ids[b]] += 1.0;
        acc[static_cast<std::size_t>(ids[b])][ids[a]] += 1.0;
      }
  }
  CountMatrix counts;
  counts.rows = counts.cols = n;
  counts.row.resize(n);
  for (std::size_t i = 0; i < n; ++i) counts.row[i].assign(acc[i].begin(), acc[i].end());
  return counts;
}

SppmiMatrix build_sppmi(const CountMatrix& counts, int k_neg) {
  if (k_neg < 1) throw Error("k_neg must be >= 1, got " + std::to_string(k_neg));

  const std::size_t n = counts.rows;
  std::vector<double> row_sum(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [j, v] : counts.row[i]) {
      row_sum[i] += v;
      total += v;
    }

  SppmiMatrix out;
  out.k_neg = k_neg;
  out.mat.rows = out.mat.cols = n;
  out.mat.row.resize(n);
  if (total <= 0.0) return out;  // no co-occurring pairs at all

  const double shift = std::log(static_cast<double>(k_neg));
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [j, v] : counts.row[i]) {
      // counts are symmetric, so the column sum of j equals row_sum[j]
      const double pmi = std::log(v * total / (row_sum[i] * row_sum[static_cast<std::size_t>(j)]));
      const double sppmi = pmi - shift;
      if (sppmi > 0.0) out.mat.row[i].emplace_back(j, sppmi);
    }
  return out;
}

SppmiMatrix empty_sppmi(std::size_t n) {
  SppmiMatrix out;
  out.mat.rows = out.mat.cols = n;
  out.mat.row.resize(n);
  return out;
}

void save_triplets(const SparseMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << m.rows << ' ' << m.cols << ' ' << m.nnz() << '\n';
  char buf[48];
  for (std::size_t r = 0; r < m.rows; ++r)
    for (const auto& [c, v] : m.row[r]) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << r << ' ' << c << ' ' << buf << '\n';
    }
}

SparseMatrix load_triplets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::size_t rows = 0, cols = 0, nnz = 0;
  if (!(in >> rows >> cols >> nnz)) throw Error(path.string() + ": malformed triplet header");
  SparseMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row.resize(rows);
  for (std::size_t e = 0; e < nnz; ++e) {
    long long r = 0, c = 0;
    double v = 0.0;
    if (!(in >> r >> c >> v))
      throw Error(path.string() + ": truncated triplet entry " + std::to_string(e + 1));
    if (r < 0 || static_cast<std::size_t>(r) >= rows || c < 0 || static_cast<std::size_t>(c) >= cols)
      throw Error(path.string() + ": triplet index out of range at entry " + std::to_string(e + 1));
    m.row[static_cast<std::size_t>(r)].emplace_back(static_cast<int>(c), v);
  }
  for (auto& rr : m.row) std::sort(rr.begin(), rr.end());
  return m;
}

SparseMatrix preference_to_sparse(const PreferenceMatrix& m) {
  SparseMatrix out;
  out.rows = m.rows;
  out.cols = m.cols;
  out.row.resize(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (const int c : m.row_labels[r]) out.row[r].emplace_back(c, 1.0);
  return out;
}

PreferenceMatrix preference_from_sparse(const SparseMatrix& m) {
  PreferenceMatrix out;
  out.rows = m.rows;
  out.cols = m.cols;
  out.row_labels.resize(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (const auto& [c, v] : m.row[r])
      if (v != 0.0) out.row_labels[r].push_back(c);
  return out;
}

void save_vocab(const LabelVocab& vocab, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t i = 0; i < vocab.labels.size(); ++i)
    out << i << '\t' << vocab.labels[i] << '\t' << vocab.dataset_frequency[i] << '\n';
}

LabelVocab load_vocab(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  LabelVocab vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string idx_str, label, freq_str;
    if (!std::getline(ls, idx_str, '\t') || !std::getline(ls, label, '\t') ||
        !std::getline(ls, freq_str))
      throw Error(path.string() + ":" + std::to_string(line_no) + ": malformed vocab line");
    const auto idx = static_cast<std::size_t>(std::stoll(idx_str));
    if (idx != vocab.labels.size())
      throw Error(path.string() + ":" + std::to_string(line_no) + ": non-dense vocab index");
    vocab.labels.push_back(label);
    vocab.index.emplace(label, static_cast<int>(idx));
    vocab.dataset_frequency.push_back(std::stoi(freq_str));
  }
  if (vocab.labels.empty()) throw Error(path.string() + ": empty vocabulary file");
  return vocab;
}

}  // namespace dsearch
