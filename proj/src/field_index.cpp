#include "dsearch/field_index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "dsearch/common.hpp"

namespace dsearch {

Field parse_field(const std::string& name) {
  if (name == "text") return Field::text;
  if (name == "data") return Field::data;
  if (name == "labels-orig" || name == "labels_orig") return Field::labels_orig;
  if (name == "labels-gen" || name == "labels_gen") return Field::labels_gen;
  if (name == "all") return Field::all;
  throw Error("unknown field '" + name + "' (expected text|data|labels-orig|labels-gen|all)");
}

std::string field_name(Field field) {
  switch (field) {
    case Field::text: return "text";
    case Field::data: return "data";
    case Field::labels_orig: return "labels-orig";
    case Field::labels_gen: return "labels-gen";
    case Field::all: return "all";
  }
  return "?";
}

int FieldIndex::tf(const std::string& token, int doc) const {
  const auto it = postings.find(token);
  if (it == postings.end()) return 0;
  const auto& docs = it->second.docs;
  const auto pos = std::lower_bound(docs.begin(), docs.end(), doc,
                                    [](const std::pair<int, int>& e, int d) { return e.first < d; });
  return (pos != docs.end() && pos->first == doc) ? pos->second : 0;
}

int FieldIndex::df(const std::string& token) const {
  const auto it = postings.find(token);
  return it == postings.end() ? 0 : it->second.df();
}

namespace {

void append_text_tokens(const Dataset& ds, std::vector<std::string>& out) {
  for (auto& t : tokenize_text(ds.title)) out.push_back(std::move(t));
  for (auto& t : tokenize_text(ds.description)) out.push_back(std::move(t));
}

void append_data_tokens(const Dataset& ds, std::vector<std::string>& out) {
  std::size_t nrows = 0;
  for (const auto& col : ds.columns) nrows = std::max(nrows, col.values.size());
  for (std::size_t r = 0; r < nrows; ++r)
    for (const auto& col : ds.columns) {
      if (r >= col.values.size()) continue;
      for (auto& t : tokenize_text(col.values[r])) out.push_back(std::move(t));
    }
}

void append_orig_label_tokens(const Dataset& ds, std::vector<std::string>& out) {
  for (const auto& col : ds.columns)
    for (const auto& t : col.label_tokens) out.push_back(t);
}

void append_gen_label_tokens(const Dataset& ds, std::vector<std::string>& out) {
  for (const auto& col : ds.generated_labels)
    for (const auto& gl : col)
      for (auto& t : split_tokens(gl.label)) out.push_back(std::move(t));
}

std::vector<std::string> field_tokens(const Dataset& ds, Field field) {
  std::vector<std::string> tokens;
  switch (field) {
    case Field::text:
      append_text_tokens(ds, tokens);
      break;
    case Field::data:
      append_data_tokens(ds, tokens);
      break;
    case Field::labels_orig:
      append_orig_label_tokens(ds, tokens);
      break;
    case Field::labels_gen:
      append_gen_label_tokens(ds, tokens);
      break;
    case Field::all:
      append_text_tokens(ds, tokens);
      append_orig_label_tokens(ds, tokens);
      append_data_tokens(ds, tokens);
      break;
  }
  return tokens;
}

}  // namespace

FieldIndex build_index(const Corpus& corpus, Field field) {
  FieldIndex index;
  index.field = field;
  index.num_docs = corpus.datasets.size();
  index.doc_ids.reserve(index.num_docs);
  index.doc_len.resize(index.num_docs, 0);

  for (std::size_t d = 0; d < corpus.datasets.size(); ++d) {
    const auto& ds = corpus.datasets[d];
    index.doc_ids.push_back(ds.id);
    const auto tokens = field_tokens(ds, field);
    index.doc_len[d] = static_cast<std::int64_t>(tokens.size());
    index.total_len += index.doc_len[d];

    std::map<std::string, int> counts;
    for (const auto& t : tokens) ++counts[t];
    for (const auto& [token, tf] : counts) {
      auto& post = index.postings[token];
      post.coll_tf += tf;
      post.docs.emplace_back(static_cast<int>(d), tf);
    }
  }
  index.avg_doc_len =
      index.num_docs ? static_cast<double>(index.total_len) / static_cast<double>(index.num_docs) : 0.0;
  return index;
}

double bm25_score(const FieldIndex& index, std::span<const std::string> query, int doc,
                  double k1, double b) {
  double score = 0.0;
  const auto n = static_cast<double>(index.num_docs);
  const double len = doc >= 0 && static_cast<std::size_t>(doc) < index.doc_len.size()
                         ? static_cast<double>(index.doc_len[static_cast<std::size_t>(doc)])
                         : 0.0;
  const double norm_len = index.avg_doc_len > 0 ? len / index.avg_doc_len : 0.0;
  for (const auto& term : query) {
    const int tf = index.tf(term, doc);
    if (tf == 0) continue;
    const double df = index.df(term);
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    score += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * norm_len));
  }
  return score;
}

double tfidf_score(const FieldIndex& index, std::span<const std::string> query, int doc) {
  double score = 0.0;
  const auto n = static_cast<double>(index.num_docs);
  for (const auto& term : query) {
    const int tf = index.tf(term, doc);
    if (tf == 0) continue;
    const double df = index.df(term);
    score += tf * std::log(n / df);
  }
  return score;
}

double lm_jm_score(const FieldIndex& index, std::span<const std::string> query, int doc,
                   double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw Error("Jelinek-Mercer lambda must be in (0, 1)");
  double score = 0.0;
  for (const auto& term : query) {
    const auto it = index.postings.find(term);
    if (it == index.postings.end() || it->second.coll_tf == 0) continue;  // absent collection-wide
    const double p_coll =
        static_cast<double>(it->second.coll_tf) / static_cast<double>(index.total_len);
    const double len = static_cast<double>(index.doc_len[static_cast<std::size_t>(doc)]);
    const double p_doc = len > 0 ? static_cast<double>(index.tf(term, doc)) / len : 0.0;
    score += std::log(lambda * p_doc + (1.0 - lambda) * p_coll);
  }
  return score;
}

double lm_dirichlet_score(const FieldIndex& index, std::span<const std::string> query, int doc,
                          double mu) {
  if (!(mu > 0.0)) throw Error("Dirichlet mu must be positive");
  double score = 0.0;
  for (const auto& term : query) {
    const auto it = index.postings.find(term);
    if (it == index.postings.end() || it->second.coll_tf == 0) continue;
    const double p_coll =
        static_cast<double>(it->second.coll_tf) / static_cast<double>(index.total_len);
    const double len = static_cast<double>(index.doc_len[static_cast<std::size_t>(doc)]);
    const double tf = index.tf(term, doc);
    score += std::log((tf + mu * p_coll) / (len + mu));
  }
  return score;
}

void save_index(const FieldIndex& index, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "dsearch-index 1\n";
  out << "field " << field_name(index.field) << '\n';
  out << "docs " << index.num_docs << '\n';
  for (std::size_t d = 0; d < index.num_docs; ++d)
    out << d << ' ' << index.doc_ids[d] << ' ' << index.doc_len[d] << '\n';

  std::vector<std::string> tokens;
  tokens.reserve(index.postings.size());
  for (const auto& [token, post] : index.postings) tokens.push_back(token);
  std::sort(tokens.begin(), tokens.end());

  out << "postings " << tokens.size() << '\n';
  for (const auto& token : tokens) {
    const auto& post = index.postings.at(token);
    out << token << ' ' << post.df() << ' ' << post.coll_tf;
    for (const auto& [doc, tf] : post.docs) out << ' ' << doc << ':' << tf;
    out << '\n';
  }
}

FieldIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string magic, version;
  in >> magic >> version;
  if (magic != "dsearch-index" || version != "1")
    throw Error(path.string() + ": not a dsearch-index v1 file");

  FieldIndex index;
  std::string tag, field;
  in >> tag >> field;
  if (tag != "field") throw Error(path.string() + ": missing field line");
  index.field = parse_field(field);
  in >> tag >> index.num_docs;
  if (tag != "docs") throw Error(path.string() + ": missing docs line");
  index.doc_ids.resize(index.num_docs);
  index.doc_len.resize(index.num_docs);
  for (std::size_t d = 0; d < index.num_docs; ++d) {
    std::size_t ordinal = 0;
    if (!(in >> ordinal >> index.doc_ids[d] >> index.doc_len[d]) || ordinal != d)
      throw Error(path.string() + ": malformed doc line " + std::to_string(d));
    index.total_len += index.doc_len[d];
  }
  index.avg_doc_len =
      index.num_docs ? static_cast<double>(index.total_len) / static_cast<double>(index.num_docs) : 0.0;

  std::size_t n_postings = 0;
  in >> tag >> n_postings;
  if (tag != "postings") throw Error(path.string() + ": missing postings line");
  std::string line;
  std::getline(in, line);  // consume end of the postings header line
  for (std::size_t p = 0; p < n_postings; ++p) {
    if (!std::getline(in, line)) throw Error(path.string() + ": truncated postings section");
    std::istringstream ls(line);
    std::string token;
    int df = 0;
    FieldIndex::Postings post;
    if (!(ls >> token >> df >> post.coll_tf))
      throw Error(path.string() + ": malformed postings line for entry " + std::to_string(p));
    std::string cell;
    while (ls >> cell) {
      const auto colon = cell.find(':');
      if (colon == std::string::npos)
        throw Error(path.string() + ": malformed doc:tf cell '" + cell + "'");
      post.docs.emplace_back(std::stoi(cell.substr(0, colon)), std::stoi(cell.substr(colon + 1)));
    }
    if (static_cast<int>(post.docs.size()) != df)
      throw Error(path.string() + ": df mismatch for token '" + token + "'");
    index.postings.emplace(std::move(token), std::move(post));
  }
  return index;
}

}  // namespace dsearch
