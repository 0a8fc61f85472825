#include "dsearch/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dsearch/common.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace dsearch {

namespace {

bool is_digit(unsigned char c) { return std::isdigit(c) != 0; }
bool is_upper(unsigned char c) { return std::isupper(c) != 0; }
bool is_lower(unsigned char c) { return std::islower(c) != 0; }
bool is_alnum(unsigned char c) { return std::isalnum(c) != 0; }

}  // namespace

std::vector<std::string> normalize_label(const std::string& raw) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  const std::size_t n = raw.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<unsigned char>(raw[i]);
    if (!is_alnum(c)) {
      flush();
      continue;
    }
    if (!cur.empty()) {
      const auto prev = static_cast<unsigned char>(raw[i - 1]);
      const bool boundary =
          (is_digit(c) != is_digit(prev)) ||        // letter <-> digit
          (is_upper(c) && is_lower(prev)) ||        // camelCase
          (is_upper(prev) && is_upper(c) &&         // acronym tail: HTTPResponse
           i + 1 < n && is_lower(static_cast<unsigned char>(raw[i + 1])));
      if (boundary) flush();
    }
    cur.push_back(static_cast<char>(std::tolower(c)));
  }
  flush();
  return out;
}

std::vector<std::string> tokenize_text(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_alnum(c) || c >= 0x80) {
      // bytes >= 0x80 (UTF-8 continuation/lead) pass through unchanged
      cur.push_back(c >= 0x80 ? ch : static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> split_tokens(const std::string& joined) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(joined);
  while (in >> cur) out.push_back(cur);
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool any_char = false;  // current record saw any content (quotes count)

  auto end_field = [&] {
    row.push_back(field);
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    // drop fully empty records (blank lines, trailing newline)
    if (row.size() > 1 || !row[0].empty() || any_char) records.push_back(row);
    row.clear();
    any_char = false;
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        any_char = true;
        break;
      case ',':
        end_field();
        any_char = true;
        break;
      case '\r':
        break;
      case '\n':
        if (!row.empty() || !field.empty() || any_char) end_record();
        break;
      default:
        field.push_back(c);
    }
  }
  if (!row.empty() || !field.empty() || any_char) end_record();
  return records;
}

namespace {

// Parses one dataset directory; returns nullopt and appends a warning on any
// per-dataset problem.
std::optional<Dataset> load_dataset(const fs::path& dir, const LoadOptions& opts,
                                    std::vector<std::string>& warnings) {
  const fs::path meta_path = dir / "meta.json";
  const fs::path data_path = dir / "data.csv";

  Dataset ds;
  ds.id = dir.filename().string();  // fallback when meta.json lacks an id

  if (!fs::exists(meta_path)) {
    warnings.push_back(dir.string() + ": missing meta.json, skipped");
    return std::nullopt;
  }
  try {
    std::ifstream meta_in(meta_path);
    const auto meta = nlohmann::json::parse(meta_in);
    if (meta.contains("id") && meta["id"].is_string()) ds.id = meta["id"].get<std::string>();
    if (meta.contains("title") && meta["title"].is_string())
      ds.title = meta["title"].get<std::string>();
    if (meta.contains("description") && meta["description"].is_string())
      ds.description = meta["description"].get<std::string>();
  } catch (const std::exception& e) {
    warnings.push_back(dir.string() + ": unparseable meta.json (" + e.what() + "), skipped");
    return std::nullopt;
  }

  if (!fs::exists(data_path)) {
    warnings.push_back(dir.string() + ": missing data.csv, skipped");
    return std::nullopt;
  }
  std::ifstream data_in(data_path, std::ios::binary);
  const auto records = parse_csv(data_in);
  if (records.empty()) {
    warnings.push_back(dir.string() + ": data.csv has no header row, skipped");
    return std::nullopt;
  }

  const auto& header = records[0];
  const std::size_t ncols = header.size();
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != ncols) {
      warnings.push_back(dir.string() + ": row " + std::to_string(r + 1) + " has " +
                         std::to_string(records[r].size()) + " cells, expected " +
                         std::to_string(ncols) + ", dataset skipped");
      return std::nullopt;
    }
  }

  ds.columns.resize(ncols);
  for (std::size_t c = 0; c < ncols; ++c) {
    if (!header[c].empty()) {
      ds.columns[c].raw_label = header[c];
      ds.columns[c].label_tokens = normalize_label(header[c]);
    }
  }
  const std::size_t nrows = std::min(records.size() - 1, opts.max_rows);
  for (std::size_t c = 0; c < ncols; ++c) ds.columns[c].values.reserve(nrows);
  for (std::size_t r = 1; r <= nrows; ++r)
    for (std::size_t c = 0; c < ncols; ++c) ds.columns[c].values.push_back(records[r][c]);

  return ds;
}

}  // namespace

Corpus load_corpus(const fs::path& root, const LoadOptions& opts) {
  if (!fs::exists(root) || !fs::is_directory(root))
    throw Error("corpus root not found: " + root.string());

  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());

  Corpus corpus;
  std::set<std::string> seen_ids;
  for (const auto& dir : dirs) {
    auto ds = load_dataset(dir, opts, corpus.warnings);
    if (!ds) continue;
    if (!seen_ids.insert(ds->id).second) {
      corpus.warnings.push_back(dir.string() + ": duplicate dataset id '" + ds->id +
                                "', skipped");
      continue;
    }
    corpus.datasets.push_back(std::move(*ds));
  }
  if (corpus.datasets.empty())
    throw Error("empty corpus: no parseable datasets under " + root.string());
  return corpus;
}

TaskSet load_tasks(const fs::path& queries_file) {
  std::ifstream in(queries_file);
  if (!in) throw Error("cannot open tasks file: " + queries_file.string());

  TaskSet set;
  std::map<std::string, std::size_t> task_pos;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(queries_file.string() + ":" + std::to_string(line_no) +
                  ": expected task_id<TAB>query_text");
    const std::string task_id = line.substr(0, tab);
    const std::string query = line.substr(tab + 1);
    if (task_id.empty() || tokenize_text(query).empty())
      throw Error(queries_file.string() + ":" + std::to_string(line_no) +
                  ": empty task id or query tokenizes to nothing");
    auto it = task_pos.find(task_id);
    if (it == task_pos.end()) {
      task_pos.emplace(task_id, set.tasks.size());
      set.tasks.push_back(Task{task_id, "", {query}});
    } else {
      set.tasks[it->second].queries.push_back(query);
    }
  }
  if (set.tasks.empty()) throw Error("tasks file has no queries: " + queries_file.string());
  return set;
}

void load_task_descriptions(TaskSet& tasks, const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open task descriptions file: " + file.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(file.string() + ":" + std::to_string(line_no) +
                  ": expected task_id<TAB>description");
    const std::string task_id = line.substr(0, tab);
    for (auto& task : tasks.tasks)
      if (task.id == task_id) task.description = line.substr(tab + 1);
  }
}

}  // namespace dsearch
