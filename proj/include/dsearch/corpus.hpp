#pragma once

// Corpus loading and text normalization. A corpus is a directory with one
// subdirectory per dataset holding data.csv (first row = schema labels) and
// meta.json (id, title, description).

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dsearch {

struct GeneratedLabel {
  std::string label;   // normalized label, tokens joined by single spaces
  double probability;  // in [0, 1]
};

struct Column {
  std::optional<std::string> raw_label;  // absent when the header cell is empty
  std::vector<std::string> label_tokens;
  std::vector<std::string> values;  // sampled data cells, row order
};

struct Dataset {
  std::string id;
  std::string title;
  std::string description;
  std::vector<Column> columns;
  // one slot per column once generation ran; empty before stage 1
  std::vector<std::vector<GeneratedLabel>> generated_labels;
};

struct Corpus {
  std::vector<Dataset> datasets;
  std::vector<std::string> warnings;  // skipped datasets, duplicate ids, ...
};

struct Task {
  std::string id;
  std::string description;
  std::vector<std::string> queries;
};

struct TaskSet {
  std::vector<Task> tasks;
};

struct LoadOptions {
  std::size_t max_rows = 1000;  // cap on sampled data rows per dataset
};

// Splits a schema label on underscores, hyphens, whitespace, punctuation,
// camelCase boundaries and letter<->digit boundaries; lowercases everything.
// "LocationAbbr" -> {"location","abbr"}, "GeoLocation2" -> {"geo","location","2"}.
std::vector<std::string> normalize_label(const std::string& raw);

// Lowercased tokens, every non-alphanumeric byte treated as a separator.
std::vector<std::string> tokenize_text(const std::string& text);

std::string join_tokens(const std::vector<std::string>& tokens);
std::vector<std::string> split_tokens(const std::string& joined);

// Whole-stream CSV reader with RFC-4180 quoting (quoted cells may contain
// commas, escaped quotes and newlines). Fully empty records are dropped.
std::vector<std::vector<std::string>> parse_csv(std::istream& in);

// Loads every parseable dataset under root, sorted by directory name.
// Malformed datasets are skipped with a warning; an empty result throws.
Corpus load_corpus(const std::filesystem::path& root, const LoadOptions& opts = {});

// Tab-separated "task_id<TAB>query_text" lines, one query per line.
TaskSet load_tasks(const std::filesystem::path& queries_file);

// Tab-separated "task_id<TAB>description" lines; attaches to matching tasks.
void load_task_descriptions(TaskSet& tasks, const std::filesystem::path& file);

}  // namespace dsearch
