#pragma once

// Shared test fixtures: in-memory corpora, on-disk corpus writers and the
// synthetic retrieval benchmark used by the end-to-end checks.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dsearch/corpus.hpp"

namespace fixtures {

namespace fs = std::filesystem;

struct ColumnSpec {
  std::string label;  // raw header cell; empty means unlabeled
  std::vector<std::string> values;
};

struct DatasetSpec {
  std::string id;
  std::string title;
  std::string description;
  std::vector<ColumnSpec> columns;
};

// In-memory corpus, bypassing the CSV layer.
inline dsearch::Corpus make_corpus(const std::vector<DatasetSpec>& specs) {
  dsearch::Corpus corpus;
  for (const auto& spec : specs) {
    dsearch::Dataset ds;
    ds.id = spec.id;
    ds.title = spec.title;
    ds.description = spec.description;
    for (const auto& col : spec.columns) {
      dsearch::Column column;
      if (!col.label.empty()) {
        column.raw_label = col.label;
        column.label_tokens = dsearch::normalize_label(col.label);
      }
      column.values = col.values;
      ds.columns.push_back(std::move(column));
    }
    corpus.datasets.push_back(std::move(ds));
  }
  return corpus;
}

// Minimal corpus where each "table" is just a list of labels; used by the
// co-occurrence tests.
inline dsearch::Corpus label_corpus(const std::vector<std::vector<std::string>>& tables) {
  std::vector<DatasetSpec> specs;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    DatasetSpec spec;
    spec.id = "d" + std::to_string(i + 1);
    for (const auto& label : tables[i]) spec.columns.push_back({label, {}});
    specs.push_back(std::move(spec));
  }
  return make_corpus(specs);
}

inline std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (const char c : cell) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

// Writes one dataset directory (data.csv + meta.json) under root.
inline void write_dataset_dir(const fs::path& root, const DatasetSpec& spec) {
  const fs::path dir = root / spec.id;
  fs::create_directories(dir);
  {
    std::ofstream meta(dir / "meta.json");
    meta << "{\"id\": \"" << spec.id << "\", \"title\": \"" << spec.title
         << "\", \"description\": \"" << spec.description << "\"}\n";
  }
  std::ofstream csv(dir / "data.csv");
  for (std::size_t c = 0; c < spec.columns.size(); ++c) {
    if (c) csv << ',';
    csv << csv_escape(spec.columns[c].label);
  }
  csv << '\n';
  std::size_t rows = 0;
  for (const auto& col : spec.columns) rows = std::max(rows, col.values.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < spec.columns.size(); ++c) {
      if (c) csv << ',';
      if (r < spec.columns[c].values.size()) csv << csv_escape(spec.columns[c].values[r]);
    }
    csv << '\n';
  }
}

inline void write_corpus_dir(const fs::path& root, const std::vector<DatasetSpec>& specs) {
  fs::create_directories(root);
  for (const auto& spec : specs) write_dataset_dir(root, spec);
}

// Embedding file with unit-ish vectors; rows are written verbatim.
inline void write_vectors_file(const fs::path& path,
                               const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
  std::ofstream out(path);
  std::size_t dim = rows.empty() ? 0 : rows.front().second.size();
  out << rows.size() << ' ' << dim << '\n';
  for (const auto& [token, vec] : rows) {
    out << token;
    for (const double v : vec) out << ' ' << v;
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Synthetic 30-dataset benchmark: five relevant datasets are findable only
// through schema labels generated from co-occurring tables, eight donors
// carry the same distinctive column with its real label, five text
// distractors advertise the query term without relevant content.

struct Benchmark {
  fs::path corpus_dir;
  fs::path tasks_file;
  fs::path qrels_file;
  fs::path vectors_file;
};

inline Benchmark write_benchmark(const fs::path& root) {
  const std::vector<std::string> wind_values = {"42.5", "47.1", "51.3", "44.8",
                                                "58.2", "49.9", "53.4", "46.7"};
  const std::vector<std::string> years = {"1990", "1991", "1992", "1993",
                                          "1994", "1995", "1996", "1997"};
  const std::vector<std::string> stations = {"alpha", "bravo", "delta", "echo",
                                             "kilo", "lima", "oscar", "tango"};
  const std::vector<std::string> notes = {"routine", "routine", "calibrated", "routine",
                                          "verified", "routine", "calibrated", "routine"};

  std::vector<DatasetSpec> specs;
  // relevant: distinctive column left unlabeled, generic metadata
  for (int i = 1; i <= 5; ++i) {
    DatasetSpec spec;
    spec.id = "rel0" + std::to_string(i);
    spec.title = "Station telemetry bundle " + std::to_string(i);
    spec.description = "Archived readings from monitoring site " + std::to_string(i);
    spec.columns = {{"", wind_values}, {"year", years}, {"station", stations}};
    specs.push_back(std::move(spec));
  }
  // donors: same distinctive column, labeled
  for (int i = 1; i <= 8; ++i) {
    DatasetSpec spec;
    spec.id = "don0" + std::to_string(i);
    spec.title = "Sensor archive " + std::to_string(i);
    spec.description = "Field measurements collected at site " + std::to_string(i);
    spec.columns = {{"wind", wind_values}, {"year", years}, {"station", stations}, {"note", notes}};
    specs.push_back(std::move(spec));
  }
  // text distractors: the query term only in the metadata
  for (int i = 1; i <= 5; ++i) {
    DatasetSpec spec;
    spec.id = "txt0" + std::to_string(i);
    spec.title = "Wind turbine industry report " + std::to_string(i);
    spec.description = "Quarterly wind press summaries volume " + std::to_string(i);
    spec.columns = {{"company", {"acme", "volta", "zephyr corp", "aeolus ltd"}},
                    {"quarter", {"Q1", "Q2", "Q3", "Q4"}}};
    specs.push_back(std::move(spec));
  }
  // fillers: other topics
  for (int i = 1; i <= 4; ++i) {
    DatasetSpec spec;
    spec.id = "fil0" + std::to_string(i);
    spec.title = "School lunch participation " + std::to_string(i);
    spec.description = "Meals served by participating schools";
    spec.columns = {{"school", {"birch elementary", "maple high", "cedar elementary", "oak middle"}},
                    {"lunch", {"412", "387", "659", "540"}},
                    {"meal", {"breakfast", "lunch", "lunch", "snack"}}};
    specs.push_back(std::move(spec));
  }
  for (int i = 5; i <= 8; ++i) {
    DatasetSpec spec;
    spec.id = "fil0" + std::to_string(i);
    spec.title = "Population statistics volume " + std::to_string(i);
    spec.description = "Country population time series";
    spec.columns = {{"country", {"peru", "chile", "ghana", "nepal"}},
                    {"population", {"22048000", "13572000", "15400000", "19100000"}},
                    {"year", {"1986", "1988", "1990", "1992"}}};
    specs.push_back(std::move(spec));
  }
  for (int i = 9; i <= 12; ++i) {
    DatasetSpec spec;
    spec.id = (i < 10 ? "fil0" : "fil") + std::to_string(i);
    spec.title = "Electricity pricing survey " + std::to_string(i);
    spec.description = "Average retail price by state";
    spec.columns = {{"state", {"kansas", "texas", "oregon", "maine"}},
                    {"price", {"9.81", "11.42", "8.77", "12.35"}},
                    {"year", {"2001", "2002", "2003", "2004"}}};
    specs.push_back(std::move(spec));
  }

  Benchmark bench;
  bench.corpus_dir = root / "corpus";
  bench.tasks_file = root / "tasks.tsv";
  bench.qrels_file = root / "qrels.txt";
  bench.vectors_file = root / "vectors.txt";
  fs::create_directories(root);
  write_corpus_dir(bench.corpus_dir, specs);

  {
    std::ofstream tasks(bench.tasks_file);
    tasks << "t-wind\twind\n";
    tasks << "t-wind\twind speed\n";
    tasks << "t-wind\tmonthly wind\n";
  }
  {
    std::ofstream qrels(bench.qrels_file);
    for (int i = 1; i <= 5; ++i) qrels << "t-wind 0 rel0" << i << " 3\n";
    for (int i = 1; i <= 8; ++i) qrels << "t-wind 0 don0" << i << " 2\n";
    for (int i = 1; i <= 5; ++i) qrels << "t-wind 0 txt0" << i << " 1\n";
    qrels << "t-wind 0 fil01 0\n";
    qrels << "t-wind 0 fil05 0\n";
    qrels << "t-wind 0 fil09 0\n";
  }

  // nonnegative coordinates keep every pairwise distance below the -2 floor
  write_vectors_file(bench.vectors_file,
                     {{"wind", {1.0, 0.2, 0.0, 0.0, 0.0, 0.0}},
                      {"speed", {0.9, 0.5, 0.1, 0.0, 0.0, 0.0}},
                      {"monthly", {0.3, 0.2, 0.9, 0.1, 0.0, 0.0}},
                      {"year", {0.0, 0.1, 0.2, 1.0, 0.0, 0.0}},
                      {"station", {0.1, 0.9, 0.1, 0.2, 0.3, 0.0}},
                      {"note", {0.0, 0.3, 0.1, 0.1, 1.0, 0.1}},
                      {"company", {0.0, 0.0, 0.3, 0.1, 0.2, 1.0}},
                      {"quarter", {0.1, 0.0, 0.5, 0.6, 0.1, 0.4}},
                      {"school", {0.2, 0.7, 0.0, 0.3, 0.6, 0.2}},
                      {"lunch", {0.3, 0.1, 0.6, 0.0, 0.8, 0.1}},
                      {"meal", {0.25, 0.1, 0.55, 0.05, 0.85, 0.1}},
                      {"country", {0.6, 0.0, 0.2, 0.5, 0.0, 0.7}},
                      {"population", {0.5, 0.1, 0.3, 0.6, 0.1, 0.6}},
                      {"state", {0.55, 0.05, 0.25, 0.55, 0.05, 0.65}},
                      {"price", {0.2, 0.6, 0.7, 0.0, 0.2, 0.3}},
                      {"electricity", {0.15, 0.65, 0.75, 0.05, 0.15, 0.25}}});
  return bench;
}

}  // namespace fixtures
