#include <doctest.h>

#include <fstream>
#include <sstream>

#include "dsearch/common.hpp"
#include "dsearch/corpus.hpp"
#include "support/fixtures.hpp"

using namespace dsearch;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dsearch-tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("normalize_label splits per the documented boundaries") {
  CHECK(normalize_label("LocationAbbr") == std::vector<std::string>{"location", "abbr"});
  CHECK(normalize_label("wind_speed_mph") == std::vector<std::string>{"wind", "speed", "mph"});
  CHECK(normalize_label("GeoLocation2") == std::vector<std::string>{"geo", "location", "2"});
  CHECK(normalize_label("HTTPResponse") == std::vector<std::string>{"http", "response"});
  CHECK(normalize_label("year-2004 data") == std::vector<std::string>{"year", "2004", "data"});
  CHECK(normalize_label("").empty());
  CHECK(normalize_label("##--##").empty());
}

TEST_CASE("normalize_label is idempotent on its joined output") {
  for (const std::string raw : {"LocationAbbr", "GeoLocation2", "wind_speed_mph", "A1B2"}) {
    const auto once = normalize_label(raw);
    const auto again = normalize_label(join_tokens(once));
    CHECK(once == again);
  }
  CHECK(normalize_label("location abbr") == std::vector<std::string>{"location", "abbr"});
}

TEST_CASE("tokenize_text lowercases and strips punctuation") {
  CHECK(tokenize_text("Wind speeds, Kansas.") == std::vector<std::string>{"wind", "speeds", "kansas"});
  CHECK(tokenize_text("").empty());
  CHECK(tokenize_text("Peru 1986-94") == std::vector<std::string>{"peru", "1986", "94"});
  CHECK(tokenize_text("...") == std::vector<std::string>{});
}

TEST_CASE("tokens are always non-empty and lowercase") {
  Rng rng(123);
  const std::string charset = "aB cD_-.9'Z/xY\"q,R";
  for (int trial = 0; trial < 200; ++trial) {
    std::string s;
    const std::size_t len = rng.next_index(24);
    for (std::size_t i = 0; i < len; ++i) s.push_back(charset[rng.next_index(charset.size())]);
    for (const auto& tokens : {tokenize_text(s), normalize_label(s)})
      for (const auto& t : tokens) {
        CHECK(!t.empty());
        for (const char c : t) CHECK(!std::isupper(static_cast<unsigned char>(c)));
      }
  }
}

TEST_CASE("parse_csv handles quoting, CRLF and embedded newlines") {
  std::istringstream in("a,\"b,c\",d\r\n\"say \"\"hi\"\"\",\"two\nlines\",x\n\n");
  const auto rows = parse_csv(in);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"a", "b,c", "d"});
  CHECK(rows[1] == std::vector<std::string>{"say \"hi\"", "two\nlines", "x"});
}

TEST_CASE("load_corpus reads valid dataset directories") {
  const auto root = fresh_dir("corpus_ok");
  fixtures::write_corpus_dir(root, {
    {"ds1", "Wind data", "Monthly wind", {{"WindSpeed", {"4.2", "5.1"}}, {"Year", {"2003", "2004"}}}},
    {"ds2", "Lunches", "School lunches", {{"School", {"maple"}}, {"Meals", {"412"}}}},
  });
  const auto corpus = load_corpus(root);
  REQUIRE(corpus.datasets.size() == 2);
  CHECK(corpus.warnings.empty());
  CHECK(corpus.datasets[0].id == "ds1");
  CHECK(corpus.datasets[0].columns.size() == 2);
  CHECK(corpus.datasets[0].columns[0].label_tokens == std::vector<std::string>{"wind", "speed"});
  CHECK(corpus.datasets[0].columns[0].values == std::vector<std::string>{"4.2", "5.1"});
  CHECK(corpus.datasets[1].title == "Lunches");
}

TEST_CASE("load_corpus keeps a header-only dataset with empty values") {
  const auto root = fresh_dir("corpus_header_only");
  fixtures::write_corpus_dir(root, {{"only", "t", "d", {{"a", {}}, {"b", {}}}}});
  const auto corpus = load_corpus(root);
  REQUIRE(corpus.datasets.size() == 1);
  for (const auto& col : corpus.datasets[0].columns) CHECK(col.values.empty());
}

TEST_CASE("load_corpus skips a dataset with inconsistent column counts") {
  const auto root = fresh_dir("corpus_ragged");
  fixtures::write_corpus_dir(root, {{"good", "t", "d", {{"a", {"1"}}, {"b", {"2"}}}}});
  fs::create_directories(root / "bad");
  std::ofstream(root / "bad" / "meta.json") << "{\"id\": \"bad\", \"title\": \"x\"}";
  std::ofstream(root / "bad" / "data.csv") << "a,b\n1,2\n1,2,3\n";
  const auto corpus = load_corpus(root);
  CHECK(corpus.datasets.size() == 1);
  CHECK(corpus.warnings.size() == 1);
  CHECK(corpus.datasets[0].id == "good");
}

TEST_CASE("load_corpus error paths") {
  CHECK_THROWS_AS(load_corpus(fs::temp_directory_path() / "nope-not-here"), Error);

  const auto root = fresh_dir("corpus_empty");
  fs::create_directories(root / "broken");
  std::ofstream(root / "broken" / "meta.json") << "not json at all";
  std::ofstream(root / "broken" / "data.csv") << "a\n1\n";
  CHECK_THROWS_AS(load_corpus(root), Error);  // nothing parseable
}

TEST_CASE("load_corpus tolerates missing title and description") {
  const auto root = fresh_dir("corpus_bare_meta");
  fs::create_directories(root / "bare");
  std::ofstream(root / "bare" / "meta.json") << "{\"id\": \"bare\"}";
  std::ofstream(root / "bare" / "data.csv") << "col\nv\n";
  const auto corpus = load_corpus(root);
  REQUIRE(corpus.datasets.size() == 1);
  CHECK(corpus.datasets[0].title.empty());
  CHECK(corpus.datasets[0].description.empty());
}

TEST_CASE("load_corpus is deterministic and caps sampled rows") {
  const auto root = fresh_dir("corpus_cap");
  std::vector<std::string> many;
  for (int i = 0; i < 40; ++i) many.push_back(std::to_string(i));
  fixtures::write_corpus_dir(root, {{"zz", "t", "d", {{"n", many}}},
                                    {"aa", "t", "d", {{"n", many}}}});
  LoadOptions opts;
  opts.max_rows = 10;
  const auto corpus = load_corpus(root, opts);
  REQUIRE(corpus.datasets.size() == 2);
  CHECK(corpus.datasets[0].id == "aa");  // sorted traversal
  CHECK(corpus.datasets[0].columns[0].values.size() == 10);

  const auto again = load_corpus(root, opts);
  CHECK(again.datasets[0].id == corpus.datasets[0].id);
  CHECK(again.datasets[1].columns[0].values == corpus.datasets[1].columns[0].values);
}

TEST_CASE("load_tasks groups queries per task") {
  const auto root = fresh_dir("tasks");
  const auto file = root / "tasks.tsv";
  std::ofstream(file) << "t1\twind speed\nt2\tschool lunch\nt1\tmonthly wind\n";
  const auto tasks = load_tasks(file);
  REQUIRE(tasks.tasks.size() == 2);
  CHECK(tasks.tasks[0].id == "t1");
  CHECK(tasks.tasks[0].queries == std::vector<std::string>{"wind speed", "monthly wind"});
  CHECK(tasks.tasks[1].queries == std::vector<std::string>{"school lunch"});
}

TEST_CASE("load_tasks rejects malformed lines") {
  const auto root = fresh_dir("tasks_bad");
  const auto no_tab = root / "a.tsv";
  std::ofstream(no_tab) << "t1 wind\n";
  CHECK_THROWS_AS(load_tasks(no_tab), Error);

  const auto empty_query = root / "b.tsv";
  std::ofstream(empty_query) << "t1\t...\n";
  CHECK_THROWS_AS(load_tasks(empty_query), Error);
}

TEST_CASE("load_task_descriptions attaches to matching tasks") {
  const auto root = fresh_dir("tasks_desc");
  std::ofstream(root / "q.tsv") << "t1\twind\n";
  std::ofstream(root / "d.tsv") << "t1\tFind monthly wind speed datasets.\n";
  auto tasks = load_tasks(root / "q.tsv");
  load_task_descriptions(tasks, root / "d.tsv");
  CHECK(tasks.tasks[0].description == "Find monthly wind speed datasets.");
}
