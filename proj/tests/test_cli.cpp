// Drives the installed binary end to end against the bundled demo corpus.

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <vector>
#include <map>
#include <set>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kBin = DSEARCH_BIN;
const fs::path kDemo = DSEARCH_DEMO;

struct CmdResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

CmdResult run_cmd(const std::string& args) {
  const fs::path out_file = fs::temp_directory_path() / "dsearch-tests" / "cli-out.txt";
  fs::create_directories(out_file.parent_path());
  const std::string cmd = kBin + " " + args + " > " + out_file.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CmdResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_file);
  std::ostringstream buf;
  buf << in.rdbuf();
  result.output = buf.str();
  return result;
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "dsearch-tests" / "cli";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("the full pipeline runs against the bundled demo corpus") {
  const auto corpus = (kDemo / "corpus").string();
  const auto dir = work_dir();
  fs::remove_all(dir);
  fs::create_directories(dir);

  auto r = run_cmd("ingest --corpus " + corpus);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("datasets\t8") != std::string::npos);

  r = run_cmd("cooccur --corpus " + corpus + " --out-dir " + dir.string());
  CHECK(r.exit_code == 0);

  r = run_cmd("train-cofactor --preference " + (dir / "preference.txt").string() + " --sppmi " +
              (dir / "sppmi.txt").string() + " --out " + (dir / "cofactor.model").string() +
              " --latent-dim 8 --seed 42");
  CHECK(r.exit_code == 0);

  r = run_cmd("train-generator --corpus " + corpus + " --model " +
              (dir / "cofactor.model").string() + " --vocab " + (dir / "vocab.tsv").string() +
              " --out " + (dir / "forest.txt").string() + " --sibling-embedding --seed 42");
  CHECK(r.exit_code == 0);

  r = run_cmd("generate --corpus " + corpus + " --model " + (dir / "cofactor.model").string() +
              " --vocab " + (dir / "vocab.tsv").string() + " --generator " +
              (dir / "forest.txt").string() + " --out " + (dir / "labels.tsv").string() +
              " --top-m 10 --threshold 0.5 --sibling-embedding");
  CHECK(r.exit_code == 0);

  // top-m / threshold contract on the persisted labels
  std::ifstream labels(dir / "labels.tsv");
  std::string line;
  std::map<std::string, int> per_column;
  while (std::getline(labels, line)) {
    std::istringstream ls(line);
    std::string id, col, label, prob;
    REQUIRE(std::getline(ls, id, '\t'));
    REQUIRE(std::getline(ls, col, '\t'));
    REQUIRE(std::getline(ls, label, '\t'));
    REQUIRE(std::getline(ls, prob));
    CHECK(std::stod(prob) >= 0.5);
    CHECK(++per_column[id + ":" + col] <= 10);
  }

  r = run_cmd("index --corpus " + corpus + " --field labels-gen --gen-labels " +
              (dir / "labels.tsv").string() + " --out " + (dir / "gen.idx").string());
  CHECK(r.exit_code == 0);

  r = run_cmd("search --corpus " + corpus + " --query \"wind speed\" --w-text 0.2 --w-l 1" +
              " --gen-labels " + (dir / "labels.tsv").string() + " --vectors " +
              (kDemo / "vectors.txt").string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("Q0") != std::string::npos);
  CHECK(r.output.find("mystery1") != std::string::npos);

  r = run_cmd("tune --corpus " + corpus + " --tasks " + (kDemo / "tasks.tsv").string() +
              " --qrels " + (kDemo / "qrels.txt").string() + " --gen-labels " +
              (dir / "labels.tsv").string() + " --vectors " + (kDemo / "vectors.txt").string() +
              " --fields text,labels --forced text --metric-cutoff 5 --out " +
              (dir / "weights.conf").string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(dir / "weights.conf"));

  r = run_cmd("run --corpus " + corpus + " --tasks " + (kDemo / "tasks.tsv").string() +
              " --out " + (dir / "run.trec").string() + " --config " +
              (dir / "weights.conf").string() + " --gen-labels " + (dir / "labels.tsv").string() +
              " --vectors " + (kDemo / "vectors.txt").string() + " --tag slmr");
  CHECK(r.exit_code == 0);

  r = run_cmd("evaluate --run " + (dir / "run.trec").string() + " --qrels " +
              (kDemo / "qrels.txt").string() + " --fields-label T+D+G --out " +
              (dir / "report.tsv").string());
  CHECK(r.exit_code == 0);
  const auto report = slurp(dir / "report.tsv");
  CHECK(report.find("slmr") != std::string::npos);
  CHECK(report.find("ndcg@5") != std::string::npos);

  r = run_cmd("pool --runs " + (dir / "run.trec").string() + "," + (dir / "run.trec").string() +
              " --depth 3 --out " + (dir / "pool.tsv").string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(dir / "pool.tsv"));

  r = run_cmd("features --corpus " + corpus + " --tasks " + (kDemo / "tasks.tsv").string() +
              " --qrels " + (kDemo / "qrels.txt").string() + " --vectors " +
              (kDemo / "vectors.txt").string() + " --gen-labels " + (dir / "labels.tsv").string() +
              " --out " + (dir / "features.tsv").string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(dir / "features.tsv"));
}

TEST_CASE("rerunning a stage writes byte-identical artifacts") {
  const auto corpus = (kDemo / "corpus").string();
  const auto dir = work_dir();
  REQUIRE(fs::exists(dir / "preference.txt"));  // produced by the pipeline case

  auto r = run_cmd("train-cofactor --preference " + (dir / "preference.txt").string() +
                   " --sppmi " + (dir / "sppmi.txt").string() + " --out " +
                   (dir / "cofactor2.model").string() + " --latent-dim 8 --seed 42");
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(dir / "cofactor.model") == slurp(dir / "cofactor2.model"));

  r = run_cmd("generate --corpus " + corpus + " --model " + (dir / "cofactor.model").string() +
              " --vocab " + (dir / "vocab.tsv").string() + " --generator " +
              (dir / "forest.txt").string() + " --out " + (dir / "labels2.tsv").string() +
              " --top-m 10 --threshold 0.5 --sibling-embedding");
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(dir / "labels.tsv") == slurp(dir / "labels2.tsv"));
}

TEST_CASE("evaluate rejects runs whose tasks are missing from the qrels") {
  const auto dir = work_dir();
  std::ofstream(dir / "orphan.trec") << "nosuchtask.q0 Q0 gauge1 1 1.000000 x\n";
  const auto r = run_cmd("evaluate --run " + (dir / "orphan.trec").string() + " --qrels " +
                         (kDemo / "qrels.txt").string());
  CHECK(r.exit_code != 0);
  CHECK(r.output.find("nosuchtask") != std::string::npos);
}

TEST_CASE("missing artifacts and bad flags exit non-zero with one-line errors") {
  const auto corpus = (kDemo / "corpus").string();
  auto r = run_cmd("train-generator --corpus " + corpus +
                   " --model /nonexistent/model --vocab /nonexistent/vocab --out /tmp/x");
  CHECK(r.exit_code != 0);
  CHECK(r.output.find("/nonexistent/model") != std::string::npos);

  r = run_cmd("search --corpus " + corpus + " --query wind --w-l 1");
  CHECK(r.exit_code != 0);  // labels enabled without --gen-labels/--vectors
  CHECK(r.output.find("gen-labels") != std::string::npos);

  r = run_cmd("ingest --no-such-flag");
  CHECK(r.exit_code != 0);

  r = run_cmd("ingest --corpus /nonexistent/corpus");
  CHECK(r.exit_code != 0);
  CHECK(r.output.find("error:") != std::string::npos);
}

TEST_CASE("eight pooled baselines: four scorers across two representations") {
  const auto corpus = (kDemo / "corpus").string();
  const auto dir = work_dir();
  std::vector<std::string> run_files;
  for (const std::string scorer : {"bm25", "tfidf", "lm-jm", "lm-dirichlet"})
    for (const std::string field : {"all", "text"}) {
      const auto out = dir / ("base-" + scorer + "-" + field + ".trec");
      const auto r = run_cmd("run --corpus " + corpus + " --tasks " +
                             (kDemo / "tasks.tsv").string() + " --baseline " + scorer +
                             " --field " + field + " --out " + out.string() + " --tag " +
                             scorer + "-" + field);
      REQUIRE(r.exit_code == 0);
      run_files.push_back(out.string());
    }
  std::string joined;
  for (const auto& f : run_files) joined += (joined.empty() ? "" : ",") + f;
  const auto r = run_cmd("pool --runs " + joined + " --depth 100 --out " +
                         (dir / "pool8.tsv").string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("pooled_pairs") != std::string::npos);

  // every dataset retrieved by some baseline appears once per task
  std::ifstream pool_in(dir / "pool8.tsv");
  std::set<std::string> lines;
  std::string line;
  while (std::getline(pool_in, line)) CHECK(lines.insert(line).second);
  CHECK(lines.size() >= 8);  // both tasks cover the 8-dataset demo corpus
}

TEST_CASE("scorer parameter grid search runs from the CLI") {
  const auto corpus = (kDemo / "corpus").string();
  const auto r = run_cmd("tune --corpus " + corpus + " --tasks " + (kDemo / "tasks.tsv").string() +
                         " --qrels " + (kDemo / "qrels.txt").string() +
                         " --grid bm25 --field text --metric-cutoff 5");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("bm25-k1 = ") != std::string::npos);
  CHECK(r.output.find("bm25-b = ") != std::string::npos);
}
