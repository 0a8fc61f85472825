#include <doctest.h>

#include <zlib.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dsearch/common.hpp"
#include "dsearch/embed.hpp"
#include "support/fixtures.hpp"

using namespace dsearch;
namespace fs = std::filesystem;

namespace {

fs::path io_dir() {
  const fs::path dir = fs::temp_directory_path() / "dsearch-tests" / "embed";
  fs::create_directories(dir);
  return dir;
}

fs::path write_text(const std::string& name, const std::string& content) {
  const auto path = io_dir() / name;
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST_CASE("load_vectors reads the text format and L2-normalizes") {
  const auto path = write_text("basic.vec", "2 3\na 1 0 0\nb 3 4 0\n");
  const auto store = load_vectors(path);
  CHECK(store.dim == 3);
  REQUIRE(store.vectors.size() == 2);
  CHECK(store.vectors.at("a") == std::vector<float>{1.0f, 0.0f, 0.0f});
  CHECK(store.vectors.at("b")[0] == doctest::Approx(0.6f));
  CHECK(store.vectors.at("b")[1] == doctest::Approx(0.8f));
  CHECK(store.vectors.at("b")[2] == 0.0f);
}

TEST_CASE("load_vectors parse errors carry line numbers") {
  const auto short_row = write_text("short.vec", "1 3\na 1 0\n");
  CHECK_THROWS_WITH_AS(load_vectors(short_row) /* 2 floats under dim 3 */,
                       doctest::Contains(":2:"), Error);

  const auto bad_header = write_text("badheader.vec", "nope\na 1 0\n");
  CHECK_THROWS_AS(load_vectors(bad_header), Error);

  const auto long_row = write_text("long.vec", "1 2\na 1 0 5\n");
  CHECK_THROWS_AS(load_vectors(long_row), Error);
}

TEST_CASE("duplicate tokens keep the last row with a warning") {
  const auto path = write_text("dup.vec", "2 2\na 1 0\na 0 1\n");
  const auto store = load_vectors(path);
  CHECK(store.vectors.at("a") == std::vector<float>{0.0f, 1.0f});
  REQUIRE(store.warnings.size() == 1);
  CHECK(store.warnings[0].find("duplicate") != std::string::npos);
}

TEST_CASE("gzip-compressed vector files load transparently") {
  const std::string content = "1 2\nwind 0 1\n";
  const auto path = io_dir() / "vec.txt.gz";
  gzFile gz = gzopen(path.string().c_str(), "wb");
  REQUIRE(gz != nullptr);
  gzwrite(gz, content.data(), static_cast<unsigned>(content.size()));
  gzclose(gz);

  const auto store = load_vectors(path);
  CHECK(store.vectors.count("wind") == 1);
}

TEST_CASE("embed_token looks up vocabulary then composes n-grams") {
  const auto path = write_text("ngram.vec", "3 2\ncity 1 0\n#ng:<ab 1 0\n#ng:bbr 0 1\n");
  const auto store = load_vectors(path);

  CHECK(*embed_token(store, "city") == store.vectors.at("city"));
  CHECK(!embed_token(store, "zzz").has_value());

  // 3..6-grams of "<abbr>" intersect the table exactly in {"<ab", "bbr"}
  const auto composed = embed_token(store, "abbr");
  REQUIRE(composed.has_value());
  const double inv = 1.0 / std::sqrt(2.0);
  CHECK((*composed)[0] == doctest::Approx(inv).epsilon(1e-6));
  CHECK((*composed)[1] == doctest::Approx(inv).epsilon(1e-6));
}

TEST_CASE("OOV token with an empty n-gram table is absent") {
  const auto path = write_text("no_ngrams.vec", "1 2\ncity 1 0\n");
  const auto store = load_vectors(path);
  CHECK(!embed_token(store, "abbr").has_value());
}

TEST_CASE("embed_tokens merges duplicates and normalizes weights") {
  const auto path = write_text("cloud.vec", "2 2\ncity 1 0\nyear 0 1\n");
  const auto store = load_vectors(path);

  const std::vector<std::string> tokens = {"city", "city", "year"};
  const auto cloud = embed_tokens(store, tokens);
  REQUIRE(cloud.size() == 2);
  CHECK(cloud.weights[0] == doctest::Approx(2.0 / 3.0));
  CHECK(cloud.weights[1] == doctest::Approx(1.0 / 3.0));

  const std::vector<std::string> single = {"year"};
  const auto one = embed_tokens(store, single);
  REQUIRE(one.size() == 1);
  CHECK(one.weights[0] == 1.0);

  const std::vector<std::string> oov = {"zzz", "qqq"};
  CHECK(embed_tokens(store, oov).empty());
}

TEST_CASE("embed_tokens drops absent tokens and renormalizes over the rest") {
  const auto path = write_text("drop.vec", "1 2\ncity 1 0\n");
  const auto store = load_vectors(path);
  const std::vector<std::string> tokens = {"city", "city", "zzz"};
  const auto cloud = embed_tokens(store, tokens);
  REQUIRE(cloud.size() == 1);
  CHECK(cloud.weights[0] == 1.0);
}

TEST_CASE("clouds are permutation-invariant, unit-norm and sum to one") {
  const auto path = write_text("perm.vec", "3 3\na 1 0 0\nb 1 2 2\nc 0 0 5\n");
  const auto store = load_vectors(path);
  Rng rng(6);
  std::vector<std::string> tokens = {"a", "b", "b", "c", "c", "c", "zzz"};
  for (int trial = 0; trial < 10; ++trial) {
    for (std::size_t i = tokens.size() - 1; i > 0; --i)
      std::swap(tokens[i], tokens[rng.next_index(i + 1)]);
    const auto cloud = embed_tokens(store, tokens);
    REQUIRE(cloud.size() == 3);
    double total = 0.0;
    for (const double w : cloud.weights) total += w;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& point : cloud.points) {
      double norm = 0.0;
      for (const float x : point) norm += static_cast<double>(x) * x;
      CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-6));
    }
    // lexicographic point order: a, b, c regardless of input order
    CHECK(cloud.weights[0] == doctest::Approx(1.0 / 6.0));
    CHECK(cloud.weights[1] == doctest::Approx(2.0 / 6.0));
    CHECK(cloud.weights[2] == doctest::Approx(3.0 / 6.0));
  }
}

TEST_CASE("truncate_cloud keeps the heaviest points and renormalizes") {
  WeightedPointCloud cloud;
  cloud.points = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  cloud.weights = {0.1, 0.4, 0.2, 0.3};
  const auto cut = truncate_cloud(cloud, 2);
  REQUIRE(cut.size() == 2);
  CHECK(cut.points[0] == std::vector<float>{0, 1});
  CHECK(cut.points[1] == std::vector<float>{0, -1});
  CHECK(cut.weights[0] == doctest::Approx(0.4 / 0.7));
  CHECK(cut.weights[1] == doctest::Approx(0.3 / 0.7));
}
