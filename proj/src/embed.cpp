#include "dsearch/embed.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "dsearch/common.hpp"

namespace dsearch {

namespace {

constexpr const char* kNgramMarker = "#ng:";

std::string read_file_maybe_gzip(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (raw.size() < 2 || static_cast<unsigned char>(raw[0]) != 0x1f ||
      static_cast<unsigned char>(raw[1]) != 0x8b)
    return raw;

  z_stream zs{};
  if (inflateInit2(&zs, 15 + 16) != Z_OK)  // +16: gzip wrapper
    throw Error("zlib init failed for " + path.string());
  std::string out;
  std::vector<char> buf(1 << 16);
  zs.next_in = reinterpret_cast<Bytef*>(raw.data());
  zs.avail_in = static_cast<uInt>(raw.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = reinterpret_cast<Bytef*>(buf.data());
    zs.avail_out = static_cast<uInt>(buf.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw Error("corrupt gzip stream in " + path.string());
    }
    out.append(buf.data(), buf.size() - zs.avail_out);
  }
  inflateEnd(&zs);
  return out;
}

// Returns false for a zero-norm vector.
bool l2_normalize(std::vector<float>& v) {
  double norm = 0.0;
  for (const float x : v) norm += static_cast<double>(x) * x;
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) return false;
  for (auto& x : v) x = static_cast<float>(x / norm);
  return true;
}

}  // namespace

EmbeddingStore load_vectors(const std::filesystem::path& path) {
  const std::string content = read_file_maybe_gzip(path);
  std::istringstream in(content);

  EmbeddingStore store;
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw Error(path.string() + ":1: empty vector file");
  ++line_no;
  long long declared_count = -1;
  {
    std::istringstream header(line);
    std::string extra;
    if (!(header >> declared_count >> store.dim) || (header >> extra) || declared_count < 0 ||
        store.dim < 1)
      throw Error(path.string() + ":1: malformed header, expected \"count dim\"");
  }

  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    std::istringstream row(line);
    std::string token;
    row >> token;
    std::vector<float> vec(static_cast<std::size_t>(store.dim));
    for (auto& x : vec)
      if (!(row >> x))
        throw Error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(store.dim) + " vector components");
    float extra;
    if (row >> extra)
      throw Error(path.string() + ":" + std::to_string(line_no) + ": too many vector components");
    ++rows;

    if (!l2_normalize(vec)) {
      store.warnings.push_back(path.string() + ":" + std::to_string(line_no) +
                               ": zero-norm vector skipped");
      continue;
    }
    const bool is_ngram = token.rfind(kNgramMarker, 0) == 0;
    auto& table = is_ngram ? store.ngrams : store.vectors;
    const std::string key = is_ngram ? token.substr(4) : token;
    if (!table.emplace(key, vec).second) {
      table[key] = vec;  // last wins
      store.warnings.push_back(path.string() + ":" + std::to_string(line_no) +
                               ": duplicate token '" + token + "', last row kept");
    }
  }
  if (declared_count >= 0 && static_cast<std::size_t>(declared_count) != rows)
    store.warnings.push_back(path.string() + ": header declares " +
                             std::to_string(declared_count) + " rows, found " +
                             std::to_string(rows));
  return store;
}

std::optional<std::vector<float>> embed_token(const EmbeddingStore& store,
                                              const std::string& token) {
  if (auto it = store.vectors.find(token); it != store.vectors.end()) return it->second;
  if (store.ngrams.empty()) return std::nullopt;

  const std::string marked = "<" + token + ">";
  std::vector<float> acc(static_cast<std::size_t>(store.dim), 0.0f);
  std::size_t hits = 0;
  for (int n = store.ngram_min; n <= store.ngram_max; ++n) {
    if (static_cast<std::size_t>(n) > marked.size()) break;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= marked.size(); ++i) {
      auto it = store.ngrams.find(marked.substr(i, static_cast<std::size_t>(n)));
      if (it == store.ngrams.end()) continue;
      for (std::size_t d = 0; d < acc.size(); ++d) acc[d] += it->second[d];
      ++hits;
    }
  }
  if (hits == 0) return std::nullopt;
  for (auto& x : acc) x /= static_cast<float>(hits);
  if (!l2_normalize(acc)) return std::nullopt;
  return acc;
}

WeightedPointCloud embed_tokens(const EmbeddingStore& store,
                                std::span<const std::string> tokens) {
  std::map<std::string, std::size_t> counts;  // ordered: cloud independent of input order
  for (const auto& t : tokens) ++counts[t];

  WeightedPointCloud cloud;
  std::vector<std::size_t> kept_counts;
  for (const auto& [token, count] : counts) {
    auto vec = embed_token(store, token);
    if (!vec) continue;
    cloud.points.push_back(std::move(*vec));
    kept_counts.push_back(count);
  }
  const std::size_t total = std::accumulate(kept_counts.begin(), kept_counts.end(), std::size_t{0});
  if (total == 0) return {};
  cloud.weights.reserve(kept_counts.size());
  for (const std::size_t c : kept_counts)
    cloud.weights.push_back(static_cast<double>(c) / static_cast<double>(total));
  return cloud;
}

WeightedPointCloud truncate_cloud(WeightedPointCloud cloud, std::size_t cap) {
  if (cloud.size() <= cap) return cloud;
  std::vector<std::size_t> order(cloud.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cloud.weights[a] > cloud.weights[b]; });
  order.resize(cap);
  std::sort(order.begin(), order.end());  // keep original point order

  WeightedPointCloud out;
  double total = 0.0;
  for (const std::size_t i : order) total += cloud.weights[i];
  for (const std::size_t i : order) {
    out.points.push_back(std::move(cloud.points[i]));
    out.weights.push_back(cloud.weights[i] / total);
  }
  return out;
}

}  // namespace dsearch
