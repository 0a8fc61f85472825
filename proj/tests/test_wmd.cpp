#include <doctest.h>

#include <cmath>

#include "dsearch/common.hpp"
#include "dsearch/embed.hpp"
#include "dsearch/ranking.hpp"
#include "dsearch/transport.hpp"
#include "support/oracles.hpp"

using namespace dsearch;

namespace {

std::vector<float> unit(std::vector<double> v) {
  double norm = 0.0;
  for (const double x : v) norm += x * x;
  norm = std::sqrt(norm);
  std::vector<float> out;
  for (const double x : v) out.push_back(static_cast<float>(x / norm));
  return out;
}

WeightedPointCloud random_cloud(Rng& rng, std::size_t max_points, std::size_t dim) {
  WeightedPointCloud cloud;
  const std::size_t n = 1 + rng.next_index(max_points);
  double total = 0.0;
  std::vector<double> raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.uniform(-1, 1);
    cloud.points.push_back(unit(v));
    raw[i] = 0.05 + rng.next_double();
    total += raw[i];
  }
  for (const double w : raw) cloud.weights.push_back(w / total);
  return cloud;
}

}  // namespace

TEST_CASE("wmd of identical clouds is zero") {
  WeightedPointCloud a;
  a.points = {unit({1, 0, 0}), unit({0, 1, 0})};
  a.weights = {0.3, 0.7};
  CHECK(wmd(a, a) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("wmd of two single points is their distance") {
  WeightedPointCloud a, b;
  a.points = {unit({1, 0})};
  a.weights = {1.0};
  b.points = {unit({0, 1})};
  b.weights = {1.0};
  CHECK(wmd(a, b) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  // distance exactly 1: 60 degrees apart on the unit circle
  WeightedPointCloud c, d;
  c.points = {unit({1, 0})};
  c.weights = {1.0};
  d.points = {unit({0.5, std::sqrt(3.0) / 2.0})};
  d.weights = {1.0};
  CHECK(wmd(c, d) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("wmd with a single sink is the weighted average distance") {
  WeightedPointCloud a, b;
  a.points = {unit({1, 0, 0}), unit({0, 1, 0})};
  a.weights = {0.5, 0.5};
  b.points = {unit({0, 0, 1})};
  b.weights = {1.0};
  const double d0 = std::sqrt(2.0), d1 = std::sqrt(2.0);
  CHECK(wmd(a, b) == doctest::Approx(0.5 * d0 + 0.5 * d1).epsilon(1e-12));
}

TEST_CASE("wmd rejects empty clouds") {
  WeightedPointCloud a, empty;
  a.points = {unit({1, 0})};
  a.weights = {1.0};
  CHECK_THROWS_AS(wmd(a, empty), Error);
  CHECK_THROWS_AS(wmd(empty, a), Error);
}

TEST_CASE("transport solver agrees with brute-force vertex enumeration up to 4x4") {
  Rng rng(271);
  for (std::size_t m = 1; m <= 4; ++m)
    for (std::size_t n = 1; n <= 4; ++n)
      for (int trial = 0; trial < 12; ++trial) {
        std::vector<double> a(m), b(n);
        double sa = 0.0, sb = 0.0;
        for (auto& x : a) {
          x = 0.05 + rng.next_double();
          sa += x;
        }
        for (auto& x : b) {
          x = 0.05 + rng.next_double();
          sb += x;
        }
        for (auto& x : a) x /= sa;
        for (auto& x : b) x /= sb;
        std::vector<double> cost(m * n);
        for (auto& c : cost) c = rng.next_double() * 2.0;

        const double got = transport_min_cost(a, b, cost);
        const double expected = oracle::transport_bruteforce(a, b, cost);
        CHECK(got == doctest::Approx(expected).epsilon(1e-8));
      }
}

TEST_CASE("wmd satisfies the metric properties on random clouds") {
  Rng rng(997);
  for (int trial = 0; trial < 60; ++trial) {
    const auto a = random_cloud(rng, 5, 4);
    const auto b = random_cloud(rng, 5, 4);
    const auto c = random_cloud(rng, 5, 4);

    CHECK(wmd(a, a) == doctest::Approx(0.0).epsilon(1e-9));
    const double ab = wmd(a, b);
    const double ba = wmd(b, a);
    CHECK(ab >= -1e-12);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-7));
    const double ac = wmd(a, c);
    const double cb = wmd(c, b);
    CHECK(ab <= ac + cb + 1e-7);
  }
}

TEST_CASE("degenerate marginals still solve exactly") {
  // equal supplies/demands create degenerate pivots
  std::vector<double> a = {0.5, 0.5};
  std::vector<double> b = {0.5, 0.5};
  std::vector<double> cost = {0.0, 1.0, 1.0, 0.0};
  CHECK(transport_min_cost(a, b, cost) == doctest::Approx(0.0));

  std::vector<double> cost2 = {1.0, 0.0, 0.0, 1.0};
  CHECK(transport_min_cost(a, b, cost2) == doctest::Approx(0.0));
}
