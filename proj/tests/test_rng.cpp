#include <doctest.h>

#include <cmath>
#include <vector>

#include "rpchol/rng.hpp"

using namespace rpchol;

TEST_CASE("same seed reproduces the stream") {
  SplitMix64 a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
  SplitMix64 a(1), b(2);
  int equal = 0;
  for (int i = 0; i < 64; ++i) equal += a.next_u64() == b.next_u64();
  CHECK(equal == 0);
}

TEST_CASE("doubles live in [0, 1)") {
  SplitMix64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("derive_stream depends on every tag") {
  CHECK(derive_stream(3, {1}) != derive_stream(3, {2}));
  CHECK(derive_stream(3, {1}) != derive_stream(4, {1}));
  CHECK(derive_stream(3, {1, 0}) != derive_stream(3, {1, 1}));
  CHECK(derive_stream(3, {1}) == derive_stream(3, {1}));
}

TEST_CASE("sample_proportional matches the weights") {
  // Frequencies over 1e5 draws vs the exact probabilities, three sigma.
  Eigen::VectorXd w(3);
  w << 3.0, 1.0, 0.0;
  SplitMix64 rng(11);
  const int runs = 100000;
  std::vector<int> counts(3, 0);
  for (int i = 0; i < runs; ++i) ++counts[static_cast<std::size_t>(sample_proportional(w, w.sum(), rng))];
  CHECK(counts[2] == 0);
  const double p0 = 0.75;
  const double se = std::sqrt(p0 * (1 - p0) / runs);
  CHECK(std::abs(counts[0] / double(runs) - p0) < 3 * se);
}

TEST_CASE("sample_proportional skips nonpositive weights") {
  Eigen::VectorXd w(4);
  w << 0.0, -1.0, 2.0, 0.0;
  SplitMix64 rng(5);
  for (int i = 0; i < 100; ++i) CHECK(sample_proportional(w, 2.0, rng) == 2);
}

TEST_CASE("sample_proportional rejects empty and nonpositive totals") {
  SplitMix64 rng(1);
  Eigen::VectorXd w(2);
  w << 1.0, 1.0;
  CHECK_THROWS(sample_proportional(Eigen::VectorXd(), 1.0, rng));
  CHECK_THROWS(sample_proportional(w, 0.0, rng));
}

TEST_CASE("normal deviates have roughly standard moments") {
  SplitMix64 rng(123);
  const int runs = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < runs; ++i) {
    const double x = sample_normal(rng);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / runs;
  const double var = sum_sq / runs - mean * mean;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(double(runs)));
  CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / runs));
}
