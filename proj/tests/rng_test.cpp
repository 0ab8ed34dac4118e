#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "tts/rng.hpp"

using namespace tts;

TEST_CASE("identical seeds give identical sequences") {
  SplitMix64 a = SplitMix64::stream(123, 7);
  SplitMix64 b = SplitMix64::stream(123, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("distinct streams decorrelate") {
  SplitMix64 a = SplitMix64::stream(123, 0);
  SplitMix64 b = SplitMix64::stream(123, 1);
  int collisions = 0;
  for (int i = 0; i < 1000; ++i) {
    if (a.next() == b.next()) ++collisions;
  }
  CHECK(collisions == 0);
}

TEST_CASE("uniform01 lands in [0,1) with the right mean") {
  SplitMix64 rng(99);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // 3 sigma of the mean of n uniforms: 3 / sqrt(12 n).
  CHECK(std::abs(sum / n - 0.5) < 3.0 / std::sqrt(12.0 * n));
}

TEST_CASE("categorical draws match their weights within binomial error") {
  SplitMix64 rng(7);
  Vector w(4);
  w << 0.1, 0.2, 0.3, 0.4;
  const int n = 100000;
  Eigen::Vector4i counts = Eigen::Vector4i::Zero();
  for (int i = 0; i < n; ++i) ++counts(rng.categorical(w));
  for (int j = 0; j < 4; ++j) {
    const double p = w(j);
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(counts(j) / static_cast<double>(n) - p) < 3.0 * se);
  }
}
