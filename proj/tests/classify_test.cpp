#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"
#include "tts/classify.hpp"

using namespace tts;

namespace {

BlockSystem scalar_system(double a11, double a12, double a21, double a22) {
  BlockSystem s;
  s.a11 = Matrix::Constant(1, 1, a11);
  s.a12 = Matrix::Constant(1, 1, a12);
  s.a21 = Matrix::Constant(1, 1, a21);
  s.a22 = Matrix::Constant(1, 1, a22);
  return s;
}

}  // namespace

TEST_CASE("default grid spans six decades and contains one") {
  const auto grid = default_kappa_grid();
  REQUIRE(grid.size() == 61);
  CHECK(grid.front() == doctest::Approx(1e-3));
  CHECK(grid.back() == doctest::Approx(1e3));
  CHECK(grid[30] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("trace argument excludes the all-negative-trace system") {
  const Classification r = classify(scalar_system(-4, -2, -1, -3));
  CHECK_FALSE(r.in_b);
  CHECK_FALSE(r.in_c);
  CHECK_FALSE(r.in_d);
  CHECK_FALSE(r.kappa_grid_exhausted);  // decided, not merely unresolved
}

TEST_CASE("tuned-ratio-only system: B with small-kappa witnesses") {
  const BlockSystem s = scalar_system(2, -4, 3, -5);
  const Classification r = classify(s);
  CHECK(r.in_b);
  CHECK_FALSE(r.in_c);
  CHECK_FALSE(r.in_d);
  REQUIRE(r.witness_kappa.has_value());
  CHECK(certifies_b(s, *r.witness_kappa));
  // Every kappa below 0.4 certifies; the reference point 0.2 in particular.
  CHECK(certifies_b(s, 0.2));
  CHECK_FALSE(certifies_b(s, 0.4));
  CHECK(*r.witness_kappa < 0.4);
}

TEST_CASE("untuned-only system: C without D") {
  const Classification r = classify(scalar_system(3, 4, -1, -1));
  CHECK(r.in_b);
  CHECK(r.in_c);
  CHECK_FALSE(r.in_d);
}

TEST_CASE("two-time-scale-only system: D without C") {
  const Classification r = classify(scalar_system(-5, 3, -4, 2));
  CHECK(r.in_b);
  CHECK_FALSE(r.in_c);
  CHECK(r.in_d);
}

TEST_CASE("doubly solvable system: C and D") {
  const Classification r = classify(scalar_system(4, 2, 1, 3));
  CHECK(r.in_b);
  CHECK(r.in_c);
  CHECK(r.in_d);
}

TEST_CASE("membership implications hold on random block systems") {
  SplitMix64 rng(61);
  int c_count = 0, d_count = 0;
  for (int trial = 0; trial < 500; ++trial) {
    BlockSystem s;
    s.a11 = test::random_matrix(rng, 2, 2, 3.0);
    s.a12 = test::random_matrix(rng, 2, 2, 3.0);
    s.a21 = test::random_matrix(rng, 2, 2, 3.0);
    s.a22 = test::random_matrix(rng, 2, 2, 3.0);
    const Classification r = classify(s);
    if (r.in_c) {
      ++c_count;
      CHECK(r.in_b);
    }
    if (r.in_d) {
      ++d_count;
      // D implies B; either the grid certified it or the exhaustion flag is
      // raised alongside the implication.
      CHECK(r.in_b);
      CHECK((r.witness_kappa.has_value() || r.kappa_grid_exhausted));
    }
  }
  CHECK(c_count > 0);
  CHECK(d_count > 0);
}

TEST_CASE("positive scaling preserves membership in C") {
  SplitMix64 rng(62);
  for (int trial = 0; trial < 50; ++trial) {
    BlockSystem s;
    s.a11 = test::random_matrix(rng, 2, 2, 2.0);
    s.a12 = test::random_matrix(rng, 2, 2, 2.0);
    s.a21 = test::random_matrix(rng, 2, 2, 2.0);
    s.a22 = test::random_matrix(rng, 2, 2, 2.0);
    BlockSystem scaled;
    const double c = rng.uniform(0.1, 10.0);
    scaled.a11 = c * s.a11;
    scaled.a12 = c * s.a12;
    scaled.a21 = c * s.a21;
    scaled.a22 = c * s.a22;
    CHECK(classify(s).in_c == classify(scaled).in_c);
  }
}

TEST_CASE("degenerate A22 yields a negative D membership with a note") {
  const Classification r = classify(scalar_system(1, 1, 1, 0));
  CHECK_FALSE(r.in_d);
}
