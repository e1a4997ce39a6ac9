#include "ginet/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

using ginet::Rng;

TEST_CASE("same seed reproduces the same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.uniform() == b.uniform());
  Rng c(42), d(43);
  int differing = 0;
  for (int i = 0; i < 100; ++i)
    if (c.uniform() != d.uniform()) ++differing;
  CHECK(differing > 90);
}

TEST_CASE("uniform stays in [0,1) with the right first two moments") {
  Rng rng(7);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sumsq += u * u;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  // Monte-Carlo oracle: mean 1/2 (sd of the estimate ~ 1/sqrt(12n)), var 1/12.
  CHECK(std::abs(mean - 0.5) < 3.0 / std::sqrt(12.0 * n));
  CHECK(std::abs(var - 1.0 / 12.0) < 0.002);
}

TEST_CASE("uniform_int covers its range uniformly and rejects empty ranges") {
  Rng rng(11);
  std::vector<int> counts(6, 0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) {
    const auto v = rng.uniform_int(10, 15);
    REQUIRE(v >= 10);
    REQUIRE(v <= 15);
    ++counts[static_cast<std::size_t>(v - 10)];
  }
  for (int c : counts) {
    // Binomial(n, 1/6): sd ~ 91; allow 4 sd.
    CHECK(std::abs(c - n / 6) < 4 * std::sqrt(n * (1.0 / 6) * (5.0 / 6)));
  }
  CHECK_THROWS_AS(rng.uniform_int(3, 2), ginet::ParameterError);
}

TEST_CASE("normal draws match N(0,1) moments") {
  Rng rng(13);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
  // Var(x^2) = 2 for a standard normal; 3 sd window.
  CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));
  Rng scaled(13);
  double s = 0.0;
  for (int i = 0; i < 50000; ++i) s += scaled.normal(2.0, 0.5);
  CHECK(std::abs(s / 50000 - 2.0) < 3.0 * 0.5 / std::sqrt(50000.0));
}

TEST_CASE("gumbel draws have the Euler-Mascheroni mean and pi^2/6 variance") {
  Rng rng(17);
  const int n = 300000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.gumbel();
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  const double euler = 0.5772156649;
  const double target_var = M_PI * M_PI / 6.0;
  CHECK(std::abs(mean - euler) < 3.0 * std::sqrt(target_var / n));
  CHECK(std::abs(var - target_var) < 0.05);
}

TEST_CASE("derived streams are independent of draw position and of each other") {
  Rng parent(99);
  Rng child_before = parent.derive(5);
  for (int i = 0; i < 100; ++i) parent.uniform();
  Rng child_after = parent.derive(5);
  for (int i = 0; i < 100; ++i) CHECK(child_before.uniform() == child_after.uniform());

  Rng a = Rng(99).derive(1), b = Rng(99).derive(2);
  int differing = 0;
  for (int i = 0; i < 100; ++i)
    if (a.uniform() != b.uniform()) ++differing;
  CHECK(differing > 90);
}

TEST_CASE("shuffle yields a permutation; sampling without replacement is distinct") {
  Rng rng(5);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 10; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);

  const auto picks = rng.sample_without_replacement(100, 30);
  CHECK(picks.size() == 30);
  std::set<int> uniq(picks.begin(), picks.end());
  CHECK(uniq.size() == 30);
  for (int p : picks) {
    CHECK(p >= 0);
    CHECK(p < 100);
  }
  CHECK_THROWS_AS(rng.sample_without_replacement(5, 6), ginet::ParameterError);
}
