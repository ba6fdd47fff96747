// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "t2d/rng.hpp"

using namespace t2d;

TEST_CASE("streams are deterministic and counter-based") {
  RngStream a(42, 7);
  RngStream b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(a.counter() == 100);

  // A fresh stream can reproduce the same draw out of order.
  RngStream c(42, 7);
  std::vector<std::uint64_t> first(10);
  for (auto& v : first) v = c.next_u64();
  RngStream d(42, 7);
  for (int i = 0; i < 5; ++i) d.next_u64();
  CHECK(d.next_u64() == first[5]);
}

TEST_CASE("distinct stream ids decorrelate") {
  RngStream a(42, 1);
  RngStream b(42, 2);
  int equal = 0;
  for (int i = 0; i < 1000; ++i)
    if (a.next_u64() == b.next_u64()) ++equal;
  CHECK(equal == 0);
}

TEST_CASE("derive gives reproducible children") {
  RngStream root(9, 3);
  RngStream c1 = root.derive(5);
  RngStream c2 = root.derive(5);
  CHECK(c1.next_u64() == c2.next_u64());
  CHECK(root.counter() == 0);  // derive does not advance the parent
}

TEST_CASE("unit_real stays in [0,1) and is roughly uniform") {
  RngStream rng(123, 0);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = rng.unit_real();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
    sum += v;
  }
  // SE of the mean = 1/sqrt(12 n) ~ 0.0009; allow 5 sigma.
  CHECK(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("uniform_below covers the range without bias") {
  RngStream rng(7, 0);
  std::vector<int> hist(10, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++hist[rng.uniform_below(10)];
  for (const int h : hist) {
    // 5 sigma of Binomial(1e5, 0.1).
    CHECK(std::abs(h - n / 10) < 5 * std::sqrt(n * 0.1 * 0.9));
  }
  CHECK(rng.uniform_below(1) == 0);
  CHECK(rng.uniform_below(0) == 0);
}

TEST_CASE("uniform_int is inclusive on both ends") {
  RngStream rng(7, 1);
  bool saw_lo = false, saw_hi = false;
  for (int i = 0; i < 1000; ++i) {
    const auto v = rng.uniform_int(-2, 2);
    REQUIRE(v >= -2);
    REQUIRE(v <= 2);
    saw_lo |= v == -2;
    saw_hi |= v == 2;
  }
  CHECK(saw_lo);
  CHECK(saw_hi);
}

TEST_CASE("normal has unit scale") {
  RngStream rng(55, 0);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("shuffle is a permutation and deterministic") {
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[static_cast<std::size_t>(i)] = i;
  RngStream rng(3, 0);
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);

  std::vector<int> w(50);
  for (int i = 0; i < 50; ++i) w[static_cast<std::size_t>(i)] = i;
  RngStream rng2(3, 0);
  rng2.shuffle(w);
  CHECK(v == w);
}
