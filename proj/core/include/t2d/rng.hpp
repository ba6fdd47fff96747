// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace t2d {

// SplitMix64 finalizer. Bijective 64-bit mixer with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Combines two ids into one stream id. Used to derive per-sample and
// per-purpose substreams from a master seed without sequential dependence.
constexpr std::uint64_t substream(std::uint64_t parent, std::uint64_t child) noexcept {
  return mix64(mix64(parent) ^ child);
}

// Counter-based deterministic random stream.
//
// Draw i of stream (master_seed, stream_id) is a pure function of
// (master_seed, stream_id, i), so any sample's randomness can be
// reconstructed independently of generation order or thread layout.
// Streams are single-owner: advancing the counter is the only mutation.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id = 0) noexcept
      : master_seed_(master_seed),
        stream_id_(stream_id),
        base_(mix64(mix64(master_seed) ^ stream_id)) {}

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t counter() const noexcept { return counter_; }

  // Independent child stream; does not advance this stream.
  RngStream derive(std::uint64_t child_id) const noexcept {
    return RngStream(master_seed_, substream(stream_id_, child_id));
  }

  std::uint64_t next_u64() noexcept {
    return mix64(base_ + 0x9e3779b97f4a7c15ULL * counter_++);
  }

  // Uniform on [0, 1) with 53 random bits.
  double unit_real() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform_real(double lo, double hi) noexcept {
    return lo + (hi - lo) * unit_real();
  }

  // Uniform on {0, ..., n-1}. Unbiased via rejection; n = 0 returns 0.
  std::uint64_t uniform_below(std::uint64_t n) noexcept {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r < limit) return r % n;
    }
  }

  // Uniform integer on [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
    return lo + static_cast<std::int64_t>(
                    uniform_below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  bool bernoulli(double p) noexcept { return unit_real() < p; }

  // Standard normal via Box-Muller; consumes two uniforms per call.
  double normal() noexcept {
    const double u1 = 1.0 - unit_real();  // (0, 1]
    const double u2 = unit_real();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) noexcept {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = uniform_below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

}  // namespace t2d
