// Copyright 2026 The UVIP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>

namespace uvip {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t tag) noexcept {
  return mix64(key ^ mix64(tag + 0x9e3779b97f4a7c15ULL));
}

constexpr std::uint64_t derive_key(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t key = mix64(seed);
  for (std::uint64_t tag : path) key = derive_key(key, tag);
  return key;
}

/// Counter-based random stream. The n-th draw depends only on (key, n), so a
/// stream keyed by (replicate, iteration, design index) produces the same
/// values no matter which thread consumes it or in which order streams are
/// visited.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Stream(std::uint64_t key) noexcept : key_(key) {}
  constexpr Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept
      : key_(derive_key(seed, path)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(operator()() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; consumes two draws, no cached spare.
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept {
    __extension__ using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(operator()()) * n) >> 64);
  }

  constexpr Stream substream(std::uint64_t tag) const noexcept {
    return Stream(derive_key(key_, tag));
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Stable tags for the independent stream families used across the library.
namespace stream_tag {
inline constexpr std::uint64_t sweep = 0x5357454550ULL;
inline constexpr std::uint64_t successor_rollout = 0x53524F4C4CULL;
inline constexpr std::uint64_t design = 0x44455349474EULL;
inline constexpr std::uint64_t policy_value = 0x5650495650ULL;
inline constexpr std::uint64_t environment = 0x454E56ULL;
inline constexpr std::uint64_t trajectory = 0x5452414AULL;
inline constexpr std::uint64_t reinforce = 0x5245494EULL;
inline constexpr std::uint64_t probe = 0x50524F4245ULL;
}  // namespace stream_tag

}  // namespace uvip
