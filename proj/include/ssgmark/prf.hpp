#pragma once

// Keyed, bit-exact seeding and the deterministic RNG behind every partition.
//
// Byte layout fed to FNV-1a 64: the 32 key bytes, then each part as 8
// little-endian bytes in order. The RNG is splitmix64; unit draws take the
// top 53 bits. Both are fixed so that detection reproduces injection exactly
// on any platform.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ssgmark/core.hpp"

namespace ssgmark {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

/// Plain FNV-1a 64 over a byte stream, continuing from `state`.
constexpr std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                                std::uint64_t state = kFnvOffsetBasis) {
  for (std::uint8_t b : bytes) {
    state ^= b;
    state *= kFnvPrime;
  }
  return state;
}

std::uint64_t hash_seed(const SecretKey& key, std::span<const std::uint64_t> parts);

class RngState {
 public:
  explicit RngState(std::uint64_t seed = 0) : state_(seed) {}

  /// Raw splitmix64 output; advances the state.
  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 bits of resolution.
  double next_unit();

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

/// Free-function form of RngState::next_unit.
inline double rng_next_unit(RngState& state) { return state.next_unit(); }

/// In-place Fisher-Yates: for i = n-1..1, j = floor(u * (i + 1)), swap(i, j).
template <typename T>
void permute_in_place(std::vector<T>& items, RngState& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t hi = i - 1;
    auto j = static_cast<std::size_t>(rng.next_unit() * static_cast<double>(i));
    if (j > hi) j = hi;
    std::swap(items[hi], items[j]);
  }
}

template <typename T>
std::vector<T> permute(std::vector<T> items, RngState rng) {
  permute_in_place(items, rng);
  return items;
}

/// Last `h` ids of `context`, left-padded with BOS when the context is shorter.
std::vector<std::uint64_t> context_window(std::span<const TokenId> context, std::size_t h);

/// Deterministic per-index sub-seed, e.g. one sampler stream per sequence.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Deterministic key derived from a base key and a run index.
SecretKey derive_key(const SecretKey& base, std::uint64_t index);

}  // namespace ssgmark
