#include "ssgmark/prf.hpp"

#include <algorithm>

#include "ssgmark/lm.hpp"

namespace ssgmark {

std::uint64_t hash_seed(const SecretKey& key, std::span<const std::uint64_t> parts) {
  std::uint64_t h = fnv1a64(key.bytes);
  std::uint8_t le[8];
  for (std::uint64_t part : parts) {
    for (int b = 0; b < 8; ++b) le[b] = static_cast<std::uint8_t>(part >> (8 * b));
    h = fnv1a64(le, h);
  }
  return h;
}

std::uint64_t RngState::next_u64() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double RngState::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::vector<std::uint64_t> context_window(std::span<const TokenId> context, std::size_t h) {
  std::vector<std::uint64_t> window(h, kBosId);
  const std::size_t take = std::min(h, context.size());
  for (std::size_t i = 0; i < take; ++i) {
    window[h - take + i] = context[context.size() - take + i];
  }
  return window;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  RngState rng(seed ^ (index * 0xD1B54A32D192ED03ULL));
  rng.next_u64();
  return rng.next_u64();
}

SecretKey derive_key(const SecretKey& base, std::uint64_t index) {
  SecretKey out;
  const std::uint64_t parts[] = {0x6b65792d64657276ULL, index};
  RngState rng(hash_seed(base, parts));
  for (std::size_t i = 0; i < out.bytes.size(); i += 8) {
    const std::uint64_t v = rng.next_u64();
    for (int b = 0; b < 8; ++b) out.bytes[i + b] = static_cast<std::uint8_t>(v >> (8 * b));
  }
  return out;
}

}  // namespace ssgmark
