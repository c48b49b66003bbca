#pragma once

// Green/red vocabulary split for one generation step.
//
// kgw_partition: logit-independent pseudorandom split keyed on the context window.
// ssg_partition: sort the top-k ids by logit, pair them consecutively, color one
//   token of each pair green; the remaining ids are split pseudorandomly so the
//   green set still has floor(gamma*|V|) members.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "ssgmark/core.hpp"

namespace ssgmark {

class Partition {
 public:
  Partition() = default;
  explicit Partition(std::size_t vocab_size) : green_(vocab_size, 0) {}

  std::size_t vocab_size() const { return green_.size(); }
  std::size_t green_size() const { return green_size_; }
  bool is_green(TokenId id) const { return green_.at(id) != 0; }

  void set_green(TokenId id) {
    if (!green_.at(id)) {
      green_[id] = 1;
      ++green_size_;
    }
  }

  std::vector<TokenId> green_ids() const;
  std::vector<TokenId> red_ids() const;
  std::span<const std::uint8_t> mask() const { return green_; }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<std::uint8_t> green_;
  std::size_t green_size_ = 0;
};

struct PairGroup {
  TokenId hi;  // higher logit rank
  TokenId lo;
};

struct PairColor {
  TokenId green;
  TokenId red;
};

Partition kgw_partition(const SecretKey& key, std::span<const TokenId> context, double gamma,
                        std::size_t vocab_size, std::size_t window_h);

/// Colors one token of {v1, v2} green. The seed covers (min, max) ++ window,
/// and r <= 0.5 selects the smaller id, so argument order never matters.
PairColor pair_assign(const SecretKey& key, std::span<const TokenId> context, TokenId v1,
                      TokenId v2, std::size_t window_h);

Partition ssg_partition(const SecretKey& key, std::span<const TokenId> context,
                        std::span<const double> logits, double gamma, std::size_t k,
                        std::size_t window_h);

/// Consecutive top-k pairs as used by ssg_partition.
std::vector<PairGroup> ssg_pairs(std::span<const double> logits, std::size_t k);

/// Dispatch on cfg.method (kgw or ssg). Throws ConfigError for Method::none.
Partition build_partition(const WatermarkConfig& cfg, std::span<const TokenId> context,
                          std::span<const double> logits);

}  // namespace ssgmark
