#include "ssgmark/partition.hpp"

#include <algorithm>
#include <numeric>

#include "ssgmark/prf.hpp"

namespace ssgmark {

std::vector<TokenId> Partition::green_ids() const {
  std::vector<TokenId> out;
  out.reserve(green_size_);
  for (std::size_t i = 0; i < green_.size(); ++i) {
    if (green_[i]) out.push_back(static_cast<TokenId>(i));
  }
  return out;
}

std::vector<TokenId> Partition::red_ids() const {
  std::vector<TokenId> out;
  out.reserve(green_.size() - green_size_);
  for (std::size_t i = 0; i < green_.size(); ++i) {
    if (!green_[i]) out.push_back(static_cast<TokenId>(i));
  }
  return out;
}

namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw InvalidArgument("gamma must lie in (0, 1), got " + std::to_string(gamma));
  }
}

}  // namespace

Partition kgw_partition(const SecretKey& key, std::span<const TokenId> context, double gamma,
                        std::size_t vocab_size, std::size_t window_h) {
  check_gamma(gamma);
  const auto window = context_window(context, window_h);
  RngState rng(hash_seed(key, window));

  std::vector<TokenId> ids(vocab_size);
  std::iota(ids.begin(), ids.end(), TokenId{0});
  permute_in_place(ids, rng);

  Partition out(vocab_size);
  const std::size_t n_green = green_count(gamma, vocab_size);
  for (std::size_t i = 0; i < n_green; ++i) out.set_green(ids[i]);
  return out;
}

PairColor pair_assign(const SecretKey& key, std::span<const TokenId> context, TokenId v1,
                      TokenId v2, std::size_t window_h) {
  if (v1 == v2) throw InvalidArgument("pair_assign: tokens must differ");
  const TokenId lo = std::min(v1, v2);
  const TokenId hi = std::max(v1, v2);

  std::vector<std::uint64_t> parts;
  parts.reserve(2 + window_h);
  parts.push_back(lo);
  parts.push_back(hi);
  const auto window = context_window(context, window_h);
  parts.insert(parts.end(), window.begin(), window.end());

  RngState rng(hash_seed(key, parts));
  const double r = rng.next_unit();
  if (r <= 0.5) return {lo, hi};
  return {hi, lo};
}

std::vector<PairGroup> ssg_pairs(std::span<const double> logits, std::size_t k) {
  if (k % 2 != 0) throw InvalidArgument("topk must be even, got " + std::to_string(k));
  const auto top = topk_indices(logits, k);
  std::vector<PairGroup> pairs;
  pairs.reserve(k / 2);
  for (std::size_t i = 0; i + 1 < top.size(); i += 2) pairs.push_back({top[i], top[i + 1]});
  return pairs;
}

Partition ssg_partition(const SecretKey& key, std::span<const TokenId> context,
                        std::span<const double> logits, double gamma, std::size_t k,
                        std::size_t window_h) {
  check_gamma(gamma);
  const std::size_t vocab_size = logits.size();
  if (k == 0 || k % 2 != 0) throw ConfigError("topk must be an even positive integer");
  if (k > vocab_size) throw ConfigError("topk exceeds vocabulary size");
  const std::size_t n_green = green_count(gamma, vocab_size);
  const std::size_t half = k / 2;
  if (n_green < half || vocab_size - k < n_green - half) {
    throw ConfigError("ssg: tail green count floor(gamma*|V|) - k/2 is out of range");
  }

  Partition out(vocab_size);
  std::vector<std::uint8_t> in_head(vocab_size, 0);
  for (const auto& [hi, lo] : ssg_pairs(logits, k)) {
    in_head[hi] = in_head[lo] = 1;
    out.set_green(pair_assign(key, context, hi, lo, window_h).green);
  }

  // Remaining ids in ascending order, shuffled under the window-only seed.
  std::vector<TokenId> tail;
  tail.reserve(vocab_size - k);
  for (std::size_t i = 0; i < vocab_size; ++i) {
    if (!in_head[i]) tail.push_back(static_cast<TokenId>(i));
  }
  RngState rng(hash_seed(key, context_window(context, window_h)));
  permute_in_place(tail, rng);
  const std::size_t tail_green = n_green - half;
  for (std::size_t i = 0; i < tail_green; ++i) out.set_green(tail[i]);
  return out;
}

Partition build_partition(const WatermarkConfig& cfg, std::span<const TokenId> context,
                          std::span<const double> logits) {
  switch (cfg.method) {
    case Method::kgw:
      return kgw_partition(cfg.key, context, cfg.gamma, logits.size(), cfg.window_h);
    case Method::ssg:
      return ssg_partition(cfg.key, context, logits, cfg.gamma, cfg.topk_k, cfg.window_h);
    case Method::none: break;
  }
  throw ConfigError("method 'none' has no partition");
}

}  // namespace ssgmark
