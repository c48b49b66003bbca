#pragma once

// Deterministic logit sources standing in for a neural language model.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ssgmark/core.hpp"

namespace ssgmark {

class RngState;

inline constexpr TokenId kBosId = 0;
inline constexpr TokenId kEosId = 1;
inline constexpr TokenId kUnkId = 2;

/// Anything that maps a token history to next-token logits.
class LogitSource {
 public:
  virtual ~LogitSource() = default;
  virtual std::size_t vocab_size() const = 0;
  /// Writes logits for the token following `context` into `out` (resized).
  virtual void next_logits(std::span<const TokenId> context, LogitVector& out) const = 0;

  LogitVector next_logits(std::span<const TokenId> context) const {
    LogitVector out;
    next_logits(context, out);
    return out;
  }
};

/// Splits text into whitespace-separated documents; blank lines separate documents.
std::vector<std::vector<std::string>> split_documents(std::string_view text);

/// Fixed-order count model with additive smoothing and no backoff.
///
/// The context is the last (order - 1) ids, left-padded with BOS. Logits are
/// ln(count + alpha); BOS is never a valid continuation and is pinned
/// kBosPenalty nats below every other token.
class NGramModel : public LogitSource {
 public:
  static constexpr double kBosPenalty = 1000.0;

  NGramModel() = default;

  static NGramModel train(const std::vector<std::vector<std::string>>& documents,
                          std::size_t order, double alpha, std::size_t vocab_cap);

  std::size_t vocab_size() const override { return vocab_.size(); }
  void next_logits(std::span<const TokenId> context, LogitVector& out) const override;
  using LogitSource::next_logits;

  std::size_t order() const { return order_; }
  double alpha() const { return alpha_; }
  const std::vector<std::string>& vocab() const { return vocab_; }

  TokenId token_id(std::string_view word) const;
  TokenSequence tokenize(std::string_view text) const;
  /// Joins surface forms with single spaces; BOS/EOS are dropped.
  std::string render(std::span<const TokenId> tokens) const;

  /// Observed count of `next` after the (padded) context, and the context total.
  std::uint64_t count(std::span<const TokenId> context, TokenId next) const;
  std::uint64_t context_total(std::span<const TokenId> context) const;

  std::string to_json() const;
  static NGramModel from_json(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static NGramModel load(const std::filesystem::path& path);

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<TokenId>& key) const;
  };
  struct ContextCounts {
    std::vector<std::pair<TokenId, std::uint64_t>> next;  // sorted by id
    std::uint64_t total = 0;
  };

  std::vector<TokenId> context_key(std::span<const TokenId> context) const;
  const ContextCounts* find(std::span<const TokenId> context) const;
  void rebuild_index();

  std::size_t order_ = 1;
  double alpha_ = 0.1;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, TokenId> index_;
  std::unordered_map<std::vector<TokenId>, ContextCounts, KeyHash> counts_;
};

// ---------------------------------------------------------------------------

struct SpikeSpec {
  std::size_t vocab_size = 1000;
  std::size_t m = 2;
  double spike_logit = 30.0;
  double tail_logit = 0.0;

  void validate() const;
};

/// m distinct random positions get spike_logit plus jitter below 1e-6; the rest tail_logit.
LogitVector synth_logits(const SpikeSpec& spec, RngState& rng);

/// Same as synth_logits, also reporting the chosen spike positions.
LogitVector synth_logits(const SpikeSpec& spec, RngState& rng, std::vector<TokenId>& spikes);

// ---------------------------------------------------------------------------

struct ReplayRecord {
  std::int64_t step = 0;
  LogitVector logits;
  TokenId chosen = 0;
};

std::vector<ReplayRecord> read_replay(std::istream& in);
std::vector<ReplayRecord> read_replay(const std::filesystem::path& path);
void write_replay(std::ostream& out, std::span<const ReplayRecord> records);

/// Serves recorded logits by generated position: the logits for
/// context.size() == prompt_len + i come from records[i].
class ReplaySource : public LogitSource {
 public:
  ReplaySource(std::vector<ReplayRecord> records, std::size_t prompt_len);

  std::size_t vocab_size() const override;
  void next_logits(std::span<const TokenId> context, LogitVector& out) const override;
  using LogitSource::next_logits;

  const std::vector<ReplayRecord>& records() const { return records_; }

 private:
  std::vector<ReplayRecord> records_;
  std::size_t prompt_len_;
};

}  // namespace ssgmark
