#pragma once

// Watermarked autoregressive generation.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ssgmark/core.hpp"
#include "ssgmark/lm.hpp"
#include "ssgmark/partition.hpp"
#include "ssgmark/prf.hpp"

namespace ssgmark {

struct StepRecord {
  double entropy = 0.0;       // pre-bias, nats
  bool green_chosen = false;  // false when method == none
  double p_g = 0.0;           // pre-bias green mass; 0 when method == none
  double strength = 0.0;      // f_ws of the bias actually applied at this step
  bool biased = false;        // false when method == none or the entropy gate skipped the step
};

struct GenerationRecord {
  std::string id;
  TokenSequence prompt;
  TokenSequence output;
  std::vector<StepRecord> per_step;
  std::string config_digest;
  std::string text;

  std::string to_json() const;
  static GenerationRecord from_json(std::string_view line);
};

struct SamplerParams {
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

/// Adds delta to every green logit.
LogitVector bias_logits(std::span<const double> logits, const Partition& partition, double delta);

/// Inverse-CDF draw from probs^(1/T) (renormalized, computed in log space).
TokenId sample_token(std::span<const double> probs, double temperature, RngState& rng);

/// Generates until EOS or cfg.max_tokens. The sampler stream is seeded from
/// sampler.seed only, independent of the partition PRF.
GenerationRecord generate(const LogitSource& source, std::span<const TokenId> prompt,
                          const WatermarkConfig& cfg, const SamplerParams& sampler);

}  // namespace ssgmark
