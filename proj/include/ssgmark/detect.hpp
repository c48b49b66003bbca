#pragma once

// Teacher-forced detection. Each scored position rebuilds the partition the
// injector would have used, then one of three scoring rules turns the green
// flags into a z statistic:
//   kgw    plain one-proportion z-test
//   sweet  same test restricted to positions with entropy >= threshold
//   ewd    entropy-weighted test, W_i = E_i - min(E)

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ssgmark/core.hpp"
#include "ssgmark/lm.hpp"
#include "ssgmark/partition.hpp"

namespace ssgmark {

class DegenerateWeights : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoScorableTokens : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TooShort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Detector { kgw, sweet, ewd };
enum class PromptMode { original, general, none };

std::string_view to_string(Detector d);
std::string_view to_string(PromptMode p);
Detector parse_detector(std::string_view s);
PromptMode parse_prompt_mode(std::string_view s);

inline constexpr std::string_view kDefaultGeneralPrompt =
    "Please write a Python function that solves a given task.\n"
    "Output only valid Python code without explanations.\n\n"
    "def solve_problem(input_data):\n";

struct DetectorParams {
  Detector detector = Detector::ewd;
  WatermarkConfig config;  // method, key, gamma, window, topk, sweet_threshold
  double z_threshold = 4.0;
  std::size_t min_tokens = 15;
  PromptMode prompt_mode = PromptMode::original;
  TokenSequence general_prompt;  // tokenized; used when prompt_mode == general

  void validate(std::size_t vocab_size) const;
};

struct TokenScore {
  bool green = false;
  double entropy = 0.0;
  double weight = 0.0;
};

struct DetectionReport {
  Detector detector = Detector::ewd;
  double z = 0.0;
  double green_weighted = 0.0;
  double total_weight = 0.0;
  std::size_t scored_tokens = 0;
  bool decision = false;
  bool fallback = false;  // ewd degenerated to kgw, or sweet filtered every position
  std::vector<TokenScore> per_token;
};

/// (Sum g - gamma n) / sqrt(gamma (1 - gamma) n). Throws InvalidArgument for n == 0.
double kgw_z(std::span<const std::uint8_t> green, double gamma);

/// kgw_z over positions with entropy >= threshold; NoScorableTokens if none survive.
double sweet_z(std::span<const std::uint8_t> green, std::span<const double> entropies, double threshold,
               double gamma);

/// Entropy-weighted z. DegenerateWeights when every weight is zero.
double ewd_z(std::span<const std::uint8_t> green, std::span<const double> entropies, double gamma);

/// Context the detector feeds the model: chosen prompt followed by text[0..position).
TokenSequence detection_context(std::span<const TokenId> prompt, std::span<const TokenId> text,
                                std::size_t position, const DetectorParams& params);

/// Partition and pre-bias entropy at `position` of `text`.
std::pair<Partition, double> reconstruct_partition(const LogitSource& source,
                                                   std::span<const TokenId> prompt,
                                                   std::span<const TokenId> text,
                                                   std::size_t position,
                                                   const DetectorParams& params);

/// Scores positions window_h .. |text|-1. Throws TooShort below min_tokens.
DetectionReport detect(const LogitSource& source, std::span<const TokenId> prompt,
                       std::span<const TokenId> text, const DetectorParams& params);

std::string report_json(const std::string& id, const DetectionReport& report, Method method);

}  // namespace ssgmark
