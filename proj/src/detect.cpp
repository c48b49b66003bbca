#include "ssgmark/detect.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace ssgmark {

std::string_view to_string(Detector d) {
  switch (d) {
    case Detector::kgw: return "kgw";
    case Detector::sweet: return "sweet";
    case Detector::ewd: return "ewd";
  }
  return "?";
}

std::string_view to_string(PromptMode p) {
  switch (p) {
    case PromptMode::original: return "original";
    case PromptMode::general: return "general";
    case PromptMode::none: return "none";
  }
  return "?";
}

Detector parse_detector(std::string_view s) {
  if (s == "kgw") return Detector::kgw;
  if (s == "sweet") return Detector::sweet;
  if (s == "ewd") return Detector::ewd;
  throw InvalidArgument("unknown detector '" + std::string(s) + "' (expected kgw|sweet|ewd)");
}

PromptMode parse_prompt_mode(std::string_view s) {
  if (s == "original") return PromptMode::original;
  if (s == "general") return PromptMode::general;
  if (s == "none") return PromptMode::none;
  throw InvalidArgument("unknown prompt mode '" + std::string(s) +
                        "' (expected original|general|none)");
}

void DetectorParams::validate(std::size_t vocab_size) const {
  if (config.method == Method::none) throw ConfigError("detection needs method kgw or ssg");
  config.validate(vocab_size);
  if (min_tokens < config.window_h + 1) {
    throw ConfigError("min_tokens must be >= window + 1");
  }
}

double kgw_z(std::span<const std::uint8_t> green, double gamma) {
  if (green.empty()) throw InvalidArgument("kgw_z: no tokens to score");
  const auto n = static_cast<double>(green.size());
  const auto hits = static_cast<double>(std::count_if(green.begin(), green.end(),
                                                      [](std::uint8_t g) { return g != 0; }));
  return (hits - gamma * n) / std::sqrt(gamma * (1.0 - gamma) * n);
}

double sweet_z(std::span<const std::uint8_t> green, std::span<const double> entropies,
               double threshold, double gamma) {
  if (green.size() != entropies.size()) throw InvalidArgument("sweet_z: length mismatch");
  std::vector<std::uint8_t> kept;
  for (std::size_t i = 0; i < green.size(); ++i) {
    if (entropies[i] >= threshold) kept.push_back(green[i]);
  }
  if (kept.empty()) throw NoScorableTokens("sweet_z: no position reaches the entropy threshold");
  return kgw_z(kept, gamma);
}

namespace {

struct WeightedScore {
  double z;
  double green_weighted;
  double total_weight;
};

WeightedScore ewd_score(std::span<const std::uint8_t> green, std::span<const double> entropies,
                        double gamma, std::vector<double>* weights_out = nullptr) {
  if (green.size() != entropies.size()) throw InvalidArgument("ewd_z: length mismatch");
  if (green.empty()) throw InvalidArgument("ewd_z: no tokens to score");
  const double min_e = *std::min_element(entropies.begin(), entropies.end());
  double sum_w = 0.0, sum_w2 = 0.0, green_w = 0.0;
  if (weights_out) weights_out->resize(green.size());
  for (std::size_t i = 0; i < green.size(); ++i) {
    const double w = entropies[i] - min_e;
    if (weights_out) (*weights_out)[i] = w;
    sum_w += w;
    sum_w2 += w * w;
    if (green[i]) green_w += w;
  }
  if (sum_w2 == 0.0) throw DegenerateWeights("ewd_z: all entropy weights are zero");
  const double z = (green_w - gamma * sum_w) / std::sqrt(gamma * (1.0 - gamma) * sum_w2);
  return {z, green_w, sum_w};
}

}  // namespace

double ewd_z(std::span<const std::uint8_t> green, std::span<const double> entropies, double gamma) {
  return ewd_score(green, entropies, gamma).z;
}

TokenSequence detection_context(std::span<const TokenId> prompt, std::span<const TokenId> text,
                                std::size_t position, const DetectorParams& params) {
  TokenSequence context;
  switch (params.prompt_mode) {
    case PromptMode::original:
      context.assign(prompt.begin(), prompt.end());
      break;
    case PromptMode::general:
      context = params.general_prompt;
      break;
    case PromptMode::none:
      break;
  }
  context.insert(context.end(), text.begin(),
                 text.begin() + static_cast<std::ptrdiff_t>(std::min(position, text.size())));
  return context;
}

std::pair<Partition, double> reconstruct_partition(const LogitSource& source,
                                                   std::span<const TokenId> prompt,
                                                   std::span<const TokenId> text,
                                                   std::size_t position,
                                                   const DetectorParams& params) {
  if (position < params.config.window_h) {
    throw InvalidArgument("reconstruct_partition: position " + std::to_string(position) +
                          " precedes the context window");
  }
  if (position >= text.size()) throw InvalidArgument("reconstruct_partition: position past end");
  const auto context = detection_context(prompt, text, position, params);
  const auto logits = source.next_logits(context);
  const double e = entropy(softmax(logits));
  return {build_partition(params.config, context, logits), e};
}

DetectionReport detect(const LogitSource& source, std::span<const TokenId> prompt,
                       std::span<const TokenId> text, const DetectorParams& params) {
  params.validate(source.vocab_size());
  if (text.size() < params.min_tokens) {
    throw TooShort("text has " + std::to_string(text.size()) + " tokens; at least " +
                   std::to_string(params.min_tokens) + " required");
  }

  const std::size_t h = params.config.window_h;
  const std::size_t n = text.size() - h;
  std::vector<std::uint8_t> green(n);
  std::vector<double> entropies(n);

  TokenSequence context = detection_context(prompt, text, h, params);
  LogitVector logits;
  ProbVector probs;
  for (std::size_t i = 0; i < n; ++i) {
    source.next_logits(context, logits);
    softmax_into(logits, probs);
    entropies[i] = entropy(probs);
    const TokenId token = text[h + i];
    green[i] = build_partition(params.config, context, logits).is_green(token) ? 1 : 0;
    context.push_back(token);
  }

  DetectionReport report;
  report.detector = params.detector;
  report.per_token.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    report.per_token[i].green = green[i] != 0;
    report.per_token[i].entropy = entropies[i];
  }

  auto score_plain = [&] {
    report.z = kgw_z(green, params.config.gamma);
    report.green_weighted = static_cast<double>(std::count(green.begin(), green.end(), 1));
    report.total_weight = static_cast<double>(n);
    report.scored_tokens = n;
    for (auto& t : report.per_token) t.weight = 1.0;
  };

  switch (params.detector) {
    case Detector::kgw:
      score_plain();
      break;
    case Detector::sweet: {
      std::size_t kept = 0, hits = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool pass = entropies[i] >= params.config.sweet_threshold;
        report.per_token[i].weight = pass ? 1.0 : 0.0;
        kept += pass;
        hits += pass && green[i];
      }
      report.scored_tokens = kept;
      report.green_weighted = static_cast<double>(hits);
      report.total_weight = static_cast<double>(kept);
      if (kept == 0) {
        report.z = 0.0;
        report.fallback = true;
      } else {
        report.z = sweet_z(green, entropies, params.config.sweet_threshold, params.config.gamma);
      }
      break;
    }
    case Detector::ewd: {
      std::vector<double> weights;
      try {
        const auto s = ewd_score(green, entropies, params.config.gamma, &weights);
        report.z = s.z;
        report.green_weighted = s.green_weighted;
        report.total_weight = s.total_weight;
        report.scored_tokens = n;
        for (std::size_t i = 0; i < n; ++i) report.per_token[i].weight = weights[i];
      } catch (const DegenerateWeights&) {
        score_plain();
        report.fallback = true;
      }
      break;
    }
  }
  report.decision = report.z > params.z_threshold;
  return report;
}

std::string report_json(const std::string& id, const DetectionReport& report, Method method) {
  nlohmann::json j = {{"id", id},
                      {"detector", to_string(report.detector)},
                      {"method", to_string(method)},
                      {"z", report.z},
                      {"green_weighted", report.green_weighted},
                      {"total_weight", report.total_weight},
                      {"scored_tokens", report.scored_tokens},
                      {"decision", report.decision},
                      {"fallback", report.fallback}};
  return j.dump();
}

}  // namespace ssgmark
