#include "ssgmark/inject.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "ssgmark/strength.hpp"

namespace ssgmark {

using nlohmann::json;

LogitVector bias_logits(std::span<const double> logits, const Partition& partition, double delta) {
  if (logits.size() != partition.vocab_size()) {
    throw InvalidArgument("bias_logits: logit and partition sizes differ");
  }
  LogitVector out(logits.begin(), logits.end());
  const auto mask = partition.mask();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mask[i]) out[i] += delta;
  }
  return out;
}

TokenId sample_token(std::span<const double> probs, double temperature, RngState& rng) {
  if (probs.empty()) throw InvalidArgument("sample_token: empty distribution");
  if (!(temperature > 0.0)) throw InvalidArgument("sample_token: temperature must be > 0");

  std::vector<double> tempered;
  if (temperature == 1.0) {
    tempered.assign(probs.begin(), probs.end());
  } else {
    // probs^(1/T) renormalized == softmax(log(p) / T); zero entries stay zero.
    std::vector<double> scaled(probs.size());
    double max_scaled = -INFINITY;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      scaled[i] = probs[i] > 0.0 ? std::log(probs[i]) / temperature : -INFINITY;
      max_scaled = std::max(max_scaled, scaled[i]);
    }
    tempered.resize(probs.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      tempered[i] = std::isfinite(scaled[i]) ? std::exp(scaled[i] - max_scaled) : 0.0;
      sum += tempered[i];
    }
    for (double& p : tempered) p /= sum;
  }

  const double u = rng.next_unit();
  double cumulative = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < tempered.size(); ++i) {
    if (tempered[i] <= 0.0) continue;
    last_nonzero = i;
    cumulative += tempered[i];
    if (u < cumulative) return static_cast<TokenId>(i);
  }
  return static_cast<TokenId>(last_nonzero);
}

GenerationRecord generate(const LogitSource& source, std::span<const TokenId> prompt,
                          const WatermarkConfig& cfg, const SamplerParams& sampler) {
  const std::size_t vocab = source.vocab_size();
  if (vocab == 0) throw ConfigError("logit source has an empty vocabulary");
  cfg.validate(vocab);
  if (!(sampler.temperature > 0.0)) throw ConfigError("temperature must be > 0");

  GenerationRecord rec;
  rec.prompt.assign(prompt.begin(), prompt.end());
  rec.config_digest = cfg.digest();

  TokenSequence context(prompt.begin(), prompt.end());
  RngState rng(sampler.seed);
  LogitVector logits;
  ProbVector probs;

  while (rec.output.size() < cfg.max_tokens) {
    source.next_logits(context, logits);
    if (logits.size() != vocab) throw ConfigError("logit source changed vocabulary size");
    softmax_into(logits, probs);

    StepRecord step;
    step.entropy = entropy(probs);
    TokenId next;
    if (cfg.method == Method::none) {
      next = sample_token(probs, sampler.temperature, rng);
    } else {
      const Partition partition = build_partition(cfg, context, logits);
      step.p_g = green_mass(probs, partition);
      const bool apply = cfg.injector_gate == InjectorGate::always ||
                         step.entropy >= cfg.sweet_threshold;
      if (apply) {
        step.biased = true;
        step.strength = watermark_strength(cfg.delta, std::clamp(step.p_g, 0.0, 1.0));
        const auto biased = softmax(bias_logits(logits, partition, cfg.delta));
        next = sample_token(biased, sampler.temperature, rng);
      } else {
        next = sample_token(probs, sampler.temperature, rng);
      }
      step.green_chosen = partition.is_green(next);
    }

    rec.per_step.push_back(step);
    rec.output.push_back(next);
    context.push_back(next);
    if (next == kEosId) break;
  }
  return rec;
}

// ---------------------------------------------------------------------------

std::string GenerationRecord::to_json() const {
  json steps = json::array();
  for (const auto& s : per_step) {
    steps.push_back({{"entropy", s.entropy},
                     {"green_chosen", s.green_chosen},
                     {"p_g", s.p_g},
                     {"strength", s.strength},
                     {"biased", s.biased}});
  }
  json j = {{"id", id},         {"prompt", prompt},           {"output", output},
            {"text", text},     {"per_step", std::move(steps)}, {"config_digest", config_digest}};
  return j.dump();
}

GenerationRecord GenerationRecord::from_json(std::string_view line) {
  GenerationRecord rec;
  try {
    const json j = json::parse(line);
    rec.id = j.value("id", std::string{});
    if (j.contains("prompt")) rec.prompt = j.at("prompt").get<TokenSequence>();
    if (j.contains("output")) rec.output = j.at("output").get<TokenSequence>();
    rec.text = j.value("text", std::string{});
    rec.config_digest = j.value("config_digest", std::string{});
    if (j.contains("per_step")) {
      for (const auto& s : j.at("per_step")) {
        StepRecord step;
        step.entropy = s.at("entropy").get<double>();
        step.green_chosen = s.at("green_chosen").get<bool>();
        step.p_g = s.at("p_g").get<double>();
        step.strength = s.at("strength").get<double>();
        step.biased = s.value("biased", false);
        rec.per_step.push_back(step);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("generation record: ") + e.what());
  }
  return rec;
}

}  // namespace ssgmark
