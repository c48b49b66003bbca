#pragma once

// Monte Carlo over synthetic spike distributions: how often a partition puts
// every spike in one color, where green mass lands relative to the pairing
// bounds, and the resulting strength distribution.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ssgmark/core.hpp"
#include "ssgmark/lm.hpp"

namespace ssgmark {

struct SimulationParams {
  SpikeSpec spikes;
  Method method = Method::ssg;
  double delta = 2.0;
  double gamma = 0.5;
  std::size_t topk = 4;
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  SecretKey key{};  // trial t uses derive_key(key, t)
};

struct TrialOutcome {
  double p_g = 0.0;
  double p1 = 0.0;
  double f_ws = 0.0;
  double tail_mass = 0.0;  // mass outside the top-k head
  double lb = 0.0;
  double ub = 0.0;
  bool within_bounds = false;     // p_g within [lb - tail, ub + tail] (+1e-4 slack)
  bool spikes_same_color = false;
  std::size_t pair_violations = 0;  // ssg pairs not split one green / one red
  double mean_logit_shift = 0.0;    // mean over the vocabulary of biased - original

  std::string to_json() const;
};

struct SimulationSummary {
  std::size_t trials = 0;
  double same_color_rate = 0.0;
  double expected_same_color_rate = 0.0;  // 2^(1-m) for a logit-independent split
  std::size_t within_bounds = 0;
  std::size_t pair_violations = 0;
  double mean_strength = 0.0;
  double fraction_strength_below_005 = 0.0;
  double mean_logit_shift = 0.0;

  std::string to_json() const;
};

TrialOutcome simulate_trial(const SimulationParams& params, std::size_t trial);

SimulationSummary simulate(const SimulationParams& params,
                           std::vector<TrialOutcome>* outcomes = nullptr);

}  // namespace ssgmark
