#include "ssgmark/simulate.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "ssgmark/inject.hpp"
#include "ssgmark/partition.hpp"
#include "ssgmark/prf.hpp"
#include "ssgmark/strength.hpp"

namespace ssgmark {

TrialOutcome simulate_trial(const SimulationParams& params, std::size_t trial) {
  RngState rng(derive_seed(params.seed, trial));
  std::vector<TokenId> spikes;
  const auto logits = synth_logits(params.spikes, rng, spikes);
  const auto probs = softmax(logits);

  WatermarkConfig cfg;
  cfg.method = params.method;
  cfg.gamma = params.gamma;
  cfg.delta = params.delta;
  cfg.topk_k = params.topk;
  cfg.window_h = 1;
  cfg.key = derive_key(params.key, trial);
  const Partition partition = build_partition(cfg, TokenSequence{}, logits);

  TrialOutcome out;
  out.p_g = green_mass(probs, partition);
  out.f_ws = watermark_strength(params.delta, std::clamp(out.p_g, 0.0, 1.0));
  const BoundCheck check = check_bounds(probs, partition, std::min(params.topk, probs.size()), 1e-4);
  out.p1 = *std::max_element(probs.begin(), probs.end());
  out.lb = check.lb;
  out.ub = check.ub;
  out.tail_mass = check.tail_mass;
  out.within_bounds = check.within;

  const bool first = partition.is_green(spikes.front());
  out.spikes_same_color = true;
  for (TokenId id : spikes) out.spikes_same_color &= partition.is_green(id) == first;

  if (params.method == Method::ssg) {
    for (const auto& [hi, lo] : ssg_pairs(logits, params.topk)) {
      if (partition.is_green(hi) == partition.is_green(lo)) ++out.pair_violations;
    }
  }

  const auto biased = bias_logits(logits, partition, params.delta);
  double shift = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) shift += biased[i] - logits[i];
  out.mean_logit_shift = shift / static_cast<double>(logits.size());
  return out;
}

SimulationSummary simulate(const SimulationParams& params, std::vector<TrialOutcome>* outcomes) {
  params.spikes.validate();
  if (params.trials == 0) throw InvalidArgument("simulate: trials must be positive");
  if (params.method == Method::none) throw InvalidArgument("simulate: method must be kgw or ssg");

  SimulationSummary s;
  s.trials = params.trials;
  s.expected_same_color_rate = std::pow(2.0, 1.0 - static_cast<double>(params.spikes.m));
  std::size_t same = 0, below = 0;
  if (outcomes) outcomes->clear();
  for (std::size_t t = 0; t < params.trials; ++t) {
    const auto o = simulate_trial(params, t);
    same += o.spikes_same_color;
    s.within_bounds += o.within_bounds;
    s.pair_violations += o.pair_violations;
    s.mean_strength += o.f_ws;
    below += o.f_ws < 0.05;
    s.mean_logit_shift += o.mean_logit_shift;
    if (outcomes) outcomes->push_back(o);
  }
  const auto n = static_cast<double>(params.trials);
  s.same_color_rate = static_cast<double>(same) / n;
  s.mean_strength /= n;
  s.fraction_strength_below_005 = static_cast<double>(below) / n;
  s.mean_logit_shift /= n;
  return s;
}

std::string TrialOutcome::to_json() const {
  return nlohmann::json{{"p_g", p_g},
                        {"p1", p1},
                        {"f_ws", f_ws},
                        {"tail_mass", tail_mass},
                        {"lb", lb},
                        {"ub", ub},
                        {"within_bounds", within_bounds},
                        {"spikes_same_color", spikes_same_color},
                        {"pair_violations", pair_violations},
                        {"mean_logit_shift", mean_logit_shift}}
      .dump();
}

std::string SimulationSummary::to_json() const {
  return nlohmann::json{{"trials", trials},
                        {"same_color_rate", same_color_rate},
                        {"expected_same_color_rate", expected_same_color_rate},
                        {"within_bounds", within_bounds},
                        {"pair_violations", pair_violations},
                        {"mean_strength", mean_strength},
                        {"fraction_strength_below_0.05", fraction_strength_below_005},
                        {"mean_logit_shift", mean_logit_shift}}
      .dump();
}

}  // namespace ssgmark
