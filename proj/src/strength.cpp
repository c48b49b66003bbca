#include "ssgmark/strength.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

namespace ssgmark {

double watermark_strength(double delta, double p_g) {
  if (!(p_g >= 0.0 && p_g <= 1.0)) {
    throw InvalidArgument("p_g must lie in [0, 1], got " + std::to_string(p_g));
  }
  if (!std::isfinite(delta)) throw InvalidArgument("delta must be finite");
  if (p_g == 0.0 || p_g == 1.0) return 0.0;
  const double gain = std::expm1(delta);
  return gain * std::sqrt(p_g * (1.0 - p_g)) / (1.0 + gain * p_g);
}

double biased_green_mass(double delta, double p_g) {
  const double boosted = std::exp(delta) * p_g;
  return boosted / (boosted + (1.0 - p_g));
}

double green_mass(std::span<const double> probs, const Partition& partition) {
  if (probs.size() != partition.vocab_size()) {
    throw InvalidArgument("green_mass: probability and partition sizes differ");
  }
  const auto mask = partition.mask();
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (mask[i]) total += probs[i];
  }
  return total;
}

GreenBounds strength_bounds(double p1) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw InvalidArgument("p1 must lie in [0, 1]");
  return {(1.0 - p1) / 2.0, (1.0 + p1) / 2.0};
}

BoundCheck check_bounds(std::span<const double> probs, const Partition& partition,
                        std::size_t k, double slack) {
  BoundCheck out;
  const auto top = topk_indices(probs, k);
  double head = 0.0;
  for (TokenId id : top) head += probs[id];
  const double p1 = top.empty() ? 0.0 : probs[top.front()];
  const auto [lb, ub] = strength_bounds(std::min(1.0, p1));
  out.lb = lb;
  out.ub = ub;
  out.tail_mass = std::max(0.0, 1.0 - head);
  out.observed_p_g = green_mass(probs, partition);
  out.within = out.observed_p_g >= lb - out.tail_mass - slack &&
               out.observed_p_g <= ub + out.tail_mass + slack;
  return out;
}

StrengthHistogram strength_histogram(std::span<const double> strengths, std::size_t bins,
                                     double lo, double hi) {
  if (strengths.empty()) throw InvalidArgument("strength_histogram: no samples");
  if (bins == 0) throw InvalidArgument("strength_histogram: bins must be positive");
  if (!(hi > lo)) throw InvalidArgument("strength_histogram: empty range");

  StrengthHistogram out;
  out.lo = lo;
  out.hi = hi;
  out.n_steps = strengths.size();
  out.mass.assign(bins, 0.0);
  const double width = (hi - lo) / static_cast<double>(bins);
  std::size_t below = 0;
  double sum = 0.0;
  for (double s : strengths) {
    auto bin = static_cast<std::ptrdiff_t>(std::floor((s - lo) / width));
    bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    out.mass[static_cast<std::size_t>(bin)] += 1.0;
    if (s < 0.05) ++below;
    sum += s;
  }
  const double n = static_cast<double>(strengths.size());
  for (double& m : out.mass) m /= n;
  out.fraction_below_005 = static_cast<double>(below) / n;
  out.mean = sum / n;

  std::vector<double> sorted(strengths.begin(), strengths.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  out.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return out;
}

void StrengthHistogram::write_csv(std::ostream& out) const {
  out << "bin_lo,bin_hi,mass\n";
  const double width = (hi - lo) / static_cast<double>(mass.size());
  char buf[96];
  for (std::size_t i = 0; i < mass.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.17g\n", lo + width * static_cast<double>(i),
                  lo + width * static_cast<double>(i + 1), mass[i]);
    out << buf;
  }
}

std::string StrengthHistogram::summary_json() const {
  nlohmann::json j = {{"n_steps", n_steps},
                      {"bins", mass.size()},
                      {"fraction_below_0.05", fraction_below_005},
                      {"mean", mean},
                      {"median", median}};
  return j.dump();
}

}  // namespace ssgmark
