#pragma once

// Watermark strength: the normalized increase of green probability mass a
// logit bias delta produces at one step, plus the head-pairing bounds on green
// mass and histogram export for generation streams.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ssgmark/core.hpp"
#include "ssgmark/partition.hpp"

namespace ssgmark {

/// (e^d - 1) sqrt(p(1-p)) / (1 + (e^d - 1) p); exactly 0 at p in {0, 1}.
double watermark_strength(double delta, double p_g);

/// Green mass after adding delta to every green logit: e^d p / (e^d p + 1 - p).
double biased_green_mass(double delta, double p_g);

double green_mass(std::span<const double> probs, const Partition& partition);

struct GreenBounds {
  double lb;
  double ub;
};

/// ((1 - p1) / 2, (1 + p1) / 2).
GreenBounds strength_bounds(double p1);

struct StrengthSample {
  double p_g = 0.0;
  double delta = 0.0;
  double f_ws = 0.0;
  double p1 = 0.0;
  Method method = Method::kgw;
};

struct BoundCheck {
  double lb = 0.0;
  double ub = 0.0;
  double observed_p_g = 0.0;
  double tail_mass = 0.0;
  bool within = false;
};

/// Measures p_g under `partition` and checks it against the bounds widened by
/// the probability mass outside the top-k head (plus `slack`).
BoundCheck check_bounds(std::span<const double> probs, const Partition& partition,
                        std::size_t k, double slack = 0.0);

struct StrengthHistogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> mass;  // normalized; one entry per bin
  std::size_t n_steps = 0;
  double fraction_below_005 = 0.0;
  double mean = 0.0;
  double median = 0.0;

  void write_csv(std::ostream& out) const;
  std::string summary_json() const;
};

/// Normalized histogram over [lo, hi]; values outside are clamped into the
/// edge bins. Throws InvalidArgument for an empty sample set or bins == 0.
StrengthHistogram strength_histogram(std::span<const double> strengths, std::size_t bins,
                                     double lo = 0.0, double hi = 1.0);

}  // namespace ssgmark
