#pragma once

// Fixed-FPR evaluation: threshold calibration on unwatermarked scores,
// TPR/F1 at that threshold, and the paired watermarked/plain experiment loop.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ssgmark/core.hpp"
#include "ssgmark/detect.hpp"
#include "ssgmark/inject.hpp"
#include "ssgmark/lm.hpp"

namespace ssgmark {

struct ScoreSet {
  std::vector<double> watermarked;
  std::vector<double> plain;
};

/// Sorts plain scores descending and returns the one at floor(fpr * n): the
/// smallest threshold whose strict exceedance rate on `plain` is <= fpr.
double calibrate_threshold(std::span<const double> plain, double fpr);

struct RateAtFpr {
  double fpr = 0.0;
  double tpr = 0.0;
  double f1 = 0.0;
  double threshold = 0.0;
};

RateAtFpr tpr_f1_at_fpr(const ScoreSet& scores, double fpr);

struct MetricsRow {
  Detector detector = Detector::ewd;
  Method method = Method::ssg;
  std::vector<RateAtFpr> rates;  // one per requested fpr, averaged over runs
  double n_wm = 0.0;             // mean per run
  double n_plain = 0.0;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;

  const MetricsRow* find(Detector d, Method m) const;
  std::string to_json() const;
};

/// Splits each arm into `runs` contiguous chunks, computes rates per chunk, averages.
MetricsRow metrics_for(Detector d, Method m, const ScoreSet& scores, std::span<const double> fprs,
                       std::size_t runs = 1);

struct ExperimentArm {
  WatermarkConfig config;  // injection side; the plain arm reuses it with method none
  DetectorParams detector;
};

struct ExperimentSpec {
  std::vector<TokenSequence> prompts;
  std::vector<ExperimentArm> arms;
  std::size_t n_sequences = 100;
  std::size_t runs = 5;
  std::uint64_t seed = 0;
  std::vector<double> fprs{0.01, 0.05};
  /// Each run r uses derive_key(config.key, r) so averages span several keys.
  bool rotate_keys = true;
};

struct ArmRun {
  ScoreSet scores;
  std::vector<double> strengths;  // per-step f_ws of the watermarked arm
};

struct ExperimentResult {
  MetricsReport report;
  std::vector<std::vector<ArmRun>> per_run;  // [run][arm]
};

ExperimentResult run_experiment(const LogitSource& source, const ExperimentSpec& spec);

/// Runs body(i) for i in [0, n) across hardware threads. Callers write to
/// per-index slots so results never depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ssgmark
