#include "ssgmark/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "ssgmark/prf.hpp"

namespace ssgmark {

double calibrate_threshold(std::span<const double> plain, double fpr) {
  if (plain.empty()) throw InvalidArgument("calibrate_threshold: no plain scores");
  if (!(fpr > 0.0 && fpr < 1.0)) throw InvalidArgument("calibrate_threshold: fpr must lie in (0, 1)");
  std::vector<double> sorted(plain.begin(), plain.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  auto idx = static_cast<std::size_t>(std::floor(fpr * static_cast<double>(sorted.size())));
  idx = std::min(idx, sorted.size() - 1);
  return sorted[idx];
}

RateAtFpr tpr_f1_at_fpr(const ScoreSet& scores, double fpr) {
  if (scores.watermarked.empty() || scores.plain.empty()) {
    throw InvalidArgument("tpr_f1_at_fpr: both score sets must be non-empty");
  }
  RateAtFpr out;
  out.fpr = fpr;
  out.threshold = calibrate_threshold(scores.plain, fpr);
  const auto above = [t = out.threshold](double z) { return z > t; };
  const auto tp = static_cast<double>(
      std::count_if(scores.watermarked.begin(), scores.watermarked.end(), above));
  const auto fp =
      static_cast<double>(std::count_if(scores.plain.begin(), scores.plain.end(), above));
  const double fn = static_cast<double>(scores.watermarked.size()) - tp;
  out.tpr = tp / static_cast<double>(scores.watermarked.size());
  out.f1 = 2.0 * tp / (2.0 * tp + fp + fn);
  return out;
}

const MetricsRow* MetricsReport::find(Detector d, Method m) const {
  for (const auto& r : rows) {
    if (r.detector == d && r.method == m) return &r;
  }
  return nullptr;
}

namespace {

std::string pct_label(double fpr) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", fpr * 100.0);
  return buf;
}

template <typename T>
std::vector<T> chunk(const std::vector<T>& all, std::size_t runs, std::size_t r) {
  const std::size_t lo = all.size() * r / runs;
  const std::size_t hi = all.size() * (r + 1) / runs;
  return {all.begin() + static_cast<std::ptrdiff_t>(lo), all.begin() + static_cast<std::ptrdiff_t>(hi)};
}

}  // namespace

std::string MetricsReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json j = {{"detector", std::string(to_string(row.detector))},
                        {"method", std::string(to_string(row.method))},
                        {"n_wm", row.n_wm},
                        {"n_plain", row.n_plain}};
    for (const auto& rate : row.rates) {
      const auto label = pct_label(rate.fpr);
      j["tpr_at_" + label] = rate.tpr;
      j["f1_at_" + label] = rate.f1;
      j["threshold_" + label] = rate.threshold;
    }
    arr.push_back(std::move(j));
  }
  return nlohmann::json{{"metrics", std::move(arr)}}.dump(2);
}

MetricsRow metrics_for(Detector d, Method m, const ScoreSet& scores, std::span<const double> fprs,
                       std::size_t runs) {
  if (runs == 0) throw InvalidArgument("runs must be positive");
  if (scores.watermarked.size() < runs || scores.plain.size() < runs) {
    throw InvalidArgument("fewer scores than runs");
  }
  MetricsRow row;
  row.detector = d;
  row.method = m;
  row.rates.resize(fprs.size());
  for (std::size_t r = 0; r < runs; ++r) {
    ScoreSet part{chunk(scores.watermarked, runs, r), chunk(scores.plain, runs, r)};
    row.n_wm += static_cast<double>(part.watermarked.size()) / static_cast<double>(runs);
    row.n_plain += static_cast<double>(part.plain.size()) / static_cast<double>(runs);
    for (std::size_t f = 0; f < fprs.size(); ++f) {
      const auto rate = tpr_f1_at_fpr(part, fprs[f]);
      row.rates[f].fpr = fprs[f];
      row.rates[f].tpr += rate.tpr / static_cast<double>(runs);
      row.rates[f].f1 += rate.f1 / static_cast<double>(runs);
      row.rates[f].threshold += rate.threshold / static_cast<double>(runs);
    }
  }
  return row;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

struct Generated {
  std::vector<GenerationRecord> records;
};

Generated generate_arm(const LogitSource& source, const std::vector<TokenSequence>& prompts,
                       const WatermarkConfig& cfg, std::size_t n, std::uint64_t seed) {
  Generated out;
  out.records.resize(n);
  parallel_for(n, [&](std::size_t i) {
    SamplerParams sampler{cfg.temperature, derive_seed(seed, i)};
    out.records[i] = generate(source, prompts[i % prompts.size()], cfg, sampler);
  });
  return out;
}

std::vector<double> score_arm(const LogitSource& source, const Generated& gen,
                              const DetectorParams& params) {
  std::vector<double> z(gen.records.size(), 0.0);
  std::vector<std::uint8_t> keep(gen.records.size(), 0);
  parallel_for(gen.records.size(), [&](std::size_t i) {
    const auto& rec = gen.records[i];
    if (rec.output.size() < params.min_tokens) return;
    z[i] = detect(source, rec.prompt, rec.output, params).z;
    keep[i] = 1;
  });
  std::vector<double> out;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (keep[i]) out.push_back(z[i]);
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const LogitSource& source, const ExperimentSpec& spec) {
  if (spec.prompts.empty()) throw InvalidArgument("run_experiment: no prompts");
  if (spec.arms.empty()) throw InvalidArgument("run_experiment: no arms");
  if (spec.runs == 0 || spec.n_sequences == 0) throw InvalidArgument("run_experiment: empty design");

  ExperimentResult result;
  result.per_run.resize(spec.runs);
  for (std::size_t r = 0; r < spec.runs; ++r) {
    const std::uint64_t run_seed = derive_seed(spec.seed, r);
    const std::uint64_t wm_seed = derive_seed(run_seed, 1);
    const std::uint64_t plain_seed = derive_seed(run_seed, 2);

    // Plain generations depend only on the sampler, so one set serves every arm.
    WatermarkConfig plain_cfg = spec.arms.front().config;
    plain_cfg.method = Method::none;
    const auto plain = generate_arm(source, spec.prompts, plain_cfg, spec.n_sequences, plain_seed);

    std::map<std::string, Generated> cache;
    for (const auto& arm : spec.arms) {
      WatermarkConfig cfg = arm.config;
      DetectorParams det = arm.detector;
      if (spec.rotate_keys) cfg.key = derive_key(arm.config.key, r);
      det.config.key = cfg.key;
      const std::string cache_key = cfg.digest() + cfg.key.to_hex();
      auto it = cache.find(cache_key);
      if (it == cache.end()) {
        it = cache.emplace(cache_key, generate_arm(source, spec.prompts, cfg, spec.n_sequences, wm_seed))
                 .first;
      }
      ArmRun run;
      run.scores.watermarked = score_arm(source, it->second, det);
      run.scores.plain = score_arm(source, plain, det);
      for (const auto& rec : it->second.records) {
        for (const auto& s : rec.per_step) run.strengths.push_back(s.strength);
      }
      result.per_run[r].push_back(std::move(run));
    }
  }

  for (std::size_t a = 0; a < spec.arms.size(); ++a) {
    MetricsRow row;
    row.detector = spec.arms[a].detector.detector;
    row.method = spec.arms[a].config.method;
    row.rates.resize(spec.fprs.size());
    for (std::size_t r = 0; r < spec.runs; ++r) {
      const auto& scores = result.per_run[r][a].scores;
      const auto one = metrics_for(row.detector, row.method, scores, spec.fprs, 1);
      const auto runs = static_cast<double>(spec.runs);
      row.n_wm += one.n_wm / runs;
      row.n_plain += one.n_plain / runs;
      for (std::size_t f = 0; f < spec.fprs.size(); ++f) {
        row.rates[f].fpr = spec.fprs[f];
        row.rates[f].tpr += one.rates[f].tpr / runs;
        row.rates[f].f1 += one.rates[f].f1 / runs;
        row.rates[f].threshold += one.rates[f].threshold / runs;
      }
    }
    result.report.rows.push_back(std::move(row));
  }
  return result;
}

}  // namespace ssgmark
