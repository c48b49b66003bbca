#include "ssgmark/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <unistd.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ssgmark/detect.hpp"
#include "ssgmark/eval.hpp"
#include "ssgmark/inject.hpp"
#include "ssgmark/lm.hpp"
#include "ssgmark/prf.hpp"
#include "ssgmark/simulate.hpp"
#include "ssgmark/strength.hpp"

namespace ssgmark {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

inline constexpr const char* kKeyEnv = "SSG_WATERMARK_KEY";

/// Bad flag value; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& flag, const std::string& what)
      : std::runtime_error(flag + ": " + what) {}
};

/// Missing or unreadable input; maps to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes to a sibling temp file and renames on commit(); an uncommitted writer
// removes its temp file, so failures never leave partial outputs behind.
class AtomicFile {
 public:
  explicit AtomicFile(fs::path target) : target_(std::move(target)) {
    tmp_ = target_;
    tmp_ += ".tmp." + std::to_string(::getpid());
    stream_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!stream_) throw std::runtime_error("cannot open " + target_.string() + " for writing");
  }
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;
  ~AtomicFile() {
    if (!committed_) {
      stream_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }

  std::ostream& stream() { return stream_; }

  void commit() {
    stream_.flush();
    if (!stream_) throw std::runtime_error("write failed for " + target_.string());
    stream_.close();
    fs::rename(tmp_, target_);
    committed_ = true;
  }

 private:
  fs::path target_;
  fs::path tmp_;
  std::ofstream stream_;
  bool committed_ = false;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
  }
  return lines;
}

NGramModel load_model(const fs::path& path) {
  if (!fs::exists(path)) throw InputError("model file not found: " + path.string());
  return NGramModel::from_json(read_file(path));
}

SecretKey resolve_key(const std::string& flag_value, bool required) {
  std::string hex = flag_value;
  if (hex.empty()) {
    if (const char* env = std::getenv(kKeyEnv)) hex = env;
  }
  if (hex.empty()) {
    if (required) throw UsageError("--key", std::string("required (or set ") + kKeyEnv + ")");
    return {};
  }
  try {
    return SecretKey::from_hex(hex);
  } catch (const InvalidArgument& e) {
    throw UsageError("--key", e.what());
  }
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw UsageError("--gamma", "must lie in the open interval (0, 1), got " + std::to_string(gamma));
  }
}

void check_delta(double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw UsageError("--delta", "must be a finite value >= 0");
}

void check_topk(std::size_t k) {
  if (k == 0 || k % 2 != 0) throw UsageError("--topk", "must be an even positive integer");
}

void check_positive(const char* flag, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw UsageError(flag, "must be > 0");
}

template <typename Fn>
auto with_flag(const char* flag, Fn&& fn) {
  try {
    return fn();
  } catch (const InvalidArgument& e) {
    throw UsageError(flag, e.what());
  }
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string corpus, out;
  std::size_t order = 2;
  double alpha = 0.1;
  std::size_t vocab_cap = 5000;
};

json cmd_train(const TrainArgs& a) {
  if (a.order < 1) throw UsageError("--order", "must be >= 1");
  check_positive("--alpha", a.alpha);
  if (a.vocab_cap < 1) throw UsageError("--vocab-cap", "must be >= 1");
  const auto docs = split_documents(read_file(a.corpus));
  const auto model = NGramModel::train(docs, a.order, a.alpha, a.vocab_cap);
  AtomicFile out(a.out);
  out.stream() << model.to_json() << '\n';
  out.commit();
  return {{"command", "train-lm"},  {"out", a.out},        {"order", a.order},
          {"alpha", a.alpha},       {"documents", docs.size()}, {"vocab_size", model.vocab_size()}};
}

struct PromptLine {
  std::string id;
  std::string text;
};

std::vector<PromptLine> read_prompts(const fs::path& path) {
  std::vector<PromptLine> prompts;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    char fallback[32];
    std::snprintf(fallback, sizeof fallback, "%06zu", i);
    const auto& line = lines[i];
    const auto first = line.find_first_not_of(" \t");
    if (line[first] == '{') {
      try {
        const auto j = json::parse(line);
        prompts.push_back({j.value("id", std::string(fallback)), j.value("prompt", std::string{})});
      } catch (const json::exception& e) {
        throw ParseError("prompts line " + std::to_string(i + 1) + ": " + e.what());
      }
    } else {
      prompts.push_back({fallback, line});
    }
  }
  return prompts;
}

struct GenerateArgs {
  std::string lm, prompts, out, key;
  std::string method = "ssg", gate = "always";
  double sweet_threshold = 0.695, delta = 2.0, gamma = 0.5, temperature = 1.0;
  std::size_t window = 1, topk = 4, max_tokens = 512, samples_per_prompt = 1;
  std::uint64_t seed = 0;
};

json cmd_generate(const GenerateArgs& a) {
  WatermarkConfig cfg;
  cfg.method = with_flag("--method", [&] { return parse_method(a.method); });
  cfg.injector_gate = with_flag("--gate", [&] { return parse_gate(a.gate); });
  check_gamma(a.gamma);
  check_delta(a.delta);
  check_topk(a.topk);
  check_positive("--temperature", a.temperature);
  if (a.window < 1) throw UsageError("--window", "must be >= 1");
  if (a.max_tokens < 1) throw UsageError("--max-tokens", "must be >= 1");
  if (!(a.sweet_threshold >= 0.0)) throw UsageError("--sweet-threshold", "must be >= 0");
  if (a.samples_per_prompt < 1) throw UsageError("--samples-per-prompt", "must be >= 1");
  cfg.gamma = a.gamma;
  cfg.delta = a.delta;
  cfg.window_h = a.window;
  cfg.topk_k = a.topk;
  cfg.sweet_threshold = a.sweet_threshold;
  cfg.temperature = a.temperature;
  cfg.max_tokens = a.max_tokens;
  cfg.key = resolve_key(a.key, cfg.method != Method::none);

  const auto model = load_model(a.lm);
  try {
    cfg.validate(model.vocab_size());
  } catch (const ConfigError& e) {
    throw UsageError("--topk/--gamma", e.what());
  }
  const auto prompts = read_prompts(a.prompts);

  struct Job {
    std::string id;
    TokenSequence prompt;
  };
  std::vector<Job> jobs;
  for (const auto& p : prompts) {
    for (std::size_t s = 0; s < a.samples_per_prompt; ++s) {
      std::string id = p.id;
      if (a.samples_per_prompt > 1) id += "-" + std::to_string(s);
      jobs.push_back({std::move(id), model.tokenize(p.text)});
    }
  }

  std::vector<GenerationRecord> records(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    SamplerParams sampler{cfg.temperature, derive_seed(a.seed, i)};
    records[i] = generate(model, jobs[i].prompt, cfg, sampler);
    records[i].id = jobs[i].id;
    records[i].text = model.render(records[i].output);
  });
  std::stable_sort(records.begin(), records.end(),
                   [](const auto& x, const auto& y) { return x.id < y.id; });

  std::size_t tokens = 0, green = 0;
  AtomicFile out(a.out);
  for (const auto& r : records) {
    out.stream() << r.to_json() << '\n';
    tokens += r.output.size();
    for (const auto& s : r.per_step) green += s.green_chosen;
  }
  out.commit();
  return {{"command", "generate"},
          {"out", a.out},
          {"method", std::string(to_string(cfg.method))},
          {"sequences", records.size()},
          {"tokens", tokens},
          {"green_fraction", tokens ? static_cast<double>(green) / static_cast<double>(tokens) : 0.0},
          {"config_digest", cfg.digest()}};
}

struct DetectArgs {
  std::string lm, inputs, out, key;
  std::string method = "ssg", detector = "ewd", prompt_mode = "original";
  std::string general_prompt{kDefaultGeneralPrompt};
  double gamma = 0.5, z_threshold = 4.0, sweet_threshold = 0.695;
  std::size_t window = 1, topk = 4, min_tokens = 15;
};

json cmd_detect(const DetectArgs& a) {
  DetectorParams params;
  params.config.method = with_flag("--method", [&] { return parse_method(a.method); });
  if (params.config.method == Method::none) throw UsageError("--method", "detection needs kgw or ssg");
  params.detector = with_flag("--detector", [&] { return parse_detector(a.detector); });
  params.prompt_mode = with_flag("--prompt-mode", [&] { return parse_prompt_mode(a.prompt_mode); });
  check_gamma(a.gamma);
  check_topk(a.topk);
  if (a.window < 1) throw UsageError("--window", "must be >= 1");
  if (a.min_tokens < a.window + 1) throw UsageError("--min-tokens", "must be >= window + 1");
  if (!std::isfinite(a.z_threshold)) throw UsageError("--z-threshold", "must be finite");
  if (!(a.sweet_threshold >= 0.0)) throw UsageError("--sweet-threshold", "must be >= 0");
  params.config.gamma = a.gamma;
  params.config.window_h = a.window;
  params.config.topk_k = a.topk;
  params.config.sweet_threshold = a.sweet_threshold;
  params.config.key = resolve_key(a.key, true);
  params.z_threshold = a.z_threshold;
  params.min_tokens = a.min_tokens;

  const auto model = load_model(a.lm);
  try {
    params.validate(model.vocab_size());
  } catch (const ConfigError& e) {
    throw UsageError("--topk/--gamma", e.what());
  }
  params.general_prompt = model.tokenize(a.general_prompt);

  std::vector<GenerationRecord> inputs;
  {
    const auto lines = read_lines(a.inputs);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      try {
        auto rec = GenerationRecord::from_json(lines[i]);
        if (rec.output.empty() && !rec.text.empty()) rec.output = model.tokenize(rec.text);
        if (rec.id.empty()) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%06zu", i);
          rec.id = buf;
        }
        for (TokenId t : rec.output) {
          if (t >= model.vocab_size()) throw ParseError("token id out of model range");
        }
        inputs.push_back(std::move(rec));
      } catch (const ParseError& e) {
        throw ParseError("inputs line " + std::to_string(i + 1) + ": " + e.what());
      }
    }
  }
  std::stable_sort(inputs.begin(), inputs.end(), [](const auto& x, const auto& y) { return x.id < y.id; });

  std::vector<std::string> lines(inputs.size());
  std::vector<std::uint8_t> scored(inputs.size(), 0), positive(inputs.size(), 0);
  parallel_for(inputs.size(), [&](std::size_t i) {
    const auto& rec = inputs[i];
    if (rec.output.size() < params.min_tokens) return;
    const auto report = detect(model, rec.prompt, rec.output, params);
    lines[i] = report_json(rec.id, report, params.config.method);
    scored[i] = 1;
    positive[i] = report.decision;
  });

  std::size_t n_scored = 0, n_positive = 0;
  AtomicFile out(a.out);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!scored[i]) continue;
    out.stream() << lines[i] << '\n';
    ++n_scored;
    n_positive += positive[i];
  }
  out.commit();
  return {{"command", "detect"},
          {"out", a.out},
          {"detector", std::string(to_string(params.detector))},
          {"method", std::string(to_string(params.config.method))},
          {"scored", n_scored},
          {"skipped_too_short", inputs.size() - n_scored},
          {"positive", n_positive},
          {"positive_rate", n_scored ? static_cast<double>(n_positive) / static_cast<double>(n_scored) : 0.0}};
}

struct EvalArgs {
  std::string wm, plain, out;
  std::vector<double> fprs;
  std::size_t runs = 1;
};

struct ReportRow {
  std::string id;
  std::string detector;
  std::string method;
  double z;
};

std::vector<ReportRow> read_reports(const fs::path& path) {
  std::vector<ReportRow> rows;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      const auto j = json::parse(lines[i]);
      rows.push_back({j.value("id", std::string{}), j.at("detector").get<std::string>(),
                      j.value("method", std::string("ssg")), j.at("z").get<double>()});
    } catch (const json::exception& e) {
      throw ParseError(path.string() + " line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return rows;
}

json cmd_eval(EvalArgs a) {
  if (a.fprs.empty()) a.fprs = {0.01, 0.05};
  for (double f : a.fprs) {
    if (!(f > 0.0 && f < 1.0)) throw UsageError("--fpr", "must lie in (0, 1)");
  }
  if (a.runs < 1) throw UsageError("--runs", "must be >= 1");
  const auto wm = read_reports(a.wm);
  const auto plain = read_reports(a.plain);

  std::map<std::pair<std::string, std::string>, ScoreSet> groups;
  for (const auto& r : wm) groups[{r.detector, r.method}].watermarked.push_back(r.z);
  for (const auto& r : plain) groups[{r.detector, r.method}].plain.push_back(r.z);

  MetricsReport report;
  for (const auto& [key, scores] : groups) {
    if (scores.watermarked.empty() || scores.plain.empty()) continue;
    const auto det = with_flag("--wm", [&] { return parse_detector(key.first); });
    const auto method = with_flag("--wm", [&] { return parse_method(key.second); });
    if (scores.watermarked.size() < a.runs || scores.plain.size() < a.runs) {
      throw UsageError("--runs", "exceeds the number of scores in a group");
    }
    report.rows.push_back(metrics_for(det, method, scores, a.fprs, a.runs));
  }
  if (report.rows.empty()) throw InputError("no (detector, method) group appears in both --wm and --plain");

  fs::path scores_path = a.out;
  scores_path.replace_extension(".scores.csv");
  AtomicFile metrics(a.out);
  metrics.stream() << report.to_json() << '\n';
  AtomicFile csv(scores_path);
  csv.stream() << "arm,id,detector,method,z\n";
  char buf[64];
  for (const auto* arm : {&wm, &plain}) {
    const char* name = arm == &wm ? "watermarked" : "plain";
    for (const auto& r : *arm) {
      std::snprintf(buf, sizeof buf, "%.17g", r.z);
      csv.stream() << name << ',' << r.id << ',' << r.detector << ',' << r.method << ',' << buf << '\n';
    }
  }
  metrics.commit();
  csv.commit();
  return {{"command", "eval"},
          {"out", a.out},
          {"scores_csv", scores_path.string()},
          {"groups", report.rows.size()},
          {"metrics", json::parse(report.to_json())["metrics"]}};
}

struct StrengthArgs {
  std::string inputs, out;
  std::size_t bins = 50;
};

json cmd_strength(const StrengthArgs& a) {
  if (a.bins < 1) throw UsageError("--bins", "must be >= 1");
  std::vector<double> strengths;
  const auto lines = read_lines(a.inputs);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      for (const auto& s : GenerationRecord::from_json(lines[i]).per_step) strengths.push_back(s.strength);
    } catch (const ParseError& e) {
      throw ParseError("inputs line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  if (strengths.empty()) throw InputError("no generation steps in " + a.inputs);
  const auto hist = strength_histogram(strengths, a.bins);
  AtomicFile csv(a.out);
  hist.write_csv(csv.stream());
  fs::path summary_path = a.out;
  summary_path += ".summary.json";
  AtomicFile summary(summary_path);
  summary.stream() << hist.summary_json() << '\n';
  csv.commit();
  summary.commit();
  json j = json::parse(hist.summary_json());
  j["command"] = "strength";
  j["out"] = a.out;
  return j;
}

struct SimulateArgs {
  std::string out, key, method = "ssg";
  std::size_t vocab = 1000, spikes = 2, trials = 10000, topk = 4;
  double spike_logit = 30.0, tail_logit = 0.0, delta = 2.0, gamma = 0.5;
  std::uint64_t seed = 0;
};

json cmd_simulate(const SimulateArgs& a) {
  SimulationParams p;
  p.method = with_flag("--method", [&] { return parse_method(a.method); });
  if (p.method == Method::none) throw UsageError("--method", "must be kgw or ssg");
  if (a.vocab < 2) throw UsageError("--vocab", "must be >= 2");
  if (a.spikes < 1 || a.spikes > a.vocab) throw UsageError("--spikes", "must lie in [1, vocab]");
  if (!(a.tail_logit < a.spike_logit)) throw UsageError("--tail-logit", "must be below --spike-logit");
  if (a.trials < 1) throw UsageError("--trials", "must be >= 1");
  check_gamma(a.gamma);
  check_delta(a.delta);
  check_topk(a.topk);
  if (a.topk > a.vocab) throw UsageError("--topk", "must not exceed --vocab");
  p.spikes = {a.vocab, a.spikes, a.spike_logit, a.tail_logit};
  p.delta = a.delta;
  p.gamma = a.gamma;
  p.topk = a.topk;
  p.trials = a.trials;
  p.seed = a.seed;
  p.key = resolve_key(a.key, false);
  WatermarkConfig probe;
  probe.method = p.method;
  probe.gamma = p.gamma;
  probe.topk_k = p.topk;
  try {
    probe.validate(a.vocab);
  } catch (const ConfigError& e) {
    throw UsageError("--topk/--gamma", e.what());
  }

  std::vector<TrialOutcome> outcomes;
  const auto summary = simulate(p, &outcomes);
  AtomicFile out(a.out);
  for (const auto& o : outcomes) out.stream() << o.to_json() << '\n';
  out.commit();
  json j = json::parse(summary.to_json());
  j["command"] = "simulate";
  j["out"] = a.out;
  j["method"] = std::string(to_string(p.method));
  return j;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Logit-balanced text watermarking toolkit", "ssgmark"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train-lm", "Train an n-gram logit source from a text corpus");
  train_cmd->add_option("--corpus", train.corpus, "Corpus text; blank lines separate documents")->required();
  train_cmd->add_option("--order", train.order, "n-gram order")->capture_default_str();
  train_cmd->add_option("--alpha", train.alpha, "Additive smoothing constant")->capture_default_str();
  train_cmd->add_option("--vocab-cap", train.vocab_cap, "Most frequent words kept")->capture_default_str();
  train_cmd->add_option("--out", train.out, "Model JSON output")->required();

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Generate (optionally watermarked) sequences");
  gen_cmd->add_option("--lm", gen.lm, "Model JSON")->required();
  gen_cmd->add_option("--prompts", gen.prompts, "Prompt file: text lines or {\"id\",\"prompt\"} JSON lines")->required();
  gen_cmd->add_option("--method", gen.method, "none|kgw|ssg")->capture_default_str();
  gen_cmd->add_option("--gate", gen.gate, "always|entropy")->capture_default_str();
  gen_cmd->add_option("--sweet-threshold", gen.sweet_threshold, "Entropy gate in nats")->capture_default_str();
  gen_cmd->add_option("--delta", gen.delta, "Green logit bias")->capture_default_str();
  gen_cmd->add_option("--gamma", gen.gamma, "Green fraction")->capture_default_str();
  gen_cmd->add_option("--window", gen.window, "Context window hashed with the key")->capture_default_str();
  gen_cmd->add_option("--topk", gen.topk, "Even head size paired by ssg")->capture_default_str();
  gen_cmd->add_option("--key", gen.key, "64 hex characters (or SSG_WATERMARK_KEY)");
  gen_cmd->add_option("--seed", gen.seed, "Sampler seed")->capture_default_str();
  gen_cmd->add_option("--temperature", gen.temperature, "Sampling temperature")->capture_default_str();
  gen_cmd->add_option("--max-tokens", gen.max_tokens, "Generation length cap")->capture_default_str();
  gen_cmd->add_option("--samples-per-prompt", gen.samples_per_prompt, "Sequences per prompt")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Generation JSON-lines output")->required();

  DetectArgs det;
  auto* det_cmd = app.add_subcommand("detect", "Score sequences for the watermark");
  det_cmd->add_option("--lm", det.lm, "Model JSON")->required();
  det_cmd->add_option("--inputs", det.inputs, "Generation JSON-lines")->required();
  det_cmd->add_option("--method", det.method, "kgw|ssg partition to reconstruct")->capture_default_str();
  det_cmd->add_option("--detector", det.detector, "kgw|sweet|ewd")->capture_default_str();
  det_cmd->add_option("--gamma", det.gamma, "Green fraction")->capture_default_str();
  det_cmd->add_option("--window", det.window, "Context window")->capture_default_str();
  det_cmd->add_option("--topk", det.topk, "ssg head size")->capture_default_str();
  det_cmd->add_option("--key", det.key, "64 hex characters (or SSG_WATERMARK_KEY)");
  det_cmd->add_option("--prompt-mode", det.prompt_mode, "original|general|none")->capture_default_str();
  det_cmd->add_option("--general-prompt", det.general_prompt, "Prompt used when --prompt-mode general");
  det_cmd->add_option("--z-threshold", det.z_threshold, "Decision threshold")->capture_default_str();
  det_cmd->add_option("--min-tokens", det.min_tokens, "Shorter sequences are skipped")->capture_default_str();
  det_cmd->add_option("--sweet-threshold", det.sweet_threshold, "Entropy filter for sweet")->capture_default_str();
  det_cmd->add_option("--out", det.out, "Report JSON-lines output")->required();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "TPR/F1 at fixed FPR from detection reports");
  eval_cmd->add_option("--wm", ev.wm, "Reports for watermarked text")->required();
  eval_cmd->add_option("--plain", ev.plain, "Reports for unwatermarked text")->required();
  eval_cmd->add_option("--fpr", ev.fprs, "Target false positive rate (repeatable; default 0.01 and 0.05)");
  eval_cmd->add_option("--runs", ev.runs, "Split each arm into this many runs and average")->capture_default_str();
  eval_cmd->add_option("--out", ev.out, "metrics.json output")->required();

  StrengthArgs st;
  auto* st_cmd = app.add_subcommand("strength", "Histogram of per-step watermark strength");
  st_cmd->add_option("--inputs", st.inputs, "Generation JSON-lines")->required();
  st_cmd->add_option("--bins", st.bins, "Histogram bins over [0, 1]")->capture_default_str();
  st_cmd->add_option("--out", st.out, "CSV output")->required();

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo over synthetic spike distributions");
  sim_cmd->add_option("--vocab", sim.vocab, "Vocabulary size")->capture_default_str();
  sim_cmd->add_option("--spikes", sim.spikes, "Number of equal top logits")->capture_default_str();
  sim_cmd->add_option("--spike-logit", sim.spike_logit)->capture_default_str();
  sim_cmd->add_option("--tail-logit", sim.tail_logit)->capture_default_str();
  sim_cmd->add_option("--trials", sim.trials)->capture_default_str();
  sim_cmd->add_option("--method", sim.method, "kgw|ssg")->capture_default_str();
  sim_cmd->add_option("--delta", sim.delta)->capture_default_str();
  sim_cmd->add_option("--gamma", sim.gamma)->capture_default_str();
  sim_cmd->add_option("--topk", sim.topk)->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed)->capture_default_str();
  sim_cmd->add_option("--key", sim.key, "Base key; trial t uses a key derived from it");
  sim_cmd->add_option("--out", sim.out, "Per-trial JSON-lines output")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    json summary;
    if (*train_cmd) summary = cmd_train(train);
    else if (*gen_cmd) summary = cmd_generate(gen);
    else if (*det_cmd) summary = cmd_detect(det);
    else if (*eval_cmd) summary = cmd_eval(ev);
    else if (*st_cmd) summary = cmd_strength(st);
    else if (*sim_cmd) summary = cmd_simulate(sim);
    out << summary.dump() << '\n';
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace ssgmark
