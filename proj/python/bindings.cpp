#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ssgmark/cli.hpp"
#include "ssgmark/detect.hpp"
#include "ssgmark/eval.hpp"
#include "ssgmark/inject.hpp"
#include "ssgmark/lm.hpp"
#include "ssgmark/partition.hpp"
#include "ssgmark/strength.hpp"

namespace py = pybind11;
using namespace ssgmark;

namespace {

std::vector<std::uint8_t> as_flags(const std::vector<bool>& green) {
  return {green.begin(), green.end()};
}

SecretKey key_from(const std::string& hex) { return SecretKey::from_hex(hex); }

}  // namespace

PYBIND11_MODULE(_ssgmark, m) {
  m.doc() = "Entropy-aware green/red list watermarking over n-gram logit sources";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<TooShort>(m, "TooShort", PyExc_ValueError);
  py::register_exception<NoScorableTokens>(m, "NoScorableTokens", PyExc_ValueError);
  py::register_exception<DegenerateWeights>(m, "DegenerateWeights", PyExc_ValueError);

  // --- numerics -----------------------------------------------------------
  m.def("softmax", [](const std::vector<double>& logits) { return softmax(logits); }, py::arg("logits"));
  m.def("entropy", [](const std::vector<double>& probs) { return entropy(probs); }, py::arg("probs"),
        "Shannon entropy in nats.");
  m.def("watermark_strength", &watermark_strength, py::arg("delta"), py::arg("p_g"));
  m.def("biased_green_mass", &biased_green_mass, py::arg("delta"), py::arg("p_g"));
  m.def(
      "strength_bounds",
      [](double p1) {
        const auto b = strength_bounds(p1);
        return py::make_tuple(b.lb, b.ub);
      },
      py::arg("p1"));

  // --- configuration ------------------------------------------------------
  py::class_<WatermarkConfig>(m, "WatermarkConfig")
      .def(py::init([](const std::string& method, const std::string& key, double gamma, double delta,
                       std::size_t window, std::size_t topk, const std::string& gate, double sweet_threshold,
                       std::size_t max_tokens) {
             WatermarkConfig cfg;
             cfg.method = parse_method(method);
             cfg.key = key_from(key);
             cfg.gamma = gamma;
             cfg.delta = delta;
             cfg.window_h = window;
             cfg.topk_k = topk;
             cfg.injector_gate = parse_gate(gate);
             cfg.sweet_threshold = sweet_threshold;
             cfg.max_tokens = max_tokens;
             cfg.validate();
             return cfg;
           }),
           py::arg("method") = "ssg", py::arg("key") = std::string(64, '0'), py::arg("gamma") = 0.5,
           py::arg("delta") = 2.0, py::arg("window") = 1, py::arg("topk") = 4, py::arg("gate") = "always",
           py::arg("sweet_threshold") = 0.695, py::arg("max_tokens") = 512)
      .def_property_readonly("method", [](const WatermarkConfig& c) { return std::string(to_string(c.method)); })
      .def_property_readonly("key", [](const WatermarkConfig& c) { return c.key.to_hex(); })
      .def_readonly("gamma", &WatermarkConfig::gamma)
      .def_readonly("delta", &WatermarkConfig::delta)
      .def_readonly("window", &WatermarkConfig::window_h)
      .def_readonly("topk", &WatermarkConfig::topk_k)
      .def_readonly("sweet_threshold", &WatermarkConfig::sweet_threshold)
      .def_readonly("max_tokens", &WatermarkConfig::max_tokens)
      .def("digest", &WatermarkConfig::digest);

  // --- partitions ---------------------------------------------------------
  m.def(
      "kgw_partition",
      [](const std::string& key, const TokenSequence& context, double gamma, std::size_t vocab, std::size_t window) {
        return kgw_partition(key_from(key), context, gamma, vocab, window).green_ids();
      },
      py::arg("key"), py::arg("context"), py::arg("gamma"), py::arg("vocab_size"), py::arg("window") = 1,
      "Green token ids of the logit-independent random split.");
  m.def(
      "ssg_partition",
      [](const std::string& key, const TokenSequence& context, const std::vector<double>& logits, double gamma,
         std::size_t k, std::size_t window) {
        return ssg_partition(key_from(key), context, logits, gamma, k, window).green_ids();
      },
      py::arg("key"), py::arg("context"), py::arg("logits"), py::arg("gamma"), py::arg("k"), py::arg("window") = 1,
      "Green token ids of the pairwise top-k split.");

  // --- language model -----------------------------------------------------
  py::class_<NGramModel>(m, "NGramModel")
      .def_static(
          "train",
          [](const std::string& text, std::size_t order, double alpha, std::size_t vocab_cap) {
            return NGramModel::train(split_documents(text), order, alpha, vocab_cap);
          },
          py::arg("text"), py::arg("order") = 2, py::arg("alpha") = 0.1, py::arg("vocab_cap") = 5000)
      .def_static("load", [](const std::string& path) { return NGramModel::load(path); }, py::arg("path"))
      .def("save", [](const NGramModel& model, const std::string& path) { model.save(path); }, py::arg("path"))
      .def_property_readonly("vocab_size", &NGramModel::vocab_size)
      .def_property_readonly("order", &NGramModel::order)
      .def("tokenize", &NGramModel::tokenize, py::arg("text"))
      .def(
          "render", [](const NGramModel& model, const TokenSequence& tokens) { return model.render(tokens); },
          py::arg("tokens"))
      .def(
          "next_logits",
          [](const NGramModel& model, const TokenSequence& context) { return model.next_logits(context); },
          py::arg("context"));

  // --- generation ---------------------------------------------------------
  py::class_<StepRecord>(m, "StepRecord")
      .def_readonly("entropy", &StepRecord::entropy)
      .def_readonly("green_chosen", &StepRecord::green_chosen)
      .def_readonly("p_g", &StepRecord::p_g)
      .def_readonly("strength", &StepRecord::strength)
      .def_readonly("biased", &StepRecord::biased);

  py::class_<GenerationRecord>(m, "GenerationRecord")
      .def_readonly("prompt", &GenerationRecord::prompt)
      .def_readonly("output", &GenerationRecord::output)
      .def_readonly("per_step", &GenerationRecord::per_step)
      .def_readonly("config_digest", &GenerationRecord::config_digest)
      .def("to_json", &GenerationRecord::to_json);

  m.def(
      "generate",
      [](const NGramModel& model, const TokenSequence& prompt, const WatermarkConfig& config, std::uint64_t seed,
         double temperature) {
        py::gil_scoped_release release;
        return generate(model, prompt, config, SamplerParams{temperature, seed});
      },
      py::arg("model"), py::arg("prompt"), py::arg("config"), py::arg("seed") = 0, py::arg("temperature") = 1.0);

  // --- detection ----------------------------------------------------------
  m.def(
      "kgw_z", [](const std::vector<bool>& green, double gamma) { return kgw_z(as_flags(green), gamma); },
      py::arg("green"), py::arg("gamma"));
  m.def(
      "sweet_z",
      [](const std::vector<bool>& green, const std::vector<double>& entropies, double threshold, double gamma) {
        return sweet_z(as_flags(green), entropies, threshold, gamma);
      },
      py::arg("green"), py::arg("entropies"), py::arg("threshold"), py::arg("gamma"));
  m.def(
      "ewd_z",
      [](const std::vector<bool>& green, const std::vector<double>& entropies, double gamma) {
        return ewd_z(as_flags(green), entropies, gamma);
      },
      py::arg("green"), py::arg("entropies"), py::arg("gamma"));

  py::class_<DetectionReport>(m, "DetectionReport")
      .def_property_readonly("detector", [](const DetectionReport& r) { return std::string(to_string(r.detector)); })
      .def_readonly("z", &DetectionReport::z)
      .def_readonly("green_weighted", &DetectionReport::green_weighted)
      .def_readonly("total_weight", &DetectionReport::total_weight)
      .def_readonly("scored_tokens", &DetectionReport::scored_tokens)
      .def_readonly("decision", &DetectionReport::decision)
      .def_readonly("fallback", &DetectionReport::fallback)
      .def_property_readonly("green", [](const DetectionReport& r) {
        std::vector<bool> out;
        for (const auto& t : r.per_token) out.push_back(t.green);
        return out;
      });

  m.def(
      "detect",
      [](const NGramModel& model, const TokenSequence& prompt, const TokenSequence& text,
         const WatermarkConfig& config, const std::string& detector, double z_threshold, std::size_t min_tokens,
         const std::string& prompt_mode) {
        DetectorParams params;
        params.detector = parse_detector(detector);
        params.config = config;
        params.z_threshold = z_threshold;
        params.min_tokens = min_tokens;
        params.prompt_mode = parse_prompt_mode(prompt_mode);
        if (params.prompt_mode == PromptMode::general) {
          params.general_prompt = model.tokenize(kDefaultGeneralPrompt);
        }
        py::gil_scoped_release release;
        return detect(model, prompt, text, params);
      },
      py::arg("model"), py::arg("prompt"), py::arg("text"), py::arg("config"), py::arg("detector") = "ewd",
      py::arg("z_threshold") = 4.0, py::arg("min_tokens") = 15, py::arg("prompt_mode") = "original");

  // --- evaluation ---------------------------------------------------------
  m.def(
      "calibrate_threshold",
      [](const std::vector<double>& plain, double fpr) { return calibrate_threshold(plain, fpr); },
      py::arg("plain"), py::arg("fpr"));
  m.def(
      "tpr_f1_at_fpr",
      [](const std::vector<double>& watermarked, const std::vector<double>& plain, double fpr) {
        const auto r = tpr_f1_at_fpr(ScoreSet{watermarked, plain}, fpr);
        return py::dict(py::arg("tpr") = r.tpr, py::arg("f1") = r.f1, py::arg("threshold") = r.threshold);
      },
      py::arg("watermarked"), py::arg("plain"), py::arg("fpr"));

  // --- command line -------------------------------------------------------
  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the ssgmark tool in-process; returns (exit_code, stdout, stderr).");
}
