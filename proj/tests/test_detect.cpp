#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "ssgmark/detect.hpp"
#include "ssgmark/inject.hpp"

using namespace ssgmark;
using ssgmark::testing::code_model;
using ssgmark::testing::prose_model;
using ssgmark::testing::test_key;

namespace {

DetectorParams params_for(Method m, Detector d) {
  DetectorParams p;
  p.detector = d;
  p.config.method = m;
  p.config.key = test_key();
  return p;
}

std::vector<std::uint8_t> flags(std::size_t n, std::size_t green) {
  std::vector<std::uint8_t> g(n, 0);
  std::fill(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(green), 1);
  return g;
}

}  // namespace

TEST_CASE("kgw_z examples") {
  CHECK(kgw_z(flags(100, 100), 0.5) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(kgw_z(flags(100, 50), 0.5) == 0.0);
  CHECK(kgw_z(flags(40, 10), 0.25) == 0.0);
  CHECK_THROWS_AS(kgw_z(std::vector<std::uint8_t>{}, 0.5), InvalidArgument);
}

TEST_CASE("kgw_z strictly increases when a token turns green") {
  RngState rng(2);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.next_unit() * 300);
    std::vector<std::uint8_t> g(n);
    for (auto& f : g) f = rng.next_unit() < 0.4;
    const auto red = std::find(g.begin(), g.end(), 0);
    if (red == g.end()) continue;
    const double before = kgw_z(g, 0.5);
    *red = 1;
    CHECK(kgw_z(g, 0.5) > before);
    // Appending a green token also raises it.
    const double mid = kgw_z(g, 0.5);
    g.push_back(1);
    CHECK(kgw_z(g, 0.5) > mid);
  }
}

TEST_CASE("ewd_z examples") {
  // Entropies {0, c, c, ...}: min-subtraction leaves weight c on the other 100.
  std::vector<double> e(101, 1.7);
  e[0] = 0.0;
  auto g = flags(101, 101);
  CHECK(ewd_z(g, e, 0.5) == doctest::Approx(10.0).epsilon(1e-12));

  std::vector<std::uint8_t> half(101, 0);
  for (std::size_t i = 1; i <= 50; ++i) half[i] = 1;
  CHECK(std::abs(ewd_z(half, e, 0.5)) < 1e-12);

  CHECK_THROWS_AS(ewd_z(g, std::vector<double>(101, 0.3), 0.5), DegenerateWeights);
  CHECK_THROWS_AS(ewd_z(g, std::vector<double>(3, 0.3), 0.5), InvalidArgument);
}

TEST_CASE("ewd_z is invariant to positive affine maps of the entropies") {
  RngState rng(5);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.next_unit() * 200);
    std::vector<std::uint8_t> g(n);
    std::vector<double> e(n), mapped(n);
    for (auto& f : g) f = rng.next_unit() < 0.6;
    for (auto& x : e) x = rng.next_unit() * 3.0;
    const double a = 0.1 + rng.next_unit() * 10.0, b = rng.next_unit() * 20.0 - 10.0;
    for (std::size_t i = 0; i < n; ++i) mapped[i] = a * e[i] + b;
    CHECK(std::abs(ewd_z(g, e, 0.5) - ewd_z(g, mapped, 0.5)) < 1e-9);
  }
}

TEST_CASE("sweet_z examples") {
  RngState rng(6);
  std::vector<std::uint8_t> g(60);
  std::vector<double> e(60);
  for (auto& f : g) f = rng.next_unit() < 0.5;
  for (auto& x : e) x = rng.next_unit() * 2.0;
  CHECK(sweet_z(g, e, 0.0, 0.5) == kgw_z(g, 0.5));
  CHECK_THROWS_AS(sweet_z(g, e, 2.5, 0.5), NoScorableTokens);

  const std::vector<std::uint8_t> mixed{1, 0, 1, 1, 0};
  const std::vector<double> ent{0.9, 0.1, 0.2, 1.2, 0.8};
  CHECK(sweet_z(mixed, ent, 0.5, 0.5) == doctest::Approx(0.5 / std::sqrt(0.75)).epsilon(1e-12));
  CHECK(std::abs(sweet_z(mixed, ent, 0.5, 0.5) - 0.577) < 1e-3);
}

TEST_CASE("detect rejects short text and bad params") {
  const auto model = prose_model();
  const auto params = params_for(Method::ssg, Detector::ewd);
  const TokenSequence ten(10, 5);
  CHECK_THROWS_AS(detect(model, {}, ten, params), TooShort);

  auto bad = params;
  bad.min_tokens = 1;
  bad.config.window_h = 1;
  CHECK_THROWS_AS(detect(model, {}, TokenSequence(20, 5), bad), ConfigError);
  CHECK_THROWS_AS(reconstruct_partition(model, {}, ten, 0, params), InvalidArgument);
}

TEST_CASE("detection flags equal injection flags for every method and detector") {
  const auto model = prose_model();
  for (Method m : {Method::kgw, Method::ssg}) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      auto params = params_for(m, Detector::ewd);
      params.config.max_tokens = 80;
      const auto prompt = model.tokenize("the old road");
      const auto rec = generate(model, prompt, params.config, {1.0, seed});
      if (rec.output.size() < params.min_tokens) continue;
      for (Detector d : {Detector::kgw, Detector::sweet, Detector::ewd}) {
        params.detector = d;
        const auto report = detect(model, prompt, rec.output, params);
        REQUIRE(report.per_token.size() == rec.output.size() - params.config.window_h);
        for (std::size_t i = 0; i < report.per_token.size(); ++i) {
          const auto& step = rec.per_step[i + params.config.window_h];
          REQUIRE(report.per_token[i].green == step.green_chosen);
          REQUIRE(report.per_token[i].entropy == step.entropy);
          const auto [part, ent] = reconstruct_partition(model, prompt, rec.output,
                                                         i + params.config.window_h, params);
          REQUIRE(part.is_green(rec.output[i + params.config.window_h]) == step.green_chosen);
          REQUIRE(ent == step.entropy);
        }
      }
    }
  }
}

TEST_CASE("watermarked text scores high and the decision follows the threshold") {
  const auto model = prose_model();
  auto params = params_for(Method::ssg, Detector::ewd);
  params.config.max_tokens = 200;
  const auto prompt = model.tokenize("a");
  std::size_t detected = 0, trials = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto rec = generate(model, prompt, params.config, {1.0, seed});
    if (rec.output.size() < 100) continue;
    const auto report = detect(model, prompt, rec.output, params);
    CHECK(report.decision == (report.z > params.z_threshold));
    CHECK(!report.fallback);
    detected += report.decision;
    ++trials;
  }
  REQUIRE(trials >= 10);
  CHECK(detected == trials);
}

TEST_CASE("prompt mode changes ssg reconstruction but not kgw") {
  const auto model = code_model(3);
  std::size_t ssg_differs = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto original = params_for(Method::ssg, Detector::kgw);
    original.config.max_tokens = 40;
    const auto prompt = model.tokenize("return total def f ( x ) :");
    const auto rec = generate(model, prompt, original.config, {1.0, seed});
    auto none = original;
    none.prompt_mode = PromptMode::none;
    const auto [pa, ea] = reconstruct_partition(model, prompt, rec.output, 1, original);
    const auto [pb, eb] = reconstruct_partition(model, prompt, rec.output, 1, none);
    ssg_differs += !(pa == pb);

    auto kgw_orig = original, kgw_none = none;
    kgw_orig.config.method = kgw_none.config.method = Method::kgw;
    CHECK(reconstruct_partition(model, prompt, rec.output, 1, kgw_orig).first ==
          reconstruct_partition(model, prompt, rec.output, 1, kgw_none).first);
  }
  CHECK(ssg_differs > 0);
}

TEST_CASE("ewd falls back to kgw on constant entropy and sweet reports an empty filter") {
  // A uniform source has identical entropy at every step.
  struct Uniform : LogitSource {
    std::size_t vocab_size() const override { return 16; }
    void next_logits(std::span<const TokenId>, LogitVector& out) const override { out.assign(16, 0.0); }
  } uniform;
  auto params = params_for(Method::ssg, Detector::ewd);
  TokenSequence text;
  for (TokenId i = 0; i < 40; ++i) text.push_back(3 + (i * 7) % 13);
  const auto ewd = detect(uniform, {}, text, params);
  CHECK(ewd.fallback);
  params.detector = Detector::kgw;
  CHECK(ewd.z == detect(uniform, {}, text, params).z);

  params.detector = Detector::sweet;
  params.config.sweet_threshold = 10.0;
  const auto sweet = detect(uniform, {}, text, params);
  CHECK(sweet.fallback);
  CHECK(sweet.scored_tokens == 0);
  CHECK(sweet.z == 0.0);
}

TEST_CASE("null calibration of kgw_z on unwatermarked text") {
  const auto model = prose_model();
  WatermarkConfig plain;
  plain.method = Method::none;
  plain.max_tokens = 101;
  const auto prompt = model.tokenize("the");
  std::vector<double> zs;
  std::size_t within_3 = 0;
  for (std::uint64_t i = 0; zs.size() < 1000; ++i) {
    const auto rec = generate(model, prompt, plain, {1.0, 1000 + i});
    if (rec.output.size() < 101) continue;
    auto params = params_for(Method::ssg, Detector::kgw);
    // Keys vary per sequence: the null hypothesis is over keys, and a single
    // key over a small vocabulary carries a fixed per-context green-mass offset.
    params.config.key = derive_key(test_key(), i);
    const double z = detect(model, prompt, rec.output, params).z;
    zs.push_back(z);
    within_3 += std::abs(z) <= 3.0;
  }
  const double n = static_cast<double>(zs.size());
  const double mean = std::accumulate(zs.begin(), zs.end(), 0.0) / n;
  double var = 0.0;
  for (double z : zs) var += (z - mean) * (z - mean);
  var /= n - 1;
  MESSAGE("null mean ", mean, " variance ", var);
  CHECK(mean >= -0.2);
  CHECK(mean <= 0.2);
  CHECK(var >= 0.8);
  CHECK(var <= 1.2);
  CHECK(within_3 >= 0.99 * n);
}

TEST_CASE("report json carries the documented fields") {
  DetectionReport r;
  r.z = 4.5;
  r.decision = true;
  const auto line = report_json("000001", r, Method::ssg);
  for (const char* key : {"\"id\"", "\"detector\"", "\"z\"", "\"green_weighted\"", "\"total_weight\"",
                          "\"scored_tokens\"", "\"decision\"", "\"fallback\""}) {
    CHECK(line.find(key) != std::string::npos);
  }
}
