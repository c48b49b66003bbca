#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ssgmark/partition.hpp"
#include "ssgmark/prf.hpp"
#include "ssgmark/strength.hpp"

using namespace ssgmark;

namespace {

SecretKey random_key(RngState& rng) {
  SecretKey key;
  for (auto& b : key.bytes) b = static_cast<std::uint8_t>(rng.next_u64());
  return key;
}

void check_invariants(const Partition& p, std::size_t vocab, double gamma) {
  REQUIRE(p.vocab_size() == vocab);
  CHECK(p.green_size() == green_count(gamma, vocab));
  const auto g = p.green_ids();
  const auto r = p.red_ids();
  CHECK(g.size() + r.size() == vocab);
  std::vector<TokenId> all(g);
  all.insert(all.end(), r.begin(), r.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < vocab; ++i) REQUIRE(all[i] == i);
}

}  // namespace

TEST_CASE("kgw partition cardinality and determinism") {
  RngState rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto key = random_key(rng);
    const TokenSequence ctx{static_cast<TokenId>(t)};
    const auto p = kgw_partition(key, ctx, 0.5, 10, 1);
    CHECK(p.green_size() == 5);
    CHECK(p == kgw_partition(key, ctx, 0.5, 10, 1));
  }
  CHECK_THROWS_AS(kgw_partition(SecretKey{}, TokenSequence{}, 1.0, 10, 1), InvalidArgument);
  CHECK_THROWS_AS(kgw_partition(SecretKey{}, TokenSequence{}, 0.0, 10, 1), InvalidArgument);
}

TEST_CASE("kgw partition: token 0 green in half the keys") {
  RngState rng(2);
  int green = 0;
  for (int t = 0; t < 10000; ++t) green += kgw_partition(random_key(rng), TokenSequence{3}, 0.5, 10, 1).is_green(0);
  CHECK(std::abs(green / 10000.0 - 0.5) < 0.02);
}

TEST_CASE("kgw partition depends on the last h context tokens only") {
  SecretKey key;
  key.bytes[0] = 3;
  const auto a = kgw_partition(key, TokenSequence{1, 2, 3}, 0.5, 50, 2);
  const auto b = kgw_partition(key, TokenSequence{9, 2, 3}, 0.5, 50, 2);
  const auto c = kgw_partition(key, TokenSequence{1, 9, 3}, 0.5, 50, 2);
  CHECK(a == b);
  CHECK(!(a == c));
}

TEST_CASE("ssg four-token example: one green per pair for every key") {
  const std::vector<double> logits{10, 9, -5, -6};
  const auto pairs = ssg_pairs(logits, 4);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].hi == 0);
  CHECK(pairs[0].lo == 1);
  CHECK(pairs[1].hi == 2);
  CHECK(pairs[1].lo == 3);

  // Brute-force oracle: the four possible colorings and their green masses.
  const auto probs = softmax(logits);
  std::vector<double> outcomes;
  for (int a : {0, 1}) {
    for (int b : {2, 3}) outcomes.push_back(probs[a] + probs[b]);
  }
  const double p1 = probs[0];
  CHECK(std::abs(p1 - 0.7310584) < 1e-6);
  const auto bounds = strength_bounds(p1);
  CHECK(std::abs(bounds.lb - 0.1344708) < 1e-6);
  CHECK(std::abs(bounds.ub - 0.8655292) < 1e-6);
  for (double o : outcomes) {
    CHECK(o >= bounds.lb);
    CHECK(o <= bounds.ub);
  }

  RngState rng(3);
  std::set<int> seen;
  for (int t = 0; t < 2000; ++t) {
    const auto p = ssg_partition(random_key(rng), TokenSequence{1}, logits, 0.5, 4, 1);
    REQUIRE(p.is_green(0) != p.is_green(1));
    REQUIRE(p.is_green(2) != p.is_green(3));
    const double pg = green_mass(probs, p);
    const auto match = std::find_if(outcomes.begin(), outcomes.end(),
                                    [&](double o) { return std::abs(o - pg) < 1e-12; });
    REQUIRE(match != outcomes.end());
    seen.insert(static_cast<int>(match - outcomes.begin()));
  }
  CHECK(seen.size() == 4);
}

TEST_CASE("ssg two-token vocabulary splits the pair") {
  const std::vector<double> logits{0.3, -1.2};
  const auto probs = softmax(logits);
  RngState rng(4);
  for (int t = 0; t < 100; ++t) {
    const auto p = ssg_partition(random_key(rng), TokenSequence{}, logits, 0.5, 2, 1);
    REQUIRE(p.green_size() == 1);
    const TokenId g = p.green_ids().front();
    CHECK(green_mass(probs, p) == probs[g]);
  }
}

TEST_CASE("ssg configuration errors") {
  const std::vector<double> logits(10, 0.0);
  CHECK_THROWS_AS(ssg_partition(SecretKey{}, {}, logits, 0.1, 4, 1), ConfigError);  // floor(1) < 2
  CHECK_THROWS_AS(ssg_partition(SecretKey{}, {}, logits, 0.5, 12, 1), ConfigError);
  CHECK_THROWS_AS(ssg_partition(SecretKey{}, {}, logits, 0.5, 3, 1), ConfigError);
  CHECK_THROWS_AS(ssg_partition(SecretKey{}, {}, logits, 0.95, 4, 1), ConfigError);  // tail overflow
  CHECK_NOTHROW(ssg_partition(SecretKey{}, {}, logits, 0.5, 10, 1));
}

TEST_CASE("pair_assign") {
  SecretKey key;
  key.bytes[1] = 42;
  const TokenSequence ctx{5};
  const auto a = pair_assign(key, ctx, 3, 7, 1);
  const auto b = pair_assign(key, ctx, 7, 3, 1);
  CHECK(a.green == b.green);
  CHECK(a.red == b.red);
  CHECK(a.green != a.red);
  const auto c = pair_assign(key, ctx, 3, 7, 1);
  CHECK(c.green == a.green);
  CHECK_THROWS_AS(pair_assign(key, ctx, 4, 4, 1), InvalidArgument);

  RngState rng(5);
  int green = 0;
  for (int t = 0; t < 10000; ++t) green += pair_assign(random_key(rng), ctx, 3, 7, 1).green == 3;
  CHECK(std::abs(green / 10000.0 - 0.5) < 0.02);
}

TEST_CASE("partition invariants over random inputs") {
  RngState rng(6);
  for (int t = 0; t < 300; ++t) {
    const std::size_t vocab = 4 + static_cast<std::size_t>(rng.next_unit() * 4093);
    const double gamma = 0.5;
    std::size_t k = 2 * (1 + static_cast<std::size_t>(rng.next_unit() * 8));
    k = std::min(k, vocab - vocab % 2);
    std::vector<double> logits(vocab);
    for (double& l : logits) l = std::round(rng.next_unit() * 400.0) / 16.0 - 12.0;
    const auto key = random_key(rng);
    const TokenSequence ctx{static_cast<TokenId>(rng.next_unit() * static_cast<double>(vocab)),
                            static_cast<TokenId>(rng.next_unit() * static_cast<double>(vocab))};

    const auto ssg = ssg_partition(key, ctx, logits, gamma, k, 1);
    check_invariants(ssg, vocab, gamma);
    check_invariants(kgw_partition(key, ctx, gamma, vocab, 1), vocab, gamma);

    for (const auto& [hi, lo] : ssg_pairs(logits, k)) REQUIRE(ssg.is_green(hi) != ssg.is_green(lo));

    // Rank invariance under exact strictly increasing maps.
    std::vector<double> affine(logits), squashed(logits);
    for (double& l : affine) l = 4.0 * l + 7.0;
    for (double& l : squashed) l = std::exp(l / 4.0);
    CHECK(ssg_partition(key, ctx, affine, gamma, k, 1) == ssg);
    CHECK(ssg_partition(key, ctx, squashed, gamma, k, 1) == ssg);

    // KGW through the dispatcher ignores logits entirely.
    WatermarkConfig cfg;
    cfg.method = Method::kgw;
    cfg.key = key;
    std::vector<double> other(vocab, 0.0);
    CHECK(build_partition(cfg, ctx, logits) == build_partition(cfg, ctx, other));
  }
}

TEST_CASE("ssg green mass respects the pairing bound with tail slack") {
  RngState rng(7);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t vocab = 8 + static_cast<std::size_t>(rng.next_unit() * 500);
    const std::size_t k = 2 * (1 + static_cast<std::size_t>(rng.next_unit() * 3));
    std::vector<double> logits(vocab);
    const double scale = 1.0 + rng.next_unit() * 10.0;
    for (double& l : logits) l = rng.next_unit() * scale;
    const auto probs = softmax(logits);
    const auto p = ssg_partition(random_key(rng), TokenSequence{1}, logits, 0.5, k, 1);
    const auto check = check_bounds(probs, p, k);
    REQUIRE(check.within);
  }
}

TEST_CASE("kgw puts all m spikes in one color with probability 2^(1-m)") {
  RngState rng(8);
  for (std::size_t m : {2u, 3u, 4u}) {
    constexpr int kTrials = 4000;
    int same = 0;
    for (int t = 0; t < kTrials; ++t) {
      const auto p = kgw_partition(random_key(rng), TokenSequence{1}, 0.5, 200, 1);
      bool all_same = true;
      for (TokenId id = 1; id < m; ++id) all_same &= p.is_green(id) == p.is_green(0);
      same += all_same;
    }
    const double expected = std::pow(2.0, 1.0 - static_cast<double>(m));
    const double sigma = std::sqrt(expected * (1 - expected) / kTrials);
    CHECK(std::abs(same / static_cast<double>(kTrials) - expected) < 3 * sigma);
  }
}

TEST_CASE("expected green rate by rank matches the head/tail split") {
  // gamma=0.3, |V|=40, k=4: head tokens green with rate 1/2, tail tokens with
  // (floor(12) - 2) / 36, so the vocabulary-wide mean stays gamma.
  constexpr std::size_t kVocab = 40;
  std::vector<double> logits(kVocab);
  for (std::size_t i = 0; i < kVocab; ++i) logits[i] = -static_cast<double>(i);
  std::vector<int> green(kVocab, 0);
  RngState rng(9);
  constexpr int kTrials = 20000;
  for (int t = 0; t < kTrials; ++t) {
    const auto p = ssg_partition(random_key(rng), TokenSequence{2}, logits, 0.3, 4, 1);
    for (TokenId id = 0; id < kVocab; ++id) green[id] += p.is_green(id);
  }
  for (TokenId id = 0; id < kVocab; ++id) {
    const double rate = green[id] / static_cast<double>(kTrials);
    const double expected = id < 4 ? 0.5 : 10.0 / 36.0;
    CHECK(std::abs(rate - expected) < 0.015);
  }
}
