#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ssgmark/strength.hpp"

using namespace ssgmark;

namespace {

// Independent route: bias a two-token softmax [ln p, ln(1-p)] by delta on the
// first entry, read off the biased green mass, normalize the increase.
double strength_via_softmax(double delta, double p) {
  const auto biased = softmax(std::vector<double>{std::log(p) + delta, std::log1p(-p)});
  return (biased[0] - p) / std::sqrt(p * (1.0 - p));
}

}  // namespace

TEST_CASE("watermark_strength examples") {
  for (double d : {0.0, 0.5, 2.0, 10.0}) {
    CHECK(watermark_strength(d, 0.0) == 0.0);
    CHECK(watermark_strength(d, 1.0) == 0.0);
  }
  for (double p : {0.01, 0.3, 0.5, 0.99}) CHECK(watermark_strength(0.0, p) == 0.0);
  CHECK(std::abs(watermark_strength(2.0, 0.5) - 0.761594156) < 1e-6);
  CHECK(std::abs(strength_via_softmax(2.0, 0.5) - 0.761594156) < 1e-6);
  CHECK_THROWS_AS(watermark_strength(2.0, -0.1), InvalidArgument);
  CHECK_THROWS_AS(watermark_strength(2.0, 1.1), InvalidArgument);
}

TEST_CASE("closed form agrees with the biased-softmax route") {
  for (int i = 0; i <= 50; ++i) {
    const double delta = 5.0 * i / 50.0;
    for (int j = 1; j < 100; ++j) {
      const double p = j / 100.0;
      REQUIRE(std::abs(watermark_strength(delta, p) - strength_via_softmax(delta, p)) < 1e-12);
      const double via_eq = (biased_green_mass(delta, p) - p) / std::sqrt(p * (1 - p));
      REQUIRE(std::abs(watermark_strength(delta, p) - via_eq) < 1e-12);
    }
  }
}

TEST_CASE("strength is concave in p_g for moderate delta") {
  for (double delta = 0.25; delta <= 1.5; delta += 0.25) {
    for (int a = 1; a < 99; a += 3) {
      for (int b = a + 1; b < 100; b += 5) {
        const double pa = a / 100.0, pb = b / 100.0;
        const double mid = watermark_strength(delta, 0.5 * (pa + pb));
        REQUIRE(mid >= 0.5 * (watermark_strength(delta, pa) + watermark_strength(delta, pb)) - 1e-12);
      }
    }
  }
}

TEST_CASE("strength loses concavity but stays unimodal at larger delta") {
  // At delta=2 the curve has an inflection pair around p in (0.32, 0.64).
  const double a = 0.2, b = 0.7;
  CHECK(watermark_strength(2.0, 0.5 * (a + b)) <
        0.5 * (watermark_strength(2.0, a) + watermark_strength(2.0, b)));

  for (double delta = 0.25; delta <= 5.0; delta += 0.25) {
    int direction_changes = 0;
    bool rising = true;
    double prev = watermark_strength(delta, 1e-4);
    for (int i = 2; i < 10000; ++i) {
      const double f = watermark_strength(delta, i * 1e-4);
      const bool now_rising = f > prev;
      if (now_rising != rising) {
        ++direction_changes;
        rising = now_rising;
      }
      prev = f;
    }
    CHECK(direction_changes == 1);
  }
}

TEST_CASE("strength increases in delta") {
  for (int j = 1; j < 100; ++j) {
    const double p = j / 100.0;
    for (double d = 0.0; d < 5.0; d += 0.1) REQUIRE(watermark_strength(d + 0.1, p) > watermark_strength(d, p));
  }
}

TEST_CASE("strength within the pairing bounds is at least the smaller endpoint") {
  for (double p1 = 0.0; p1 <= 1.0; p1 += 0.05) {
    const auto [lb, ub] = strength_bounds(p1);
    for (double delta : {0.5, 2.0, 4.0}) {
      const double floor = std::min(watermark_strength(delta, lb), watermark_strength(delta, ub));
      for (int i = 0; i <= 200; ++i) {
        const double p = lb + (ub - lb) * i / 200.0;
        REQUIRE(watermark_strength(delta, p) >= floor - 1e-12);
      }
    }
  }
}

TEST_CASE("the strength maximum sits below one half and drifts left with delta") {
  double previous_argmax = 0.5;
  for (double delta : {0.5, 1.0, 2.0, 3.0, 5.0}) {
    double best = -1.0, argmax = 0.0;
    for (int i = 1; i < 100000; ++i) {
      const double p = i / 100000.0;
      const double f = watermark_strength(delta, p);
      if (f > best) {
        best = f;
        argmax = p;
      }
    }
    CHECK(argmax < 0.5);
    CHECK(argmax < previous_argmax);
    previous_argmax = argmax;
  }
}

TEST_CASE("green_mass") {
  Partition all(2), none(2), second(2);
  all.set_green(0);
  all.set_green(1);
  second.set_green(1);
  const std::vector<double> probs{0.7311, 0.2689};
  CHECK(green_mass(probs, all) == doctest::Approx(1.0));
  CHECK(green_mass(probs, none) == 0.0);
  CHECK(green_mass(softmax(std::vector<double>{1.0, 0.0}), second) ==
        doctest::Approx(0.2689414213699951).epsilon(1e-12));
  CHECK_THROWS_AS(green_mass(std::vector<double>{1.0}, all), InvalidArgument);
}

TEST_CASE("strength_bounds") {
  auto b = strength_bounds(1.0);
  CHECK(b.lb == 0.0);
  CHECK(b.ub == 1.0);
  b = strength_bounds(0.0);
  CHECK(b.lb == 0.5);
  CHECK(b.ub == 0.5);
  b = strength_bounds(0.7310584);
  CHECK(std::abs(b.lb - 0.1344708) < 1e-7);
  CHECK(std::abs(b.ub - 0.8655292) < 1e-7);
}

TEST_CASE("strength histogram") {
  std::vector<double> same(20, 0.37);
  auto h = strength_histogram(same, 50);
  int nonzero = 0;
  for (std::size_t i = 0; i < h.mass.size(); ++i) {
    if (h.mass[i] > 0) {
      ++nonzero;
      CHECK(0.02 * i <= 0.37);
      CHECK(0.02 * (i + 1) > 0.37);
    }
  }
  CHECK(nonzero == 1);
  CHECK(h.median == doctest::Approx(0.37));

  std::vector<double> spread;
  for (int i = 0; i < 997; ++i) spread.push_back(std::fmod(i * 0.618, 1.3));
  h = strength_histogram(spread, 37);
  double total = 0.0;
  for (double m : h.mass) total += m;
  CHECK(std::abs(total - 1.0) < 1e-9);

  h = strength_histogram(std::vector<double>{0.0, 0.01, 0.5, 0.9}, 10);
  CHECK(h.fraction_below_005 == 0.5);
  CHECK(h.mean == doctest::Approx(0.3525));
  std::ostringstream csv;
  h.write_csv(csv);
  CHECK(csv.str().rfind("bin_lo,bin_hi,mass\n", 0) == 0);

  CHECK_THROWS_AS(strength_histogram(std::vector<double>{}, 10), InvalidArgument);
}
