#include "ssgmark/bench.hpp"

#include <algorithm>
#include <chrono>

#include "ssgmark/partition.hpp"
#include "ssgmark/prf.hpp"

namespace ssgmark {

namespace {

template <typename Fn>
double median_seconds(std::size_t calls, std::size_t reps, Fn&& fn) {
  std::vector<double> samples;
  samples.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t c = 0; c < calls; ++c) fn(r * calls + c);
    const auto t1 = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double>(t1 - t0).count() / static_cast<double>(calls));
  }
  std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(reps / 2), samples.end());
  return samples[reps / 2];
}

}  // namespace

PartitionBench bench_partitions(std::size_t vocab_size, const std::vector<std::size_t>& ks,
                                std::size_t calls_per_rep, std::size_t reps, std::uint64_t seed) {
  PartitionBench out;
  out.vocab_size = vocab_size;

  RngState rng(seed);
  LogitVector logits(vocab_size);
  for (double& l : logits) l = rng.next_unit() * 20.0 - 10.0;
  SecretKey key;
  for (auto& b : key.bytes) b = static_cast<std::uint8_t>(rng.next_u64());

  volatile std::size_t sink = 0;
  // Warm-up so the first timed variant does not pay for page faults.
  sink = sink + kgw_partition(key, TokenSequence{1}, 0.5, vocab_size, 1).green_size();

  out.kgw.k = 0;
  out.kgw.seconds_per_call = median_seconds(calls_per_rep, reps, [&](std::size_t i) {
    const TokenSequence ctx{static_cast<TokenId>(i % vocab_size)};
    sink = sink + kgw_partition(key, ctx, 0.5, vocab_size, 1).green_size();
  });
  for (std::size_t k : ks) {
    PartitionTiming t;
    t.k = k;
    t.seconds_per_call = median_seconds(calls_per_rep, reps, [&](std::size_t i) {
      const TokenSequence ctx{static_cast<TokenId>(i % vocab_size)};
      sink = sink + ssg_partition(key, ctx, logits, 0.5, k, 1).green_size();
    });
    out.ssg.push_back(t);
  }
  return out;
}

}  // namespace ssgmark
