// Prints per-call cost of kgw_partition and ssg_partition for a range of k.
//
//   bench_partition [vocab_size] [k ...]

#include <cstdio>
#include <cstdlib>
#include <vector>

#include "ssgmark/bench.hpp"

int main(int argc, char** argv) {
  std::size_t vocab = 32768;
  std::vector<std::size_t> ks{2, 4, 8, 16, 64, 256, 1024, 4096, 16384};
  if (argc > 1) vocab = std::strtoull(argv[1], nullptr, 10);
  if (argc > 2) {
    ks.clear();
    for (int i = 2; i < argc; ++i) ks.push_back(std::strtoull(argv[i], nullptr, 10));
  }
  bool valid = vocab >= 2;
  for (std::size_t k : ks) valid = valid && k >= 2 && k % 2 == 0 && k <= vocab;
  if (!valid) {
    std::fprintf(stderr, "usage: bench_partition [vocab_size>=2] [even k <= vocab_size ...]\n");
    return 2;
  }
  const auto result = ssgmark::bench_partitions(vocab, ks);
  std::printf("vocab=%zu\n", result.vocab_size);
  std::printf("%-8s %12s %8s\n", "variant", "us/call", "vs kgw");
  std::printf("%-8s %12.2f %8.2f\n", "kgw", result.kgw.seconds_per_call * 1e6, 1.0);
  for (const auto& t : result.ssg) {
    std::printf("ssg k=%-4zu %10.2f %8.2f\n", t.k, t.seconds_per_call * 1e6,
                t.seconds_per_call / result.kgw.seconds_per_call);
  }
  return 0;
}
