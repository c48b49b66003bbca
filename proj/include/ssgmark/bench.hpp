#pragma once

// Partition microbenchmark: median wall-clock per call of kgw_partition and
// ssg_partition at a given vocabulary size.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ssgmark {

struct PartitionTiming {
  std::size_t k = 0;  // 0 marks the kgw baseline
  double seconds_per_call = 0.0;
};

struct PartitionBench {
  std::size_t vocab_size = 0;
  PartitionTiming kgw;
  std::vector<PartitionTiming> ssg;  // one per requested k
};

PartitionBench bench_partitions(std::size_t vocab_size, const std::vector<std::size_t>& ks,
                                std::size_t calls_per_rep = 20, std::size_t reps = 7,
                                std::uint64_t seed = 1);

}  // namespace ssgmark
