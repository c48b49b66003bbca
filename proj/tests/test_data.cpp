#include <doctest.h>

#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "ssgmark/prf.hpp"

using namespace ssgmark;

namespace {

std::uint64_t file_hash(const char* path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a64(bytes);
}

}  // namespace

// Regenerate with tools/make_corpora.py; a changed hash means the acceptance
// numbers no longer refer to the same corpora.
TEST_CASE("bundled corpora are pinned") {
  CHECK(file_hash("data/low_entropy.txt") == 0xc041b21e8ee716a2ULL);
  CHECK(file_hash("data/medium_entropy.txt") == 0x419b4794470145ccULL);
  CHECK(file_hash("data/high_entropy.txt") == 0x99c519252caa5935ULL);
}
