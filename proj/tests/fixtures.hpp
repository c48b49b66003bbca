#pragma once

// Small in-memory models shared by the unit tests.

#include <string>

#include "ssgmark/lm.hpp"
#include "ssgmark/prf.hpp"

namespace ssgmark::testing {

/// Varied word salad with enough branching that bigram entropy is high. 33 words
/// plus 3 reserved ids keep the vocabulary even, so floor(gamma V) = gamma V.
inline NGramModel prose_model(std::size_t order = 2) {
  static const char* words[] = {"the",   "a",     "river", "stone", "light", "quiet", "north", "field",
                                "house", "under", "over",  "with",  "and",   "slow",  "bright", "cold",
                                "wind",  "song",  "path",  "door",  "old",   "green", "small",  "far",
                                "road",  "bird",  "sea",   "hill",  "tree",  "night", "day",    "morning", "stream"};
  RngState rng(20240611);
  std::string text;
  for (int doc = 0; doc < 12; ++doc) {
    for (int w = 0; w < 2000; ++w) {
      text += words[static_cast<std::size_t>(rng.next_unit() * 33)];
      text += ' ';
    }
    text += "\n\n";
  }
  return NGramModel::train(split_documents(text), order, 0.5, 1000);
}

/// Templated code-like lines: most steps have a single likely continuation.
inline NGramModel code_model(std::size_t order = 3) {
  static const char* names[] = {"x", "y", "idx", "n", "item", "value"};
  std::string text;
  for (int doc = 0; doc < 48; ++doc) {
    const std::string v = names[doc % 6];
    const std::string w = names[(doc / 6) % 6];
    text += "def f ( " + v + " ) :\n  for " + w + " in range ( " + v + " ) :\n    total += " + w +
            "\n  return total\n\n";
  }
  return NGramModel::train(split_documents(text), order, 0.05, 1000);
}

inline SecretKey test_key(std::uint8_t fill = 0x5a) {
  SecretKey key;
  for (std::size_t i = 0; i < key.bytes.size(); ++i) key.bytes[i] = static_cast<std::uint8_t>(fill + i);
  return key;
}

}  // namespace ssgmark::testing
