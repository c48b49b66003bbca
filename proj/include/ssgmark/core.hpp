#pragma once

// Numeric primitives shared by every stage of the watermark pipeline:
// softmax, Shannon entropy, deterministic top-k ranking, and the
// configuration record consumed by both injection and detection.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ssgmark {

using TokenId = std::uint32_t;
using TokenSequence = std::vector<TokenId>;

// Per-step scores over the vocabulary. Index = token id.
using LogitVector = std::vector<double>;
using ProbVector = std::vector<double>;

/// Thrown for malformed arguments (bad range, size mismatch, non-finite input).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a WatermarkConfig/DetectorParams combination cannot be honored.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an input file or record does not match its schema.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Numerics

/// Max-subtracted softmax. Throws InvalidArgument on non-finite or empty input.
ProbVector softmax(std::span<const double> logits);

/// Writes softmax(logits) into `out` (resized). Same contract as softmax().
void softmax_into(std::span<const double> logits, std::vector<double>& out);

/// Shannon entropy in nats; zero-probability terms contribute nothing.
double entropy(std::span<const double> probs);

/// The k highest-logit ids, descending by logit, ties broken by ascending id.
std::vector<TokenId> topk_indices(std::span<const double> logits, std::size_t k);

/// Throws InvalidArgument unless every entry is finite and there are at least two.
void require_valid_logits(std::span<const double> logits);

// ---------------------------------------------------------------------------
// Configuration

struct SecretKey {
  std::array<std::uint8_t, 32> bytes{};

  /// Parses exactly 64 hex characters (either case).
  static SecretKey from_hex(std::string_view hex);
  std::string to_hex() const;

  friend bool operator==(const SecretKey&, const SecretKey&) = default;
};

enum class Method { none, kgw, ssg };
enum class InjectorGate { always, entropy_gated };

std::string_view to_string(Method m);
std::string_view to_string(InjectorGate g);
Method parse_method(std::string_view s);
InjectorGate parse_gate(std::string_view s);

struct WatermarkConfig {
  Method method = Method::ssg;
  InjectorGate injector_gate = InjectorGate::always;
  double gamma = 0.5;
  double delta = 2.0;
  std::size_t window_h = 1;
  std::size_t topk_k = 4;
  double sweet_threshold = 0.695;  // nats
  SecretKey key{};
  double temperature = 1.0;
  std::size_t max_tokens = 512;

  /// Checks scalar ranges and, when vocab_size > 0, the vocabulary-dependent
  /// constraints (k <= |V|, and for ssg both colors can absorb k/2 tokens).
  /// Throws ConfigError naming the offending field.
  void validate(std::size_t vocab_size = 0) const;

  /// FNV-1a digest (hex) over every field except the key.
  std::string digest() const;
};

/// floor(gamma * vocab_size), the green-set cardinality.
std::size_t green_count(double gamma, std::size_t vocab_size);

}  // namespace ssgmark
