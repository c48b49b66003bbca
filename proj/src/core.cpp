#include "ssgmark/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "ssgmark/prf.hpp"

namespace ssgmark {

void require_valid_logits(std::span<const double> logits) {
  if (logits.size() < 2) {
    throw InvalidArgument("logit vector needs at least 2 entries, got " +
                          std::to_string(logits.size()));
  }
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!std::isfinite(logits[i])) {
      throw InvalidArgument("non-finite logit at index " + std::to_string(i));
    }
  }
}

void softmax_into(std::span<const double> logits, std::vector<double>& out) {
  if (logits.empty()) throw InvalidArgument("softmax of empty vector");
  double max_logit = logits[0];
  for (double v : logits) {
    if (!std::isfinite(v)) throw InvalidArgument("softmax: non-finite logit");
    max_logit = std::max(max_logit, v);
  }
  out.resize(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max_logit);
    sum += out[i];
  }
  const double inv = 1.0 / sum;
  for (double& p : out) p *= inv;
}

ProbVector softmax(std::span<const double> logits) {
  ProbVector out;
  softmax_into(logits, out);
  return out;
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

std::vector<TokenId> topk_indices(std::span<const double> logits, std::size_t k) {
  if (k > logits.size()) {
    throw InvalidArgument("topk: k=" + std::to_string(k) + " exceeds vocabulary size " +
                          std::to_string(logits.size()));
  }
  std::vector<TokenId> ids(logits.size());
  std::iota(ids.begin(), ids.end(), TokenId{0});
  auto by_rank = [&](TokenId a, TokenId b) {
    if (logits[a] != logits[b]) return logits[a] > logits[b];
    return a < b;
  };
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(),
                    by_rank);
  ids.resize(k);
  return ids;
}

// ---------------------------------------------------------------------------

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

SecretKey SecretKey::from_hex(std::string_view hex) {
  if (hex.size() != 64) {
    throw InvalidArgument("key must be 64 hex characters, got " + std::to_string(hex.size()));
  }
  SecretKey key;
  for (std::size_t i = 0; i < 32; ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw InvalidArgument("key contains a non-hex character");
    key.bytes[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return key;
}

std::string SecretKey::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::none: return "none";
    case Method::kgw: return "kgw";
    case Method::ssg: return "ssg";
  }
  return "?";
}

std::string_view to_string(InjectorGate g) {
  return g == InjectorGate::always ? "always" : "entropy";
}

Method parse_method(std::string_view s) {
  if (s == "none") return Method::none;
  if (s == "kgw") return Method::kgw;
  if (s == "ssg") return Method::ssg;
  throw InvalidArgument("unknown method '" + std::string(s) + "' (expected none|kgw|ssg)");
}

InjectorGate parse_gate(std::string_view s) {
  if (s == "always") return InjectorGate::always;
  if (s == "entropy" || s == "entropy_gated") return InjectorGate::entropy_gated;
  throw InvalidArgument("unknown gate '" + std::string(s) + "' (expected always|entropy)");
}

std::size_t green_count(double gamma, std::size_t vocab_size) {
  return static_cast<std::size_t>(std::floor(gamma * static_cast<double>(vocab_size)));
}

void WatermarkConfig::validate(std::size_t vocab_size) const {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ConfigError("gamma must lie in (0, 1), got " + std::to_string(gamma));
  }
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw ConfigError("delta must be finite and >= 0, got " + std::to_string(delta));
  }
  if (window_h == 0) throw ConfigError("window must be a positive integer");
  if (topk_k == 0 || topk_k % 2 != 0) {
    throw ConfigError("topk must be an even positive integer, got " + std::to_string(topk_k));
  }
  if (!(sweet_threshold >= 0.0)) throw ConfigError("sweet_threshold must be >= 0");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be > 0");
  }
  if (max_tokens == 0) throw ConfigError("max_tokens must be a positive integer");
  if (vocab_size == 0) return;
  if (vocab_size < 2) throw ConfigError("vocabulary must contain at least 2 tokens");
  if (method == Method::ssg) {
    if (topk_k > vocab_size) {
      throw ConfigError("topk=" + std::to_string(topk_k) + " exceeds vocabulary size " +
                        std::to_string(vocab_size));
    }
    const std::size_t green = green_count(gamma, vocab_size);
    const std::size_t half = topk_k / 2;
    if (green < half || vocab_size - green < half) {
      throw ConfigError("ssg needs floor(gamma*|V|) >= k/2 and |V| - floor(gamma*|V|) >= k/2");
    }
  }
}

std::string WatermarkConfig::digest() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "method=%s;gate=%s;gamma=%.17g;delta=%.17g;h=%zu;k=%zu;sweet=%.17g;"
                "temperature=%.17g;max_tokens=%zu",
                std::string(to_string(method)).c_str(),
                std::string(to_string(injector_gate)).c_str(), gamma, delta, window_h, topk_k,
                sweet_threshold, temperature, max_tokens);
  const std::string_view text(buf);
  const auto h = fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace ssgmark
