#include "ssgmark/lm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ssgmark/prf.hpp"

namespace ssgmark {

using nlohmann::json;

namespace {

const char* const kSpecials[] = {"<s>", "</s>", "<unk>"};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

std::vector<std::string> split_words(std::string_view line) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) words.emplace_back(line.substr(start, i - start));
  }
  return words;
}

std::vector<TokenId> parse_key(const std::string& key) {
  std::vector<TokenId> ids;
  if (key.empty()) return ids;
  std::size_t pos = 0;
  while (pos <= key.size()) {
    const std::size_t comma = std::min(key.find(',', pos), key.size());
    const std::string part = key.substr(pos, comma - pos);
    if (part.empty()) throw ParseError("malformed context key '" + key + "'");
    std::size_t used = 0;
    const unsigned long v = std::stoul(part, &used);
    if (used != part.size()) throw ParseError("malformed context key '" + key + "'");
    ids.push_back(static_cast<TokenId>(v));
    pos = comma + 1;
  }
  return ids;
}

std::string format_key(const std::vector<TokenId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(ids[i]);
  }
  return out;
}

}  // namespace

std::vector<std::vector<std::string>> split_documents(std::string_view text) {
  std::vector<std::vector<std::string>> docs;
  std::vector<std::string> current;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = std::min(text.find('\n', pos), text.size());
    auto words = split_words(text.substr(pos, nl - pos));
    if (words.empty()) {
      if (!current.empty()) docs.push_back(std::move(current));
      current.clear();
    } else {
      current.insert(current.end(), std::make_move_iterator(words.begin()),
                     std::make_move_iterator(words.end()));
    }
    pos = nl + 1;
  }
  if (!current.empty()) docs.push_back(std::move(current));
  return docs;
}

std::size_t NGramModel::KeyHash::operator()(const std::vector<TokenId>& key) const {
  std::uint64_t h = kFnvOffsetBasis;
  for (TokenId id : key) {
    h ^= id;
    h *= kFnvPrime;
  }
  return static_cast<std::size_t>(h);
}

NGramModel NGramModel::train(const std::vector<std::vector<std::string>>& documents,
                             std::size_t order, double alpha, std::size_t vocab_cap) {
  if (order < 1) throw InvalidArgument("order must be >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be > 0");
  std::size_t n_words = 0;
  for (const auto& d : documents) n_words += d.size();
  if (n_words == 0) throw InvalidArgument("corpus is empty");

  std::map<std::string, std::uint64_t> freq;
  for (const auto& doc : documents) {
    for (const auto& w : doc) ++freq[w];
  }
  std::vector<std::pair<std::string, std::uint64_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > vocab_cap) ranked.resize(vocab_cap);

  NGramModel model;
  model.order_ = order;
  model.alpha_ = alpha;
  model.vocab_.assign(std::begin(kSpecials), std::end(kSpecials));
  for (auto& [word, _] : ranked) model.vocab_.push_back(word);
  // Pad so the smallest legal model still has one surface token besides the specials.
  while (model.vocab_.size() < 4) model.vocab_.push_back("<pad" + std::to_string(model.vocab_.size()) + ">");
  model.rebuild_index();

  TokenSequence ids;
  for (const auto& doc : documents) {
    ids.clear();
    for (const auto& w : doc) ids.push_back(model.token_id(w));
    ids.push_back(kEosId);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      auto key = model.context_key(std::span(ids.data(), i));
      auto& entry = model.counts_[std::move(key)];
      auto it = std::lower_bound(entry.next.begin(), entry.next.end(), ids[i],
                                 [](const auto& p, TokenId id) { return p.first < id; });
      if (it != entry.next.end() && it->first == ids[i]) {
        ++it->second;
      } else {
        entry.next.insert(it, {ids[i], 1});
      }
      ++entry.total;
    }
  }
  return model;
}

void NGramModel::rebuild_index() {
  index_.clear();
  for (std::size_t i = 0; i < vocab_.size(); ++i) index_.emplace(vocab_[i], static_cast<TokenId>(i));
}

TokenId NGramModel::token_id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnkId : it->second;
}

TokenSequence NGramModel::tokenize(std::string_view text) const {
  TokenSequence out;
  for (const auto& w : split_words(text)) out.push_back(token_id(w));
  return out;
}

std::string NGramModel::render(std::span<const TokenId> tokens) const {
  std::string out;
  for (TokenId id : tokens) {
    if (id == kBosId || id == kEosId) continue;
    if (!out.empty()) out.push_back(' ');
    out += id < vocab_.size() ? vocab_[id] : kSpecials[kUnkId];
  }
  return out;
}

std::vector<TokenId> NGramModel::context_key(std::span<const TokenId> context) const {
  const std::size_t n = order_ - 1;
  std::vector<TokenId> key(n, kBosId);
  const std::size_t take = std::min(n, context.size());
  std::copy(context.end() - static_cast<std::ptrdiff_t>(take), context.end(),
            key.begin() + static_cast<std::ptrdiff_t>(n - take));
  return key;
}

const NGramModel::ContextCounts* NGramModel::find(std::span<const TokenId> context) const {
  auto it = counts_.find(context_key(context));
  return it == counts_.end() ? nullptr : &it->second;
}

void NGramModel::next_logits(std::span<const TokenId> context, LogitVector& out) const {
  const double floor_logit = std::log(alpha_);
  out.assign(vocab_.size(), floor_logit);
  if (const auto* entry = find(context)) {
    for (const auto& [id, c] : entry->next) out[id] = std::log(static_cast<double>(c) + alpha_);
  }
  out[kBosId] = floor_logit - kBosPenalty;
}

std::uint64_t NGramModel::count(std::span<const TokenId> context, TokenId next) const {
  const auto* entry = find(context);
  if (!entry) return 0;
  auto it = std::lower_bound(entry->next.begin(), entry->next.end(), next,
                             [](const auto& p, TokenId id) { return p.first < id; });
  return (it != entry->next.end() && it->first == next) ? it->second : 0;
}

std::uint64_t NGramModel::context_total(std::span<const TokenId> context) const {
  const auto* entry = find(context);
  return entry ? entry->total : 0;
}

std::string NGramModel::to_json() const {
  json counts = json::object();
  for (const auto& [key, entry] : counts_) {
    json row = json::object();
    for (const auto& [id, c] : entry.next) row[std::to_string(id)] = c;
    counts[format_key(key)] = std::move(row);
  }
  json doc = {{"version", 1},     {"order", order_},         {"alpha", alpha_},
              {"vocab", vocab_},  {"counts", std::move(counts)}};
  return doc.dump();
}

NGramModel NGramModel::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("version").get<int>() != 1) throw ParseError("unsupported model version");
    NGramModel model;
    model.order_ = doc.at("order").get<std::size_t>();
    model.alpha_ = doc.at("alpha").get<double>();
    model.vocab_ = doc.at("vocab").get<std::vector<std::string>>();
    if (model.order_ < 1) throw ParseError("model order must be >= 1");
    if (!(model.alpha_ > 0.0)) throw ParseError("model alpha must be > 0");
    if (model.vocab_.size() < 4) throw ParseError("model vocabulary must have >= 4 entries");
    model.rebuild_index();
    for (const auto& [key, row] : doc.at("counts").items()) {
      auto ids = parse_key(key);
      if (ids.size() != model.order_ - 1) throw ParseError("context key '" + key + "' has wrong length");
      ContextCounts entry;
      for (const auto& [id_str, c] : row.items()) {
        const auto id = static_cast<TokenId>(std::stoul(id_str));
        if (id >= model.vocab_.size()) throw ParseError("token id " + id_str + " out of range");
        const auto n = c.get<std::uint64_t>();
        entry.next.emplace_back(id, n);
        entry.total += n;
      }
      std::sort(entry.next.begin(), entry.next.end());
      model.counts_.emplace(std::move(ids), std::move(entry));
    }
    return model;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file schema error: ") + e.what());
  } catch (const std::logic_error& e) {
    throw ParseError(std::string("model file schema error: ") + e.what());
  }
}

void NGramModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << to_json() << '\n';
}

NGramModel NGramModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

// ---------------------------------------------------------------------------

void SpikeSpec::validate() const {
  if (vocab_size < 2) throw InvalidArgument("spike vocab_size must be >= 2");
  if (m < 1 || m > vocab_size) throw InvalidArgument("spike count m must lie in [1, vocab_size]");
  if (!(tail_logit < spike_logit)) throw InvalidArgument("tail_logit must be below spike_logit");
}

LogitVector synth_logits(const SpikeSpec& spec, RngState& rng, std::vector<TokenId>& spikes) {
  spec.validate();
  LogitVector out(spec.vocab_size, spec.tail_logit);
  std::vector<TokenId> ids(spec.vocab_size);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<TokenId>(i);
  // Partial Fisher-Yates picks m distinct positions.
  for (std::size_t i = 0; i < spec.m; ++i) {
    const std::size_t remaining = spec.vocab_size - i;
    auto j = i + static_cast<std::size_t>(rng.next_unit() * static_cast<double>(remaining));
    if (j >= spec.vocab_size) j = spec.vocab_size - 1;
    std::swap(ids[i], ids[j]);
  }
  spikes.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(spec.m));
  for (TokenId id : spikes) out[id] = spec.spike_logit + rng.next_unit() * 1e-7;
  return out;
}

LogitVector synth_logits(const SpikeSpec& spec, RngState& rng) {
  std::vector<TokenId> spikes;
  return synth_logits(spec, rng, spikes);
}

// ---------------------------------------------------------------------------

std::vector<ReplayRecord> read_replay(std::istream& in) {
  std::vector<ReplayRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      return ParseError("replay line " + std::to_string(line_no) + ": " + why);
    };
    ReplayRecord rec;
    try {
      const json j = json::parse(line);
      rec.step = j.at("step").get<std::int64_t>();
      rec.logits = j.at("logits").get<LogitVector>();
      rec.chosen = j.at("chosen").get<TokenId>();
    } catch (const json::exception& e) {
      throw fail(e.what());
    }
    try {
      require_valid_logits(rec.logits);
    } catch (const InvalidArgument& e) {
      throw fail(e.what());
    }
    if (!records.empty() && rec.logits.size() != records.front().logits.size()) {
      throw fail("logit length " + std::to_string(rec.logits.size()) + " differs from " +
                 std::to_string(records.front().logits.size()));
    }
    if (rec.chosen >= rec.logits.size()) throw fail("chosen id out of range");
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<ReplayRecord> read_replay(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open replay file " + path.string());
  return read_replay(in);
}

void write_replay(std::ostream& out, std::span<const ReplayRecord> records) {
  for (const auto& r : records) {
    out << json{{"step", r.step}, {"logits", r.logits}, {"chosen", r.chosen}}.dump() << '\n';
  }
}

ReplaySource::ReplaySource(std::vector<ReplayRecord> records, std::size_t prompt_len)
    : records_(std::move(records)), prompt_len_(prompt_len) {
  if (records_.empty()) throw InvalidArgument("replay source needs at least one record");
}

std::size_t ReplaySource::vocab_size() const { return records_.front().logits.size(); }

void ReplaySource::next_logits(std::span<const TokenId> context, LogitVector& out) const {
  if (context.size() < prompt_len_ || context.size() - prompt_len_ >= records_.size()) {
    throw InvalidArgument("replay source has no record for position " +
                          std::to_string(context.size()));
  }
  out = records_[context.size() - prompt_len_].logits;
}

}  // namespace ssgmark
