#include "tabloop/ngram.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "tabloop/corpus_io.h"
#include "tabloop/error.h"

namespace tabloop {
namespace {

constexpr const char* kFormatName = "tabloop-ngram";
constexpr int kFormatVersion = 1;

std::string keyFor(std::span<const std::int32_t> ids) {
  std::string key;
  for (std::int32_t id : ids) {
    key += std::to_string(id);
    key += ',';
  }
  return key;
}

// Uniform in [0, 1) from the top 53 bits, so sampling depends only on the
// engine's well-defined output sequence.
double nextUnit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

NgramModel::NgramModel(int order) : order_(order) {
  if (order < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "model order must be >= 1, got " + std::to_string(order));
  }
}

std::int32_t NgramModel::internToken(const Token& token) {
  auto [it, inserted] = ids_.emplace(token.raw, static_cast<std::int32_t>(vocab_.size()));
  if (inserted) vocab_.push_back(token);
  return it->second;
}

void NgramModel::addSequence(const std::vector<Token>& body) {
  std::vector<std::int32_t> ids;
  ids.reserve(body.size() + 1);
  for (const Token& token : body) {
    if (token.kind == TokenKind::kHeader) continue;
    ids.push_back(internToken(token));
  }
  if (ids.empty()) return;
  if (vocab_[static_cast<std::size_t>(ids.back())].kind != TokenKind::kEnd) {
    ids.push_back(internToken(makeEnd()));
  }
  ++sequences_;
  const auto n = static_cast<std::int64_t>(ids.size());
  for (std::int64_t t = 0; t < n; ++t) {
    const std::int64_t max_context = std::min<std::int64_t>(order_ - 1, t);
    for (std::int64_t c = 0; c <= max_context; ++c) {
      ContextCounts& bucket =
          contexts_[keyFor(std::span(ids).subspan(static_cast<std::size_t>(t - c),
                                                  static_cast<std::size_t>(c)))];
      ++bucket.total;
      ++bucket.counts[ids[static_cast<std::size_t>(t)]];
    }
  }
}

NgramModel NgramModel::trainOnCorpus(const std::filesystem::path& dir, int order,
                                     std::vector<std::string>* warnings) {
  NgramModel model(order);
  for (const auto& path : listTokenFiles(dir)) {
    try {
      model.addStream(readTokenFile(path));
    } catch (const Error& error) {
      if (warnings != nullptr) {
        warnings->push_back("skipped " + path.string() + ": " + error.what());
      }
    }
  }
  if (model.sequences_ == 0) {
    throw Error(ErrorCode::kEmptyCorpus, "no trainable token files under " + dir.string());
  }
  return model;
}

const NgramModel::ContextCounts* NgramModel::longestContext(
    std::span<const Token> context) const {
  const std::size_t longest =
      std::min<std::size_t>(static_cast<std::size_t>(order_ - 1), context.size());
  std::vector<std::int32_t> suffix_ids;
  suffix_ids.reserve(longest);
  std::size_t known = 0;  // suffix length where every token is in-vocabulary
  for (std::size_t back = 1; back <= longest; ++back) {
    auto it = ids_.find(context[context.size() - back].raw);
    if (it == ids_.end()) break;
    suffix_ids.push_back(it->second);
    known = back;
  }
  std::reverse(suffix_ids.begin(), suffix_ids.end());
  for (std::size_t len = known;; --len) {
    const std::size_t drop = known - len;
    auto it = contexts_.find(keyFor(std::span(suffix_ids).subspan(drop)));
    if (it != contexts_.end()) return &it->second;
    if (len == 0) break;
  }
  return nullptr;
}

double NgramModel::probability(std::span<const Token> context, const Token& token) const {
  const ContextCounts* bucket = longestContext(context);
  if (bucket == nullptr) return 0.0;
  auto id = ids_.find(token.raw);
  if (id == ids_.end()) return 0.0;
  auto count = bucket->counts.find(id->second);
  if (count == bucket->counts.end()) return 0.0;
  return static_cast<double>(count->second) / static_cast<double>(bucket->total);
}

Token NgramModel::sampleFrom(const std::vector<std::pair<std::int32_t, std::int64_t>>& entries,
                             double temperature, std::mt19937_64& rng) const {
  if (temperature < 1e-6) {
    std::int32_t best_id = entries.front().first;
    std::int64_t best_count = entries.front().second;
    for (const auto& [id, count] : entries) {
      if (count > best_count ||
          (count == best_count && vocab_[static_cast<std::size_t>(id)].raw <
                                      vocab_[static_cast<std::size_t>(best_id)].raw)) {
        best_id = id;
        best_count = count;
      }
    }
    return vocab_[static_cast<std::size_t>(best_id)];
  }

  std::vector<double> weights;
  weights.reserve(entries.size());
  double total = 0.0;
  for (const auto& [id, count] : entries) {
    const double weight =
        temperature == 1.0 ? static_cast<double>(count)
                           : std::exp(std::log(static_cast<double>(count)) / temperature);
    weights.push_back(weight);
    total += weight;
  }
  const double target = nextUnit(rng) * total;
  double cumulative = 0.0;
  for (std::size_t index = 0; index < entries.size(); ++index) {
    cumulative += weights[index];
    if (target < cumulative || index + 1 == entries.size()) {
      return vocab_[static_cast<std::size_t>(entries[index].first)];
    }
  }
  return vocab_[static_cast<std::size_t>(entries.back().first)];
}

Token NgramModel::nextToken(std::span<const Token> context, double temperature,
                            std::mt19937_64& rng) const {
  return nextTokenAvoiding(context, {}, temperature, rng);
}

Token NgramModel::nextTokenAvoiding(std::span<const Token> context,
                                    std::span<const TokenKind> banned, double temperature,
                                    std::mt19937_64& rng) const {
  if (contexts_.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "sampling from an untrained model");
  }
  const auto is_banned = [&](std::int32_t id) {
    const TokenKind kind = vocab_[static_cast<std::size_t>(id)].kind;
    return std::find(banned.begin(), banned.end(), kind) != banned.end();
  };

  const std::size_t longest =
      std::min<std::size_t>(static_cast<std::size_t>(order_ - 1), context.size());
  std::vector<std::int32_t> suffix_ids;
  suffix_ids.reserve(longest);
  std::size_t known = 0;  // suffix length where every token is in-vocabulary
  for (std::size_t back = 1; back <= longest; ++back) {
    auto it = ids_.find(context[context.size() - back].raw);
    if (it == ids_.end()) break;
    suffix_ids.push_back(it->second);
    known = back;
  }
  std::reverse(suffix_ids.begin(), suffix_ids.end());

  std::vector<std::pair<std::int32_t, std::int64_t>> entries;
  for (std::size_t len = known;; --len) {
    const std::size_t drop = known - len;
    auto it = contexts_.find(keyFor(std::span(suffix_ids).subspan(drop)));
    if (it != contexts_.end()) {
      entries.clear();
      for (const auto& [id, count] : it->second.counts) {
        if (!is_banned(id)) entries.emplace_back(id, count);
      }
      if (!entries.empty()) return sampleFrom(entries, temperature, rng);
    }
    if (len == 0) break;
  }
  throw Error(ErrorCode::kSourceFailure, "every candidate token is banned");
}

void NgramModel::save(const std::filesystem::path& path) const {
  nlohmann::json vocab = nlohmann::json::array();
  for (const Token& token : vocab_) {
    vocab.push_back(token.raw);
  }

  std::vector<std::string> keys;
  keys.reserve(contexts_.size());
  for (const auto& [key, bucket] : contexts_) {
    keys.push_back(key);
  }
  std::sort(keys.begin(), keys.end());

  nlohmann::json contexts = nlohmann::json::array();
  for (const std::string& key : keys) {
    const ContextCounts& bucket = contexts_.at(key);
    nlohmann::json counts = nlohmann::json::array();
    for (const auto& [id, count] : bucket.counts) {
      counts.push_back(nlohmann::json::array({id, count}));
    }
    contexts.push_back(nlohmann::json{{"key", key}, {"counts", std::move(counts)}});
  }

  nlohmann::json doc{
      {"format", kFormatName},
      {"version", kFormatVersion},
      {"order", order_},
      {"sequences", sequences_},
      {"vocab", std::move(vocab)},
      {"contexts", std::move(contexts)},
  };
  writeTextFile(path, doc.dump(2) + "\n");
}

NgramModel NgramModel::load(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(readTextFile(path));
  } catch (const nlohmann::json::exception& error) {
    throw Error(ErrorCode::kInvalidArgument,
                path.string() + " is not a model file: " + error.what());
  }
  if (!doc.is_object() || doc.value("format", "") != kFormatName) {
    throw Error(ErrorCode::kInvalidArgument, path.string() + " is not a model file");
  }
  if (doc.value("version", 0) != kFormatVersion) {
    throw Error(ErrorCode::kInvalidArgument,
                path.string() + ": unsupported model version");
  }

  try {
    NgramModel model(doc.at("order").get<int>());
    model.sequences_ = doc.at("sequences").get<std::int64_t>();
    for (const auto& raw : doc.at("vocab")) {
      model.internToken(lexToken(raw.get<std::string>()));
    }
    for (const auto& entry : doc.at("contexts")) {
      ContextCounts& bucket = model.contexts_[entry.at("key").get<std::string>()];
      for (const auto& pair : entry.at("counts")) {
        const auto id = pair.at(0).get<std::int32_t>();
        const auto count = pair.at(1).get<std::int64_t>();
        if (id < 0 || static_cast<std::size_t>(id) >= model.vocab_.size()) {
          throw Error(ErrorCode::kInvalidArgument,
                      path.string() + ": token id out of range");
        }
        bucket.counts[id] = count;
        bucket.total += count;
      }
    }
    return model;
  } catch (const nlohmann::json::exception& error) {
    throw Error(ErrorCode::kInvalidArgument,
                path.string() + " is not a model file: " + error.what());
  }
}

}  // namespace tabloop
