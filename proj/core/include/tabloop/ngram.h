#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tabloop/generate.h"
#include "tabloop/token.h"

namespace tabloop {

/// Count-based n-gram model over token text, the stand-in next-token
/// source for the generation pipeline. Sampling conditions on the longest
/// trained suffix of the context and backs off one token at a time, down
/// to the unigram distribution, so any context has a distribution once
/// anything has been trained.
class NgramModel : public TokenSource {
 public:
  /// `order` is the n in n-gram: contexts hold up to order - 1 tokens.
  explicit NgramModel(int order = 3);

  int order() const { return order_; }
  std::size_t vocabularySize() const { return vocab_.size(); }
  std::int64_t sequencesTrained() const { return sequences_; }

  /// Adds one song body. Header tokens are skipped; an end token is
  /// appended when the body does not finish with one, so every sequence
  /// teaches the model how pieces end.
  void addSequence(const std::vector<Token>& body);
  void addStream(const TokenStream& stream) { addSequence(stream.body); }

  /// Trains on every token file under `dir` in path order. Files that do
  /// not lex are skipped with a warning. Throws Error{kEmptyCorpus} when
  /// nothing trains.
  static NgramModel trainOnCorpus(const std::filesystem::path& dir, int order = 3,
                                  std::vector<std::string>* warnings = nullptr);

  /// P(token | context) under the distribution nextToken samples at
  /// temperature 1: relative counts after the longest trained suffix of
  /// `context`. Zero for tokens unseen in that position.
  double probability(std::span<const Token> context, const Token& token) const;

  /// Samples from the back-off distribution. Temperature reshapes the
  /// count weights (count^(1/t)); below 1e-6 it degenerates to argmax
  /// with ties broken by token text. Throws Error{kEmptyCorpus} on an
  /// untrained model.
  Token nextToken(std::span<const Token> context, double temperature,
                  std::mt19937_64& rng) const override;

  /// Masks the banned kinds out of the distribution, backing off further
  /// when masking leaves a context empty. Throws Error{kSourceFailure}
  /// when even the unigram distribution is all banned.
  Token nextTokenAvoiding(std::span<const Token> context,
                          std::span<const TokenKind> banned, double temperature,
                          std::mt19937_64& rng) const override;

  /// Versioned JSON snapshot; identical training yields identical bytes.
  void save(const std::filesystem::path& path) const;
  static NgramModel load(const std::filesystem::path& path);

 private:
  struct ContextCounts {
    std::int64_t total = 0;
    std::map<std::int32_t, std::int64_t> counts;  // token id -> occurrences
  };

  std::int32_t internToken(const Token& token);
  const ContextCounts* longestContext(std::span<const Token> context) const;
  Token sampleFrom(const std::vector<std::pair<std::int32_t, std::int64_t>>& entries,
                   double temperature, std::mt19937_64& rng) const;

  int order_;
  std::int64_t sequences_ = 0;
  std::vector<Token> vocab_;                            // id -> token
  std::unordered_map<std::string, std::int32_t> ids_;   // raw text -> id
  std::unordered_map<std::string, ContextCounts> contexts_;  // id-list key
};

}  // namespace tabloop
