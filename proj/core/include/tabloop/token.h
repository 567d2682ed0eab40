#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tabloop {

/// Musical time in ticks. All durations use a fixed resolution of
/// kTicksPerQuarter ticks per quarter note (the GuitarPro convention the
/// token files are encoded against).
using Tick = std::int64_t;

inline constexpr Tick kTicksPerQuarter = 960;

enum class TokenKind {
  kHeader,       // artist:/album:/title:/tempo:/downtune:/time_signature:/instrument:
  kNoteOn,       // <track>:note:<descriptor>, e.g. distorted0:note:s3:f5
  kWait,         // wait:<ticks>, advances musical time
  kNewMeasure,   // new_measure
  kRepeatOpen,   // repeat_open
  kRepeatClose,  // repeat_close or repeat_close:<count>
  kStart,        // start
  kEnd,          // end
  kEffect,       // nfx:* / bfx:* expressive-performance tokens
  kUnknown,      // anything else, preserved verbatim
};

const char* tokenKindName(TokenKind kind);

/// One lexical unit of the tablature token language. `kind` and the parsed
/// fields are a pure function of `raw`; two tokens are equal iff their raw
/// texts are equal.
struct Token {
  std::string raw;
  TokenKind kind = TokenKind::kUnknown;

  Tick wait_ticks = 0;                     // kWait only, always >= 1
  std::string track;                       // kNoteOn only
  std::string descriptor;                  // kNoteOn only
  std::optional<int> repeat_count;         // kRepeatClose only, >= 2 when present

  bool operator==(const Token& other) const { return raw == other.raw; }
  bool operator!=(const Token& other) const { return raw != other.raw; }
};

/// Lexes a single whitespace-free unit. Throws Error{kMalformedWait} for
/// wait tokens whose payload is not an integer >= 1 (e.g. "wait:0",
/// "wait:abc"). Every other unit maps to exactly one kind; unrecognized
/// units come back as kUnknown with the text preserved.
Token lexToken(std::string_view text);

/// Kind of a unit without building the Token. Same error behavior as
/// lexToken.
TokenKind classifyToken(std::string_view text);

// Token factories for the kinds the toolkit emits itself.
Token makeWait(Tick ticks);
Token makeNoteOn(std::string_view track, std::string_view descriptor);
Token makeNewMeasure();
Token makeRepeatOpen();
Token makeRepeatClose();
Token makeStart();
Token makeEnd();
Token makeHeader(std::string_view key, std::string_view value);

/// A lexed token file: a run of leading header tokens (artist, tempo,
/// downtune, time signature, instruments) followed by the body. In a
/// well-formed stream no kHeader token appears after the first body token;
/// the lexer flags violations instead of rewriting them.
struct TokenStream {
  std::vector<Token> header;
  std::vector<Token> body;

  /// Sum of wait ticks in the body.
  Tick totalTicks() const;
};

/// Splits on any whitespace (the dataset convention is one token per line)
/// and lexes every unit. Throws Error{kEmptyInput} when no units are found
/// and Error{kMalformedWait} as per lexToken. Structural anomalies such as
/// header tokens appearing mid-body are appended to `warnings` when given.
TokenStream tokenize(std::string_view text,
                     std::vector<std::string>* warnings = nullptr);

/// Newline-separated text, header first, one token per line, trailing
/// newline. tokenize(render(s)) == s for every valid stream.
std::string render(const TokenStream& stream);

/// Renders a token span only (no header), one per line.
std::string renderTokens(const std::vector<Token>& tokens);

struct TimeSignature {
  int numerator = 4;
  int denominator = 4;

  bool operator==(const TimeSignature&) const = default;
};

/// Parses "time_signature:<num>/<den>"; empty for any other token.
std::optional<TimeSignature> parseTimeSignature(const Token& token);

/// Parses "tempo:<bpm>"; empty for any other token.
std::optional<double> parseTempo(const Token& token);

}  // namespace tabloop
