#include "tabloop/token.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

#include "tabloop/error.h"

namespace tabloop {
namespace {

constexpr std::array<std::string_view, 7> kHeaderPrefixes = {
    "artist:",  "album:",    "title:",          "tempo:",
    "downtune:", "instrument:", "time_signature:",
};

bool parseInt64(std::string_view text, std::int64_t* out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, *out);
  return ec == std::errc() && ptr == last;
}

bool hasPrefix(std::string_view text, std::string_view prefix) {
  return text.substr(0, prefix.size()) == prefix;
}

}  // namespace

const char* tokenKindName(TokenKind kind) {
  switch (kind) {
    case TokenKind::kHeader: return "Header";
    case TokenKind::kNoteOn: return "NoteOn";
    case TokenKind::kWait: return "Wait";
    case TokenKind::kNewMeasure: return "NewMeasure";
    case TokenKind::kRepeatOpen: return "RepeatOpen";
    case TokenKind::kRepeatClose: return "RepeatClose";
    case TokenKind::kStart: return "Start";
    case TokenKind::kEnd: return "End";
    case TokenKind::kEffect: return "Effect";
    case TokenKind::kUnknown: return "Unknown";
  }
  return "Unknown";
}

// Grammar precedence: exact structural words, then wait:, then header
// prefixes, then <track>:note:<descriptor>, then effect prefixes. A unit
// matching none of these is kUnknown and carried verbatim.
Token lexToken(std::string_view text) {
  Token token;
  token.raw = std::string(text);

  if (text == "start") {
    token.kind = TokenKind::kStart;
    return token;
  }
  if (text == "end") {
    token.kind = TokenKind::kEnd;
    return token;
  }
  if (text == "new_measure") {
    token.kind = TokenKind::kNewMeasure;
    return token;
  }
  if (text == "repeat_open") {
    token.kind = TokenKind::kRepeatOpen;
    return token;
  }
  if (text == "repeat_close") {
    token.kind = TokenKind::kRepeatClose;
    return token;
  }
  if (hasPrefix(text, "repeat_close:")) {
    std::int64_t count = 0;
    if (parseInt64(text.substr(13), &count) && count >= 2 && count <= 1 << 20) {
      token.kind = TokenKind::kRepeatClose;
      token.repeat_count = static_cast<int>(count);
    }
    return token;  // bad count stays kUnknown
  }
  if (hasPrefix(text, "wait:")) {
    std::int64_t ticks = 0;
    if (!parseInt64(text.substr(5), &ticks) || ticks < 1) {
      throw Error(ErrorCode::kMalformedWait, "bad wait token '" + token.raw + "'");
    }
    token.kind = TokenKind::kWait;
    token.wait_ticks = ticks;
    return token;
  }
  for (std::string_view prefix : kHeaderPrefixes) {
    if (hasPrefix(text, prefix)) {
      token.kind = TokenKind::kHeader;
      return token;
    }
  }
  const std::size_t note_pos = text.find(":note:");
  if (note_pos != std::string_view::npos && note_pos > 0 &&
      note_pos + 6 < text.size()) {
    token.kind = TokenKind::kNoteOn;
    token.track = std::string(text.substr(0, note_pos));
    token.descriptor = std::string(text.substr(note_pos + 6));
    return token;
  }
  if (hasPrefix(text, "nfx:") || hasPrefix(text, "bfx:")) {
    token.kind = TokenKind::kEffect;
    return token;
  }
  return token;
}

TokenKind classifyToken(std::string_view text) { return lexToken(text).kind; }

Token makeWait(Tick ticks) { return lexToken("wait:" + std::to_string(ticks)); }

Token makeNoteOn(std::string_view track, std::string_view descriptor) {
  std::string raw;
  raw.reserve(track.size() + descriptor.size() + 6);
  raw.append(track).append(":note:").append(descriptor);
  return lexToken(raw);
}

Token makeNewMeasure() { return lexToken("new_measure"); }
Token makeRepeatOpen() { return lexToken("repeat_open"); }
Token makeRepeatClose() { return lexToken("repeat_close"); }
Token makeStart() { return lexToken("start"); }
Token makeEnd() { return lexToken("end"); }

Token makeHeader(std::string_view key, std::string_view value) {
  std::string raw;
  raw.reserve(key.size() + value.size() + 1);
  raw.append(key).append(":").append(value);
  return lexToken(raw);
}

Tick TokenStream::totalTicks() const {
  Tick total = 0;
  for (const Token& token : body) {
    if (token.kind == TokenKind::kWait) total += token.wait_ticks;
  }
  return total;
}

TokenStream tokenize(std::string_view text,
                     std::vector<std::string>* warnings) {
  TokenStream stream;
  bool in_header = true;
  bool any = false;

  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() &&
           std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
    }
    if (pos >= text.size()) break;
    std::size_t end = pos;
    while (end < text.size() &&
           !std::isspace(static_cast<unsigned char>(text[end]))) {
      ++end;
    }
    Token token = lexToken(text.substr(pos, end - pos));
    pos = end;
    any = true;

    if (in_header && token.kind == TokenKind::kHeader) {
      stream.header.push_back(std::move(token));
      continue;
    }
    in_header = false;
    if (token.kind == TokenKind::kHeader && warnings != nullptr) {
      warnings->push_back("header token '" + token.raw +
                          "' after body start");
    }
    stream.body.push_back(std::move(token));
  }

  if (!any) {
    throw Error(ErrorCode::kEmptyInput, "no tokens in input");
  }
  return stream;
}

std::string render(const TokenStream& stream) {
  std::string out;
  std::size_t bytes = 0;
  for (const Token& token : stream.header) bytes += token.raw.size() + 1;
  for (const Token& token : stream.body) bytes += token.raw.size() + 1;
  out.reserve(bytes);
  for (const Token& token : stream.header) {
    out.append(token.raw);
    out.push_back('\n');
  }
  for (const Token& token : stream.body) {
    out.append(token.raw);
    out.push_back('\n');
  }
  return out;
}

std::string renderTokens(const std::vector<Token>& tokens) {
  std::string out;
  for (const Token& token : tokens) {
    out.append(token.raw);
    out.push_back('\n');
  }
  return out;
}

std::optional<TimeSignature> parseTimeSignature(const Token& token) {
  constexpr std::string_view kPrefix = "time_signature:";
  if (token.kind != TokenKind::kHeader ||
      token.raw.compare(0, kPrefix.size(), kPrefix) != 0) {
    return std::nullopt;
  }
  std::string_view payload = std::string_view(token.raw).substr(kPrefix.size());
  const std::size_t slash = payload.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  std::int64_t num = 0;
  std::int64_t den = 0;
  if (!parseInt64(payload.substr(0, slash), &num) ||
      !parseInt64(payload.substr(slash + 1), &den) || num < 1 || den < 1) {
    return std::nullopt;
  }
  return TimeSignature{static_cast<int>(num), static_cast<int>(den)};
}

std::optional<double> parseTempo(const Token& token) {
  constexpr std::string_view kPrefix = "tempo:";
  if (token.kind != TokenKind::kHeader ||
      token.raw.compare(0, kPrefix.size(), kPrefix) != 0) {
    return std::nullopt;
  }
  const std::string payload = token.raw.substr(kPrefix.size());
  try {
    std::size_t consumed = 0;
    const double bpm = std::stod(payload, &consumed);
    if (consumed != payload.size() || bpm <= 0.0) return std::nullopt;
    return bpm;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace tabloop
