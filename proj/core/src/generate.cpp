#include "tabloop/generate.h"

#include <algorithm>
#include <string>

#include "tabloop/error.h"
#include "tabloop/melody.h"

namespace tabloop {

std::vector<InstrumentNote> defaultPrimer() {
  return {
      {"distorted0", "s3:f2"},
      {"bass", "s1:f2"},
      {"drums", "36"},
  };
}

std::vector<Token> buildPrimer(const std::vector<InstrumentNote>& notes, Tick wait_ticks) {
  std::vector<Token> tokens;
  tokens.reserve(notes.size() + 1);
  for (const InstrumentNote& note : notes) {
    tokens.push_back(makeNoteOn(note.track, note.descriptor));
  }
  if (wait_ticks > 0) {
    tokens.push_back(makeWait(wait_ticks));
  }
  return tokens;
}

GenerationResult generateConstrained(const TokenSource& source,
                                     const GenerationConstraints& constraints) {
  if (constraints.bars < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "bar count must be >= 1, got " + std::to_string(constraints.bars));
  }
  if (constraints.max_tokens < 1) {
    throw Error(ErrorCode::kInvalidArgument, "token budget must be >= 1");
  }
  if (constraints.temperature < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  }
  const Tick ticks_per_bar = constraints.ticks_per_bar > 0
                                 ? constraints.ticks_per_bar
                                 : barDuration(constraints.time_sig, kTicksPerQuarter);
  GenerationResult result;
  TokenStream& out = result.stream;
  out.header.push_back(makeHeader("tempo", std::to_string(constraints.tempo_bpm)));
  out.header.push_back(
      makeHeader("time_signature", std::to_string(constraints.time_sig.numerator) + "/" +
                                       std::to_string(constraints.time_sig.denominator)));

  Tick pos = 0;
  Tick bar_end = ticks_per_bar;
  int bars_done = 0;

  auto emitBarLine = [&] {
    ++bars_done;
    out.body.push_back(bars_done == constraints.bars ? makeEnd() : makeNewMeasure());
    bar_end += ticks_per_bar;
  };

  // Clips a source wait to the current bar line; the part past the line
  // is discarded, never carried over.
  auto emitWait = [&](Tick ticks) {
    if (bars_done >= constraints.bars) return;
    const Tick step = std::min(ticks, bar_end - pos);
    if (step > 0) {
      out.body.push_back(makeWait(step));
      pos += step;
    }
    result.truncated_ticks += ticks - step;
    if (pos == bar_end) emitBarLine();
  };

  out.body.push_back(makeStart());
  const std::vector<InstrumentNote>& primer_notes =
      constraints.primer.empty() ? defaultPrimer() : constraints.primer;
  for (const Token& token : buildPrimer(primer_notes, constraints.primer_wait)) {
    if (token.kind == TokenKind::kWait) {
      emitWait(token.wait_ticks);
    } else {
      out.body.push_back(token);
    }
  }

  // The clock owns these; a cooperating source masks them out instead of
  // wasting draws on tokens the decoder would discard.
  static constexpr TokenKind kClockOwned[] = {TokenKind::kNewMeasure, TokenKind::kStart,
                                              TokenKind::kEnd};
  std::mt19937_64 rng(constraints.seed);
  while (bars_done < constraints.bars) {
    if (result.source_tokens >= constraints.max_tokens) {
      throw Error(ErrorCode::kTruncatedBudget,
                  "bar " + std::to_string(bars_done + 1) + " of " +
                      std::to_string(constraints.bars) + " unfinished after " +
                      std::to_string(constraints.max_tokens) + " source tokens");
    }
    const Token token = source.nextTokenAvoiding(std::span<const Token>(out.body),
                                                 std::span<const TokenKind>(kClockOwned),
                                                 constraints.temperature, rng);
    ++result.source_tokens;
    switch (token.kind) {
      case TokenKind::kHeader:
        throw Error(ErrorCode::kSourceFailure,
                    "source emitted header token '" + token.raw + "'");
      case TokenKind::kNewMeasure:
      case TokenKind::kStart:
      case TokenKind::kEnd:
        ++result.dropped_tokens;  // the bar clock owns framing
        break;
      case TokenKind::kWait:
        emitWait(token.wait_ticks);
        break;
      default:
        out.body.push_back(token);
        break;
    }
  }
  return result;
}

LoopSearchResult generateAndExtract(const TokenSource& source,
                                    const GenerationConstraints& constraints,
                                    const ExtractionParams& params, int max_attempts) {
  if (params.lb_min != params.lb_max) {
    throw Error(ErrorCode::kInvalidArgument,
                "loop search needs an exact bar count, got bars " +
                    std::to_string(params.lb_min) + "-" + std::to_string(params.lb_max));
  }
  if (max_attempts < 1) {
    throw Error(ErrorCode::kInvalidArgument, "attempt count must be >= 1");
  }
  LoopSearchResult result;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    ++result.attempts_used;
    GenerationConstraints seeded = constraints;
    seeded.seed = constraints.seed + static_cast<std::uint64_t>(attempt);
    GenerationResult generated = generateConstrained(source, seeded);
    ExtractionResult extraction = extractLoops(generated.stream, params);
    if (!extraction.loops.empty()) {
      result.loop = std::move(extraction.loops.front());
      return result;
    }
  }
  return result;
}

}  // namespace tabloop
