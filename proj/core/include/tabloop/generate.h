#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tabloop/loop_extract.h"
#include "tabloop/token.h"

namespace tabloop {

/// Anything that proposes the next body token given the body generated so
/// far. Implementations draw randomness only from the supplied engine so
/// results are reproducible, and never emit header tokens.
class TokenSource {
 public:
  virtual ~TokenSource() = default;

  virtual Token nextToken(std::span<const Token> context, double temperature,
                          std::mt19937_64& rng) const = 0;

  /// Like nextToken, but the caller will reject tokens of the `banned`
  /// kinds, so sources that can should exclude them from the distribution
  /// up front. The default ignores the hint; the decoder then drops the
  /// rejects, which costs budget in contexts where a banned kind is the
  /// only continuation.
  virtual Token nextTokenAvoiding(std::span<const Token> context,
                                  std::span<const TokenKind> banned,
                                  double temperature, std::mt19937_64& rng) const {
    (void)banned;
    return nextToken(context, temperature, rng);
  }
};

/// One seed note per track, placed at tick zero before the first wait.
struct InstrumentNote {
  std::string track;
  std::string descriptor;
};

/// Rhythm-guitar power chord, bass root and kick drum on A. Used whenever
/// no primer is supplied.
std::vector<InstrumentNote> defaultPrimer();

/// Primer token run: one note-on per entry, then a single wait (omitted
/// when wait_ticks is zero).
std::vector<Token> buildPrimer(const std::vector<InstrumentNote>& notes, Tick wait_ticks);

struct GenerationConstraints {
  int bars = 8;
  TimeSignature time_sig;                   // stamped into the output header
  Tick ticks_per_bar = 0;                   // 0: derived from time_sig
  int tempo_bpm = 120;
  std::vector<InstrumentNote> primer;       // empty: defaultPrimer()
  Tick primer_wait = kTicksPerQuarter / 2;  // eighth note
  std::int64_t max_tokens = 20000;
  std::uint64_t seed = 0;
  double temperature = 1.0;
};

struct GenerationResult {
  TokenStream stream;
  std::int64_t source_tokens = 0;   // tokens requested from the source
  std::int64_t dropped_tokens = 0;  // source bar lines / framing the clock discarded
  Tick truncated_ticks = 0;         // wait ticks clipped at bar lines
};

/// Decodes exactly `bars` bars from the source. The bar clock owns all
/// structure: it emits start, the primer, every new_measure, and replaces
/// the final bar line with end. Source waits are clipped to the current
/// bar line and the excess is discarded; source new_measure/start/end
/// tokens are dropped. Throws Error{kTruncatedBudget} when the source
/// does not fill the request within max_tokens and Error{kSourceFailure}
/// if it emits a header token.
GenerationResult generateConstrained(const TokenSource& source,
                                     const GenerationConstraints& constraints);

struct LoopSearchResult {
  std::optional<Loop> loop;   // empty when no attempt produced one
  int attempts_used = 0;
};

/// Generates pieces until one contains a loop of exactly
/// params.lb_min bars, re-seeding each attempt from constraints.seed +
/// attempt index. Requires params.lb_min == params.lb_max.
LoopSearchResult generateAndExtract(const TokenSource& source,
                                    const GenerationConstraints& constraints,
                                    const ExtractionParams& params, int max_attempts = 8);

}  // namespace tabloop
