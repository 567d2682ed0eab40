#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tabloop/correlation.h"
#include "tabloop/melody.h"
#include "tabloop/token.h"

namespace tabloop {

enum class DensityMode {
  kLiteral,   // events * tracks / bars
  kPerTrack,  // events / (tracks * bars), alternative normalization
};

/// Extraction thresholds. Defaults are the toolkit's reference settings
/// (loops of 4-8 whole bars, density >= 3, bookends of >= 4 events and
/// >= 2 beats).
struct ExtractionParams {
  int l_min = 4;          // minimum bookend events
  double rd_min = 2.0;    // minimum bookend beats (quarter notes)
  int lb_min = 4;         // minimum loop bars
  int lb_max = 8;         // maximum loop bars
  double rho_min = 3.0;   // minimum note density
  DensityMode density_mode = DensityMode::kLiteral;
};

/// A repetition found in the match matrix: the phrase starting at event
/// s_i recurs at event s_j. The matched stretch ("bookend") runs n_end
/// events and d_ticks ticks from each start; the prospective loop body is
/// the half-open event range [s_i, s_j).
struct CandidatePair {
  std::int32_t s_i = 0;
  std::int32_t s_j = 0;
  std::int32_t n_end = 0;
  Tick d_ticks = 0;
};

struct BookendExtent {
  std::int32_t n_end = 0;
  Tick d_ticks = 0;
};

enum class LoopSource { kExtracted, kBuiltIn };

const char* loopSourceName(LoopSource source);

/// A loop that survived filtering, with everything needed to report or
/// materialize it.
struct LoopCandidate {
  std::int32_t s_i = 0;
  std::int32_t s_j = 0;
  std::int32_t n_end = 0;        // zero for built-in loops
  Tick d_ticks = 0;              // zero for built-in loops
  Tick start_tick = 0;
  Tick end_tick = 0;
  Tick body_ticks = 0;
  std::int64_t body_bars = 0;
  std::int64_t body_events = 0;
  double density = 0.0;
  LoopSource source = LoopSource::kExtracted;
};

/// Enumerates repetition start pairs from the run store. Each run of
/// length l on diagonal k yields one pair per whole-k offset while at
/// least l_min matches remain, so a phrase repeated m times contiguously
/// produces a pair for every ordered pair of its occurrences that the
/// run geometry can anchor.
std::vector<CandidatePair> findCandidates(const CorrMatrices& matrices, int l_min);

/// Recomputes the bookend extent of a candidate from the matrices by
/// walking its diagonal until the match count drops (the value carried on
/// CandidatePair is this, cached).
BookendExtent bookendExtent(const CorrMatrices& matrices, const CandidatePair& candidate);

/// Note density: body event count scaled by track count over bars.
double noteDensity(std::int64_t event_count, int track_count, std::int64_t bars,
                   DensityMode mode = DensityMode::kLiteral);

/// Applies the whole-bar, bookend-beats and density filters and fills in
/// the LoopCandidate fields for survivors.
std::vector<LoopCandidate> filterCandidates(const std::vector<CandidatePair>& candidates,
                                            const ExtractionParams& params,
                                            const MelodyLine& melody);

struct BuiltinScan {
  std::vector<LoopCandidate> candidates;
  std::vector<std::string> warnings;
};

/// Finds loops delimited by explicit repeat signs. Every balanced
/// open/close pair (nested pairs included) whose span is a whole bar count
/// within [lb_min, lb_max] and passes the density filter becomes a
/// candidate. Unbalanced signs produce a warning, never an error.
BuiltinScan findBuiltinLoops(const TokenStream& stream, const MelodyLine& melody,
                             const ExtractionParams& params);
BuiltinScan findBuiltinLoops(const TokenStream& stream, const ExtractionParams& params);

/// The filtered, merged and deduplicated loop list for one song: matrix
/// candidates plus built-in loops, sorted by span, loops with
/// byte-identical body text collapsed to the earliest occurrence.
/// This is the selection extractLoops materializes; callers that only
/// need counts or metadata can stop here.
std::vector<LoopCandidate> selectLoops(const TokenStream& song, const MelodyLine& melody,
                                       const CorrMatrices& matrices,
                                       const ExtractionParams& params,
                                       std::vector<std::string>* warnings = nullptr);

struct Loop {
  TokenStream stream;  // song header plus the body slice
  LoopCandidate candidate;
};

struct ExtractionResult {
  std::vector<Loop> loops;
  std::vector<std::string> warnings;
};

/// Body tokens covering [begin_tick, end_tick), with the song header
/// carried over. Slice boundaries must fall on wait-token boundaries,
/// which holds for any event onset.
TokenStream sliceStream(const TokenStream& song, Tick begin_tick, Tick end_tick);

/// Full per-song pipeline: correlation loops plus built-in loops, loops
/// with byte-identical body text deduplicated to the earliest occurrence,
/// each survivor materialized as a standalone stream.
ExtractionResult extractLoops(const TokenStream& song, const ExtractionParams& params);

}  // namespace tabloop
