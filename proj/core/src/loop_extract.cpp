#include "tabloop/loop_extract.h"

#include <algorithm>
#include <tuple>
#include <unordered_set>

#include "tabloop/error.h"

namespace tabloop {
namespace {

// Index of the first event with onset >= tick. Works for tick == total
// duration, returning length().
std::int32_t eventIndexAt(const MelodyLine& melody, Tick tick) {
  auto it = std::lower_bound(
      melody.events.begin(), melody.events.end(), tick,
      [](const NoteSet& event, Tick t) { return event.onset < t; });
  return static_cast<std::int32_t>(it - melody.events.begin());
}

}  // namespace

const char* loopSourceName(LoopSource source) {
  return source == LoopSource::kExtracted ? "extracted" : "builtin";
}

std::vector<CandidatePair> findCandidates(const CorrMatrices& matrices, int l_min) {
  if (l_min < 1) throw Error(ErrorCode::kInvalidArgument, "l_min must be >= 1");
  std::vector<CandidatePair> candidates;
  for (const DiagonalRun& run : matrices.runs()) {
    if (run.length < l_min) continue;
    // Restarting a candidate every `diag` cells anchors one pair per
    // occurrence of the repeating phrase, not just the first.
    for (std::int32_t offset = 0; run.length - offset >= l_min; offset += run.diag) {
      CandidatePair candidate;
      candidate.s_i = run.row + offset;
      candidate.s_j = run.row + offset + run.diag;
      candidate.n_end = run.length - offset;
      candidate.d_ticks = matrices.durationSum(candidate.s_i, candidate.n_end);
      candidates.push_back(candidate);
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const CandidatePair& a, const CandidatePair& b) {
              return std::make_pair(a.s_i, a.s_j) < std::make_pair(b.s_i, b.s_j);
            });
  return candidates;
}

BookendExtent bookendExtent(const CorrMatrices& matrices, const CandidatePair& candidate) {
  const DiagonalRun* run = matrices.runContaining(candidate.s_i, candidate.s_j - candidate.s_i);
  if (run == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "candidate does not lie on a run");
  }
  BookendExtent extent;
  extent.n_end = run->row + run->length - candidate.s_i;
  extent.d_ticks = matrices.durationSum(candidate.s_i, extent.n_end);
  return extent;
}

double noteDensity(std::int64_t event_count, int track_count, std::int64_t bars,
                   DensityMode mode) {
  if (bars < 1) throw Error(ErrorCode::kInvalidArgument, "bars must be >= 1");
  if (track_count < 1) throw Error(ErrorCode::kInvalidArgument, "tracks must be >= 1");
  if (mode == DensityMode::kLiteral) {
    return static_cast<double>(event_count) * track_count / bars;
  }
  return static_cast<double>(event_count) / (static_cast<double>(track_count) * bars);
}

std::vector<LoopCandidate> filterCandidates(const std::vector<CandidatePair>& candidates,
                                            const ExtractionParams& params,
                                            const MelodyLine& melody) {
  std::vector<LoopCandidate> kept;
  const Tick beat_ticks = melody.ppq;
  for (const CandidatePair& candidate : candidates) {
    const Tick start_tick = melody.events[candidate.s_i].onset;
    const Tick end_tick = melody.events[candidate.s_j].onset;
    const Tick body_ticks = end_tick - start_tick;
    if (body_ticks <= 0) continue;

    const Rational bars = melody.bar_map.barsBetween(start_tick, body_ticks);
    if (!bars.isInteger()) continue;
    if (bars.num < params.lb_min || bars.num > params.lb_max) continue;

    if (static_cast<double>(candidate.d_ticks) <
        params.rd_min * static_cast<double>(beat_ticks)) {
      continue;
    }

    const std::int64_t body_events = candidate.s_j - candidate.s_i;
    const double density =
        noteDensity(body_events, melody.track_count, bars.num, params.density_mode);
    if (density < params.rho_min) continue;

    LoopCandidate loop;
    loop.s_i = candidate.s_i;
    loop.s_j = candidate.s_j;
    loop.n_end = candidate.n_end;
    loop.d_ticks = candidate.d_ticks;
    loop.start_tick = start_tick;
    loop.end_tick = end_tick;
    loop.body_ticks = body_ticks;
    loop.body_bars = bars.num;
    loop.body_events = body_events;
    loop.density = density;
    loop.source = LoopSource::kExtracted;
    kept.push_back(loop);
  }
  return kept;
}

BuiltinScan findBuiltinLoops(const TokenStream& stream, const MelodyLine& melody,
                             const ExtractionParams& params) {
  BuiltinScan scan;

  struct Span {
    Tick open = 0;
    Tick close = 0;
  };
  std::vector<Tick> open_stack;
  std::vector<Span> spans;
  Tick cursor = 0;
  for (const Token& token : stream.body) {
    switch (token.kind) {
      case TokenKind::kWait:
        cursor += token.wait_ticks;
        break;
      case TokenKind::kRepeatOpen:
        open_stack.push_back(cursor);
        break;
      case TokenKind::kRepeatClose:
        if (open_stack.empty()) {
          scan.warnings.push_back("repeat_close without repeat_open at tick " +
                                  std::to_string(cursor) + ", skipped");
          break;
        }
        spans.push_back(Span{open_stack.back(), cursor});
        open_stack.pop_back();
        break;
      default:
        break;
    }
  }
  for (Tick open : open_stack) {
    scan.warnings.push_back("repeat_open without repeat_close at tick " +
                            std::to_string(open) + ", skipped");
  }
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
    return std::make_pair(a.open, a.close) < std::make_pair(b.open, b.close);
  });

  for (const Span& span : spans) {
    const Tick body_ticks = span.close - span.open;
    if (body_ticks <= 0) continue;
    const Rational bars = melody.bar_map.barsBetween(span.open, body_ticks);
    if (!bars.isInteger()) continue;
    if (bars.num < params.lb_min || bars.num > params.lb_max) continue;

    const std::int32_t s_i = eventIndexAt(melody, span.open);
    const std::int32_t s_j = eventIndexAt(melody, span.close);
    const std::int64_t body_events = s_j - s_i;
    const double density =
        noteDensity(body_events, melody.track_count, bars.num, params.density_mode);
    if (density < params.rho_min) continue;

    LoopCandidate loop;
    loop.s_i = s_i;
    loop.s_j = s_j;
    loop.start_tick = span.open;
    loop.end_tick = span.close;
    loop.body_ticks = body_ticks;
    loop.body_bars = bars.num;
    loop.body_events = body_events;
    loop.density = density;
    loop.source = LoopSource::kBuiltIn;
    scan.candidates.push_back(loop);
  }
  return scan;
}

BuiltinScan findBuiltinLoops(const TokenStream& stream, const ExtractionParams& params) {
  return findBuiltinLoops(stream, buildMelodyLine(stream), params);
}

TokenStream sliceStream(const TokenStream& song, Tick begin_tick, Tick end_tick) {
  TokenStream slice;
  slice.header = song.header;
  Tick cursor = 0;
  for (const Token& token : song.body) {
    const Tick token_tick = cursor;
    if (token.kind == TokenKind::kWait) cursor += token.wait_ticks;
    if (token_tick >= end_tick) break;
    if (token_tick >= begin_tick) slice.body.push_back(token);
  }
  return slice;
}

std::vector<LoopCandidate> selectLoops(const TokenStream& song, const MelodyLine& melody,
                                       const CorrMatrices& matrices,
                                       const ExtractionParams& params,
                                       std::vector<std::string>* warnings) {
  std::vector<LoopCandidate> all =
      filterCandidates(findCandidates(matrices, params.l_min), params, melody);
  BuiltinScan builtin = findBuiltinLoops(song, melody, params);
  if (warnings != nullptr) {
    for (std::string& warning : builtin.warnings) {
      warnings->push_back(std::move(warning));
    }
  }
  for (const LoopCandidate& candidate : builtin.candidates) {
    all.push_back(candidate);
  }

  // Earliest span first; extracted wins ties so duplicates collapse
  // deterministically.
  std::sort(all.begin(), all.end(), [](const LoopCandidate& a, const LoopCandidate& b) {
    return std::make_tuple(a.start_tick, a.end_tick, a.source == LoopSource::kBuiltIn) <
           std::make_tuple(b.start_tick, b.end_tick, b.source == LoopSource::kBuiltIn);
  });

  std::vector<LoopCandidate> selected;
  std::unordered_set<std::string> seen_bodies;
  for (const LoopCandidate& candidate : all) {
    const TokenStream slice = sliceStream(song, candidate.start_tick, candidate.end_tick);
    if (!seen_bodies.insert(renderTokens(slice.body)).second) continue;
    selected.push_back(candidate);
  }
  return selected;
}

ExtractionResult extractLoops(const TokenStream& song, const ExtractionParams& params) {
  ExtractionResult result;
  MelodyLine melody = buildMelodyLine(song);
  result.warnings = melody.warnings;

  const CorrMatrices matrices =
      melody.length() >= 2 ? buildCorrelation(melody) : CorrMatrices{};
  for (const LoopCandidate& candidate :
       selectLoops(song, melody, matrices, params, &result.warnings)) {
    TokenStream stream = sliceStream(song, candidate.start_tick, candidate.end_tick);
    result.loops.push_back(Loop{std::move(stream), candidate});
  }
  return result;
}

}  // namespace tabloop
