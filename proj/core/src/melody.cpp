#include "tabloop/melody.h"

#include <algorithm>
#include <numeric>
#include <set>

#include "tabloop/error.h"

namespace tabloop {

Rational Rational::of(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorCode::kInvalidArgument, "zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational{num, den};
}

Rational Rational::operator+(const Rational& other) const {
  return Rational::of(num * other.den + other.num * den, den * other.den);
}

BarMap::BarMap(Tick ticks_per_bar) {
  if (ticks_per_bar <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "ticks per bar must be positive");
  }
  segments_.push_back(BarSegment{0, ticks_per_bar, 0});
}

BarMap::BarMap(std::vector<BarSegment> segments) : segments_(std::move(segments)) {
  if (segments_.empty() || segments_.front().start_tick != 0) {
    throw Error(ErrorCode::kInvalidArgument, "bar map must start at tick 0");
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i].ticks_per_bar <= 0) {
      throw Error(ErrorCode::kInvalidArgument, "ticks per bar must be positive");
    }
    if (i > 0 && segments_[i].start_tick <= segments_[i - 1].start_tick) {
      throw Error(ErrorCode::kInvalidArgument, "bar segments out of order");
    }
  }
}

const BarSegment& BarMap::segmentAt(Tick tick) const {
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), tick,
      [](Tick t, const BarSegment& seg) { return t < seg.start_tick; });
  if (it != segments_.begin()) --it;
  return *it;
}

Tick BarMap::ticksPerBarAt(Tick tick) const { return segmentAt(tick).ticks_per_bar; }

std::int64_t BarMap::barIndexAt(Tick tick) const {
  const BarSegment& seg = segmentAt(tick);
  return seg.start_bar + (tick - seg.start_tick) / seg.ticks_per_bar;
}

bool BarMap::isBarAligned(Tick tick) const {
  const BarSegment& seg = segmentAt(tick);
  return (tick - seg.start_tick) % seg.ticks_per_bar == 0;
}

Tick BarMap::alignUp(Tick tick) const {
  const BarSegment& seg = segmentAt(tick);
  const Tick offset = (tick - seg.start_tick) % seg.ticks_per_bar;
  return offset == 0 ? tick : tick + (seg.ticks_per_bar - offset);
}

Rational BarMap::barsBetween(Tick begin, Tick span) const {
  if (span < 0) throw Error(ErrorCode::kInvalidArgument, "negative span");
  Rational bars = Rational::whole(0);
  Tick cursor = begin;
  Tick remaining = span;
  std::size_t index = 0;
  while (index + 1 < segments_.size() && segments_[index + 1].start_tick <= cursor) {
    ++index;
  }
  while (remaining > 0) {
    const BarSegment& seg = segments_[index];
    const Tick seg_end = index + 1 < segments_.size()
                             ? segments_[index + 1].start_tick
                             : cursor + remaining;
    const Tick chunk = std::min(remaining, seg_end - cursor);
    bars = bars + Rational::of(chunk, seg.ticks_per_bar);
    cursor += chunk;
    remaining -= chunk;
    if (cursor == seg_end && index + 1 < segments_.size()) ++index;
  }
  return bars;
}

Tick barDuration(TimeSignature signature, Tick ppq) {
  if (signature.numerator < 1) {
    throw Error(ErrorCode::kInvalidArgument, "time signature numerator < 1");
  }
  switch (signature.denominator) {
    case 1:
    case 2:
    case 4:
    case 8:
    case 16:
    case 32:
      break;
    default:
      throw Error(ErrorCode::kUnsupportedDenominator,
                  "denominator " + std::to_string(signature.denominator));
  }
  return signature.numerator * 4 * ppq / signature.denominator;
}

Rational ticksToBars(Tick span_ticks, const BarMap& bar_map, Tick span_start) {
  return bar_map.barsBetween(span_start, span_ticks);
}

MelodyLine buildMelodyLine(const TokenStream& stream) {
  MelodyLine melody;

  TimeSignature signature{4, 4};
  bool saw_signature = false;
  bool saw_tempo = false;
  for (const Token& token : stream.header) {
    if (auto ts = parseTimeSignature(token)) {
      signature = *ts;
      saw_signature = true;
    } else if (auto bpm = parseTempo(token)) {
      melody.tempo_bpm = *bpm;
      saw_tempo = true;
    }
  }
  if (!saw_signature) melody.warnings.push_back("no time signature in header, assuming 4/4");
  if (!saw_tempo) melody.warnings.push_back("no tempo in header, assuming 120 BPM");

  std::vector<BarSegment> segments;
  segments.push_back(BarSegment{0, barDuration(signature, melody.ppq), 0});

  std::set<std::string> tracks;
  std::vector<std::pair<std::string, std::string>> pending;
  Tick cursor = 0;
  bool any_wait = false;
  int dropped_trailing = 0;

  auto flushPending = [&pending]() {
    std::sort(pending.begin(), pending.end());
    pending.erase(std::unique(pending.begin(), pending.end()), pending.end());
  };

  for (const Token& token : stream.body) {
    switch (token.kind) {
      case TokenKind::kNoteOn:
        tracks.insert(token.track);
        pending.emplace_back(token.track, token.descriptor);
        break;
      case TokenKind::kWait: {
        any_wait = true;
        NoteSet event;
        event.onset = cursor;
        event.duration = token.wait_ticks;
        flushPending();
        event.notes = std::move(pending);
        pending.clear();
        cursor += token.wait_ticks;
        melody.events.push_back(std::move(event));
        break;
      }
      case TokenKind::kHeader: {
        // A mid-body time signature switches the bar map at the next bar
        // boundary; other stray headers are ignored.
        if (auto ts = parseTimeSignature(token)) {
          const BarSegment& last = segments.back();
          Tick change = cursor;
          const Tick offset = (change - last.start_tick) % last.ticks_per_bar;
          if (offset != 0) {
            change += last.ticks_per_bar - offset;
            melody.warnings.push_back(
                "time signature change off the bar boundary, snapped forward");
          }
          if (change > last.start_tick) {
            const std::int64_t bars_in_last =
                (change - last.start_tick) / last.ticks_per_bar;
            segments.push_back(BarSegment{change, barDuration(*ts, melody.ppq),
                                          last.start_bar + bars_in_last});
          } else {
            segments.back().ticks_per_bar = barDuration(*ts, melody.ppq);
          }
        }
        break;
      }
      default:
        break;  // structural markers, effects, unknowns carry no timing
    }
  }
  if (!pending.empty()) {
    dropped_trailing = static_cast<int>(pending.size());
    melody.warnings.push_back(std::to_string(dropped_trailing) +
                              " trailing note(s) without a wait dropped");
  }

  if (!any_wait) {
    throw Error(ErrorCode::kNoTimingInfo, "body has no wait tokens");
  }

  melody.total_ticks = cursor;
  melody.track_count = std::max<std::size_t>(1, tracks.size());
  melody.bar_map = BarMap(std::move(segments));
  return melody;
}

}  // namespace tabloop
