#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tabloop/token.h"

namespace tabloop {

/// Exact fraction used for bar counts; always kept in lowest terms with a
/// positive denominator.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational of(std::int64_t num, std::int64_t den);
  static Rational whole(std::int64_t value) { return Rational{value, 1}; }

  Rational operator+(const Rational& other) const;
  bool operator==(const Rational& other) const = default;

  bool isInteger() const { return den == 1; }
  double toDouble() const { return static_cast<double>(num) / den; }
};

/// The set of notes sounding from one onset, one element of the melody
/// list. Consecutive elements chain: onset(n) = onset(n-1) + duration(n-1).
/// A rest is an element with an empty notes set.
///
/// Equality is content equality (notes and duration, not onset): two
/// elements compare equal exactly when one could substitute for the other
/// in a repetition.
struct NoteSet {
  Tick onset = 0;
  Tick duration = 0;
  /// Deduplicated (track, descriptor) pairs in sorted order.
  std::vector<std::pair<std::string, std::string>> notes;

  bool operator==(const NoteSet& other) const {
    return duration == other.duration && notes == other.notes;
  }
  bool operator!=(const NoteSet& other) const { return !(*this == other); }
};

struct BarSegment {
  Tick start_tick = 0;
  Tick ticks_per_bar = 4 * kTicksPerQuarter;
  std::int64_t start_bar = 0;
};

/// Maps ticks to bar positions. Supports mid-song time-signature changes;
/// every segment boundary falls on a bar boundary of the preceding segment.
class BarMap {
 public:
  BarMap() : BarMap(4 * kTicksPerQuarter) {}
  explicit BarMap(Tick ticks_per_bar);
  explicit BarMap(std::vector<BarSegment> segments);

  Tick ticksPerBarAt(Tick tick) const;
  std::int64_t barIndexAt(Tick tick) const;
  bool isBarAligned(Tick tick) const;

  /// Exact bar count of [begin, begin + span), measured bar-by-bar across
  /// signature changes.
  Rational barsBetween(Tick begin, Tick span) const;

  /// Tick of the next bar boundary at or after `tick`.
  Tick alignUp(Tick tick) const;

  const std::vector<BarSegment>& segments() const { return segments_; }

 private:
  const BarSegment& segmentAt(Tick tick) const;

  std::vector<BarSegment> segments_;
};

/// A song flattened into the ordered melody list plus its timing context.
struct MelodyLine {
  std::vector<NoteSet> events;
  BarMap bar_map;
  int track_count = 1;
  Tick ppq = kTicksPerQuarter;
  Tick total_ticks = 0;
  double tempo_bpm = 120.0;
  std::vector<std::string> warnings;

  std::int32_t length() const { return static_cast<std::int32_t>(events.size()); }
};

/// Flattens all tracks of a token stream into one melody list: note-on
/// tokens between two waits share the onset of the preceding gap, and each
/// element's duration is the following wait's ticks. Throws
/// Error{kNoTimingInfo} when the body has no wait tokens.
MelodyLine buildMelodyLine(const TokenStream& stream);

/// Bar length in ticks for a time signature: numerator * (4/denominator)
/// quarters. Throws Error{kUnsupportedDenominator} unless the denominator
/// is one of 1, 2, 4, 8, 16, 32.
Tick barDuration(TimeSignature signature, Tick ppq);

/// Exact bar count of a span starting at `span_start`.
Rational ticksToBars(Tick span_ticks, const BarMap& bar_map, Tick span_start);

}  // namespace tabloop
