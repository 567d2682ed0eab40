/**
 * @file melody_test.cpp
 * @brief Melody-list flattening, content equality, and the exact bar
 *        arithmetic the loop filters depend on.
 */

#include <gtest/gtest.h>

#include <functional>

#include "tabloop/error.h"
#include "tabloop/melody.h"
#include "testutil.h"

namespace tabloop {
namespace {

using testutil::SongBuilder;

ErrorCode codeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& error) {
    return error.code();
  }
  ADD_FAILURE() << "expected a tabloop::Error";
  return ErrorCode::kEmptyInput;
}

// ============================================================================
// Melody flattening
// ============================================================================

TEST(MelodyTest, EventsChainOnsetsFromWaits) {
  const MelodyLine melody = buildMelodyLine(SongBuilder()
                                                .note("distorted0", "s1:f3")
                                                .wait(480)
                                                .note("distorted0", "s1:f5")
                                                .wait(960)
                                                .note("distorted0", "s1:f7")
                                                .wait(240)
                                                .stream());
  ASSERT_EQ(melody.events.size(), 3u);
  EXPECT_EQ(melody.events[0].onset, 0);
  EXPECT_EQ(melody.events[1].onset, 480);
  EXPECT_EQ(melody.events[2].onset, 1440);
  EXPECT_EQ(melody.events[2].duration, 240);
  EXPECT_EQ(melody.total_ticks, 1680);
}

TEST(MelodyTest, SimultaneousNotesShareOneEvent) {
  const MelodyLine melody = buildMelodyLine(SongBuilder()
                                                .note("distorted0", "s3:f2")
                                                .note("bass", "s1:f2")
                                                .note("drums", "36")
                                                .wait(480)
                                                .stream());
  ASSERT_EQ(melody.events.size(), 1u);
  EXPECT_EQ(melody.events[0].notes.size(), 3u);
  EXPECT_EQ(melody.track_count, 3);
}

TEST(MelodyTest, NotesAreSortedAndDeduplicated) {
  const MelodyLine melody = buildMelodyLine(SongBuilder()
                                                .note("drums", "42")
                                                .note("bass", "s1:f0")
                                                .note("drums", "42")
                                                .wait(480)
                                                .stream());
  ASSERT_EQ(melody.events.size(), 1u);
  const auto& notes = melody.events[0].notes;
  ASSERT_EQ(notes.size(), 2u);
  EXPECT_EQ(notes[0].first, "bass");
  EXPECT_EQ(notes[1].first, "drums");
}

TEST(MelodyTest, ContentEqualityIgnoresOnset) {
  const MelodyLine melody = buildMelodyLine(SongBuilder()
                                                .note("distorted0", "s1:f3")
                                                .wait(480)
                                                .note("distorted0", "s1:f9")
                                                .wait(480)
                                                .note("distorted0", "s1:f3")
                                                .wait(480)
                                                .stream());
  ASSERT_EQ(melody.events.size(), 3u);
  EXPECT_EQ(melody.events[0], melody.events[2]);  // same note, same duration
  EXPECT_NE(melody.events[0], melody.events[1]);
}

TEST(MelodyTest, DurationDistinguishesContent) {
  const MelodyLine melody = buildMelodyLine(SongBuilder()
                                                .note("distorted0", "s1:f3")
                                                .wait(480)
                                                .note("distorted0", "s1:f3")
                                                .wait(960)
                                                .stream());
  EXPECT_NE(melody.events[0], melody.events[1]);
}

TEST(MelodyTest, WaitWithoutNotesIsARest) {
  const MelodyLine melody = buildMelodyLine(SongBuilder()
                                                .note("distorted0", "s1:f3")
                                                .wait(480)
                                                .wait(480)
                                                .stream());
  ASSERT_EQ(melody.events.size(), 2u);
  EXPECT_TRUE(melody.events[1].notes.empty());
  EXPECT_EQ(melody.events[1].duration, 480);
}

TEST(MelodyTest, TrailingNotesWithoutWaitAreDroppedWithWarning) {
  const MelodyLine melody = buildMelodyLine(
      SongBuilder().note("distorted0", "s1:f3").wait(480).note("bass", "s1:f0").stream());
  EXPECT_EQ(melody.events.size(), 1u);
  ASSERT_FALSE(melody.warnings.empty());
  EXPECT_NE(melody.warnings.back().find("trailing"), std::string::npos);
}

TEST(MelodyTest, NoWaitsThrowsNoTimingInfo) {
  EXPECT_EQ(codeOf([] {
              buildMelodyLine(SongBuilder().note("distorted0", "s1:f3").stream());
            }),
            ErrorCode::kNoTimingInfo);
}

TEST(MelodyTest, HeaderTempoAndDefaults) {
  EXPECT_DOUBLE_EQ(buildMelodyLine(SongBuilder(184).wait(480).stream()).tempo_bpm, 184.0);

  const MelodyLine bare = buildMelodyLine(tokenize("start\nwait:480\nend\n"));
  EXPECT_DOUBLE_EQ(bare.tempo_bpm, 120.0);
  EXPECT_EQ(bare.bar_map.ticksPerBarAt(0), 3840);
  EXPECT_EQ(bare.warnings.size(), 2u);  // assumed signature and tempo
}

// ============================================================================
// Bar arithmetic
// ============================================================================

TEST(MelodyTest, BarDurationVectors) {
  EXPECT_EQ(barDuration(TimeSignature{4, 4}, kTicksPerQuarter), 3840);
  EXPECT_EQ(barDuration(TimeSignature{3, 4}, kTicksPerQuarter), 2880);
  EXPECT_EQ(barDuration(TimeSignature{6, 8}, kTicksPerQuarter), 2880);
  EXPECT_EQ(barDuration(TimeSignature{7, 8}, kTicksPerQuarter), 3360);
  EXPECT_EQ(barDuration(TimeSignature{2, 2}, kTicksPerQuarter), 3840);
  EXPECT_EQ(barDuration(TimeSignature{1, 1}, kTicksPerQuarter), 3840);
}

TEST(MelodyTest, BarDurationRejectsBadSignatures) {
  EXPECT_EQ(codeOf([] { barDuration(TimeSignature{4, 5}, kTicksPerQuarter); }),
            ErrorCode::kUnsupportedDenominator);
  EXPECT_EQ(codeOf([] { barDuration(TimeSignature{4, 64}, kTicksPerQuarter); }),
            ErrorCode::kUnsupportedDenominator);
  EXPECT_EQ(codeOf([] { barDuration(TimeSignature{0, 4}, kTicksPerQuarter); }),
            ErrorCode::kInvalidArgument);
}

TEST(MelodyTest, TicksToBarsExactInUniformMeter) {
  const BarMap map(3840);
  EXPECT_EQ(ticksToBars(15360, map, 0), Rational::whole(4));
  EXPECT_EQ(ticksToBars(15360, map, 1440), Rational::whole(4));  // unaligned start
  EXPECT_EQ(ticksToBars(1920, map, 0), (Rational{1, 2}));
  EXPECT_FALSE(ticksToBars(4000, map, 0).isInteger());
}

TEST(MelodyTest, BarMapIndexAndAlignment) {
  const BarMap map(3840);
  EXPECT_EQ(map.barIndexAt(0), 0);
  EXPECT_EQ(map.barIndexAt(3839), 0);
  EXPECT_EQ(map.barIndexAt(3840), 1);
  EXPECT_TRUE(map.isBarAligned(7680));
  EXPECT_FALSE(map.isBarAligned(7681));
  EXPECT_EQ(map.alignUp(3841), 7680);
  EXPECT_EQ(map.alignUp(7680), 7680);
}

TEST(MelodyTest, MidSongSignatureChangeSplitsBarMap) {
  // Two 4/4 bars, then 3/4 from tick 7680 on.
  SongBuilder song;
  for (int bar = 0; bar < 2; ++bar) {
    song.note("distorted0", "s1:f3").wait(3840).bar();
  }
  song.raw("time_signature:3/4");
  for (int bar = 0; bar < 2; ++bar) {
    song.note("distorted0", "s1:f5").wait(2880).bar();
  }
  std::vector<std::string> warnings;
  const TokenStream stream = tokenize(song.text(), &warnings);
  const MelodyLine melody = buildMelodyLine(stream);

  ASSERT_EQ(melody.bar_map.segments().size(), 2u);
  EXPECT_EQ(melody.bar_map.segments()[1].start_tick, 7680);
  EXPECT_EQ(melody.bar_map.ticksPerBarAt(7680), 2880);
  EXPECT_EQ(melody.bar_map.barIndexAt(7680 + 2880), 3);
  // Four whole bars across the meter change.
  EXPECT_EQ(ticksToBars(7680 + 5760, melody.bar_map, 0), Rational::whole(4));
  // A span straddling the change that is whole in neither meter alone.
  EXPECT_EQ(ticksToBars(3840 + 2880, melody.bar_map, 3840), Rational::whole(2));
}

TEST(MelodyTest, OffBarSignatureChangeSnapsForward) {
  SongBuilder song;
  song.note("distorted0", "s1:f3").wait(1920);  // half a bar
  song.raw("time_signature:3/4");
  song.note("distorted0", "s1:f5").wait(2880);
  const MelodyLine melody = buildMelodyLine(tokenize(song.text()));
  ASSERT_EQ(melody.bar_map.segments().size(), 2u);
  EXPECT_EQ(melody.bar_map.segments()[1].start_tick, 3840);  // next bar line
  bool snapped_warning = false;
  for (const std::string& warning : melody.warnings) {
    snapped_warning = snapped_warning || warning.find("snapped") != std::string::npos;
  }
  EXPECT_TRUE(snapped_warning);
}

TEST(MelodyTest, RationalArithmetic) {
  EXPECT_EQ(Rational::of(2, 4), (Rational{1, 2}));
  EXPECT_EQ(Rational::of(-2, -4), (Rational{1, 2}));
  EXPECT_EQ(Rational::of(2, -4), (Rational{-1, 2}));
  EXPECT_EQ(Rational::of(1, 2) + Rational::of(1, 2), Rational::whole(1));
  EXPECT_TRUE(Rational::whole(3).isInteger());
  EXPECT_DOUBLE_EQ((Rational{3, 4}).toDouble(), 0.75);
  EXPECT_EQ(codeOf([] { Rational::of(1, 0); }), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace tabloop
