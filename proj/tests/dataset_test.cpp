/**
 * @file dataset_test.cpp
 * @brief Corpus building (barred and hard), stats, parameter sweeps and the
 *        deterministic train/validation split.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tabloop/corpus_io.h"
#include "tabloop/dataset.h"
#include "tabloop/error.h"
#include "testutil.h"

namespace tabloop {
namespace {

using nlohmann::json;
using testutil::loadSchema;
using testutil::schemaViolations;
using testutil::SongBuilder;
using testutil::TempDir;

ErrorCode codeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& error) {
    return error.code();
  }
  ADD_FAILURE() << "expected a tabloop::Error";
  return ErrorCode::kEmptyInput;
}

// Writes `count` planted songs into dir and returns their paths.
std::vector<std::filesystem::path> writePlantedSongs(const TempDir& dir, int count,
                                                     std::mt19937_64& rng,
                                                     bool bonus = false) {
  std::vector<std::filesystem::path> paths;
  for (int i = 0; i < count; ++i) {
    const auto planted = testutil::plantLoops(rng, 1 + i % 3, 4, 8, bonus);
    const auto path = dir.path() / ("song" + std::to_string(i) + ".tokens.txt");
    writeTextFile(path, planted.text);
    paths.push_back(path);
  }
  return paths;
}

// Depth trace of repeat signs: returns {open_count, balanced}.
std::pair<int, bool> repeatSignBalance(const TokenStream& stream) {
  int depth = 0;
  int opens = 0;
  bool balanced = true;
  for (const Token& token : stream.body) {
    if (token.kind == TokenKind::kRepeatOpen) {
      ++depth;
      ++opens;
    } else if (token.kind == TokenKind::kRepeatClose) {
      --depth;
      balanced = balanced && depth >= 0;
    }
  }
  return {opens, balanced && depth == 0};
}

// ============================================================================
// Loop file framing and metadata
// ============================================================================

TEST(DatasetTest, FrameLoopFileHasExactlyOneFramePair) {
  // A loop anchored at tick zero drags the song's own start token into its
  // slice; framing must not double it.
  SongBuilder song;
  for (int copy = 0; copy < 2; ++copy) {
    for (int e = 0; e < 8; ++e) {
      song.note("distorted0", "s1:f" + std::to_string(10 + e));
      song.wait(480);
    }
    song.bar();
  }
  ExtractionParams params;
  params.lb_min = 1;
  const ExtractionResult result = extractLoops(song.stream(), params);
  ASSERT_EQ(result.loops.size(), 1u);
  ASSERT_EQ(result.loops[0].candidate.start_tick, 0);

  const TokenStream framed = frameLoopFile(result.loops[0]);
  EXPECT_EQ(framed.header, result.loops[0].stream.header);
  ASSERT_GE(framed.body.size(), 2u);
  EXPECT_EQ(framed.body.front().kind, TokenKind::kStart);
  EXPECT_EQ(framed.body.back().kind, TokenKind::kEnd);
  int starts = 0;
  int ends = 0;
  for (const Token& token : framed.body) {
    starts += token.kind == TokenKind::kStart ? 1 : 0;
    ends += token.kind == TokenKind::kEnd ? 1 : 0;
  }
  EXPECT_EQ(starts, 1);
  EXPECT_EQ(ends, 1);
  EXPECT_EQ(framed.totalTicks(), result.loops[0].candidate.body_ticks);
}

TEST(DatasetTest, LoopMetadataLineMatchesSchema) {
  std::mt19937_64 rng(3);
  const auto planted = testutil::plantLoops(rng, 2);
  const ExtractionResult result =
      extractLoops(tokenize(planted.text), ExtractionParams{});
  ASSERT_FALSE(result.loops.empty());

  const json schema = loadSchema("loop_record.schema.json");
  for (std::size_t i = 0; i < result.loops.size(); ++i) {
    const std::string line =
        loopMetadataLine("songs/demo.tokens.txt", static_cast<int>(i),
                         "demo.loop0.tokens.txt", result.loops[i].candidate,
                         ExtractionParams{});
    EXPECT_EQ(line.find('\n'), std::string::npos);
    const json record = json::parse(line);
    const auto violations = schemaViolations(record, schema);
    EXPECT_TRUE(violations.empty())
        << "loop " << i << ": " << (violations.empty() ? "" : violations[0]);
    EXPECT_EQ(record.at("song"), "songs/demo.tokens.txt");
    EXPECT_EQ(record.at("source"), "extracted");
    EXPECT_EQ(record.at("end_tick").get<Tick>() - record.at("start_tick").get<Tick>(),
              record.at("body_bars").get<Tick>() * 3840);
  }
}

TEST(DatasetTest, ExtractionParamsJsonCarriesDefaults) {
  const json params = json::parse(extractionParamsJson(ExtractionParams{}));
  EXPECT_EQ(params.at("l_min"), 4);
  EXPECT_DOUBLE_EQ(params.at("rd_min").get<double>(), 2.0);
  EXPECT_EQ(params.at("lb_min"), 4);
  EXPECT_EQ(params.at("lb_max"), 8);
  EXPECT_DOUBLE_EQ(params.at("rho_min").get<double>(), 3.0);
  EXPECT_EQ(params.at("density_mode"), "literal");
}

// ============================================================================
// Corpus builds
// ============================================================================

TEST(DatasetTest, BarredCorpusWrapsEveryLoopInRepeatSigns) {
  TempDir dir("barred");
  std::mt19937_64 rng(5);
  const auto songs = writePlantedSongs(dir, 3, rng);
  const auto out_dir = dir.path() / "out";
  const BuildReport report = buildBarredCorpus(songs, ExtractionParams{}, out_dir, 1);

  EXPECT_EQ(report.songs_processed, 3);
  EXPECT_EQ(report.songs_failed, 0);
  EXPECT_EQ(report.files_written, 3);
  EXPECT_GE(report.loops_written, 3);

  const json manifest = json::parse(readTextFile(out_dir / "manifest.json"));
  EXPECT_EQ(manifest.at("variant"), "barred");
  ASSERT_EQ(manifest.at("files").size(), 3u);

  for (const json& entry : manifest.at("files")) {
    const TokenStream stream =
        readTokenFile(out_dir / entry.at("file").get<std::string>());
    EXPECT_EQ(stream.body.front().kind, TokenKind::kStart);
    EXPECT_EQ(stream.body.back().kind, TokenKind::kEnd);

    const auto [opens, balanced] = repeatSignBalance(stream);
    EXPECT_TRUE(balanced);
    EXPECT_EQ(opens, static_cast<int>(entry.at("loops").size()));

    // Wait ticks between each open/close pair equal the loop's span.
    std::vector<Tick> span_ticks;
    Tick current = 0;
    bool inside = false;
    for (const Token& token : stream.body) {
      if (token.kind == TokenKind::kRepeatOpen) {
        inside = true;
        current = 0;
      } else if (token.kind == TokenKind::kRepeatClose) {
        inside = false;
        span_ticks.push_back(current);
      } else if (inside && token.kind == TokenKind::kWait) {
        current += token.wait_ticks;
      }
    }
    ASSERT_EQ(span_ticks.size(), entry.at("loops").size());
    for (std::size_t i = 0; i < span_ticks.size(); ++i) {
      const json& loop = entry.at("loops")[i];
      EXPECT_EQ(span_ticks[i],
                loop.at("end_tick").get<Tick>() - loop.at("start_tick").get<Tick>());
    }
  }
}

TEST(DatasetTest, HardCorpusRepeatsEachBody) {
  TempDir dir("hard");
  std::mt19937_64 rng(9);
  const auto songs = writePlantedSongs(dir, 2, rng);
  const auto out_dir = dir.path() / "out";
  const BuildReport report = buildHardCorpus(songs, ExtractionParams{}, out_dir, 4, 1);

  const json manifest = json::parse(readTextFile(out_dir / "manifest.json"));
  EXPECT_EQ(manifest.at("variant"), "hard");
  EXPECT_EQ(manifest.at("hard_repetitions"), 4);
  EXPECT_EQ(report.files_written, static_cast<std::int64_t>(manifest.at("files").size()));
  EXPECT_EQ(report.loops_written, report.files_written);  // one file per loop

  for (const json& entry : manifest.at("files")) {
    const TokenStream stream =
        readTokenFile(out_dir / entry.at("file").get<std::string>());
    ASSERT_EQ(entry.at("loops").size(), 1u);
    const json& loop = entry.at("loops")[0];
    const Tick body = loop.at("end_tick").get<Tick>() - loop.at("start_tick").get<Tick>();
    EXPECT_EQ(stream.totalTicks(), 4 * body);
    EXPECT_EQ(repeatSignBalance(stream).first, 0);  // no signs in hard files
    EXPECT_EQ(stream.body.front().kind, TokenKind::kStart);
    EXPECT_EQ(stream.body.back().kind, TokenKind::kEnd);
  }
}

TEST(DatasetTest, HardCorpusRejectsSingleRepetition) {
  TempDir dir("hardreps");
  std::mt19937_64 rng(13);
  const auto songs = writePlantedSongs(dir, 1, rng);
  EXPECT_EQ(codeOf([&] {
              buildHardCorpus(songs, ExtractionParams{}, dir.path() / "out", 1, 1);
            }),
            ErrorCode::kInvalidArgument);
}

TEST(DatasetTest, BuildRejectsEmptySongList) {
  TempDir dir("empty");
  EXPECT_EQ(codeOf([&] {
              buildBarredCorpus({}, ExtractionParams{}, dir.path() / "out", 1);
            }),
            ErrorCode::kEmptyCorpus);
}

TEST(DatasetTest, BuildSkipsUnparseableSongsAndLoopFreeSongs) {
  TempDir dir("mixed");
  std::mt19937_64 rng(17);
  auto songs = writePlantedSongs(dir, 1, rng);

  const auto bad = dir.path() / "bad.tokens.txt";
  writeTextFile(bad, "start\nwait:abc\nend\n");
  songs.push_back(bad);

  SongBuilder loopless;
  int fret = 100;
  for (int e = 0; e < 16; ++e) {
    loopless.note("distorted0", "s1:f" + std::to_string(fret++)).wait(480);
  }
  const auto plain = dir.path() / "plain.tokens.txt";
  writeTextFile(plain, loopless.text());
  songs.push_back(plain);

  const auto out_dir = dir.path() / "out";
  const BuildReport report = buildBarredCorpus(songs, ExtractionParams{}, out_dir, 1);

  EXPECT_EQ(report.songs_failed, 1);
  EXPECT_EQ(report.songs_processed, 2);
  EXPECT_EQ(report.files_written, 1);  // only the planted song has loops
  bool skipped_warning = false;
  for (const std::string& warning : report.warnings) {
    skipped_warning = skipped_warning || warning.find("skipped") != std::string::npos;
  }
  EXPECT_TRUE(skipped_warning);

  const json manifest = json::parse(readTextFile(out_dir / "manifest.json"));
  EXPECT_EQ(manifest.at("songs_failed"), 1);
  EXPECT_EQ(manifest.at("files").size(), 1u);
}

TEST(DatasetTest, ManifestsMatchSchema) {
  TempDir dir("manifest");
  std::mt19937_64 rng(19);
  const auto songs = writePlantedSongs(dir, 2, rng);
  const json schema = loadSchema("corpus_manifest.schema.json");

  buildBarredCorpus(songs, ExtractionParams{}, dir.path() / "barred", 1);
  const json barred = json::parse(readTextFile(dir.path() / "barred" / "manifest.json"));
  EXPECT_TRUE(schemaViolations(barred, schema).empty());

  buildHardCorpus(songs, ExtractionParams{}, dir.path() / "hard", 3, 1);
  const json hard = json::parse(readTextFile(dir.path() / "hard" / "manifest.json"));
  EXPECT_TRUE(schemaViolations(hard, schema).empty());
  EXPECT_EQ(hard.at("hard_repetitions"), 3);
}

TEST(DatasetTest, CollidingSongStemsGetSuffixes) {
  TempDir dir("stems");
  std::mt19937_64 rng(23);
  std::filesystem::create_directories(dir.path() / "a");
  std::filesystem::create_directories(dir.path() / "b");
  const auto planted = testutil::plantLoops(rng, 1);
  writeTextFile(dir.path() / "a" / "same.tokens.txt", planted.text);
  writeTextFile(dir.path() / "b" / "same.tokens.txt", planted.text);

  const std::vector<std::filesystem::path> songs = {dir.path() / "a" / "same.tokens.txt",
                                                    dir.path() / "b" / "same.tokens.txt"};
  EXPECT_EQ(uniqueStems(songs), (std::vector<std::string>{"same", "same_2"}));

  const auto out_dir = dir.path() / "out";
  const BuildReport report = buildBarredCorpus(songs, ExtractionParams{}, out_dir, 1);
  EXPECT_EQ(report.files_written, 2);
  EXPECT_TRUE(std::filesystem::exists(out_dir / "same.tokens.txt"));
  EXPECT_TRUE(std::filesystem::exists(out_dir / "same_2.tokens.txt"));
}

// ============================================================================
// Corpus stats
// ============================================================================

TEST(DatasetTest, CorpusStatsCountsTokensAndBytes) {
  TempDir dir("stats");
  const std::string a = "tempo:100\nstart\nwait:480\nend\n";          // 4 tokens
  const std::string b = "start\nwait:480\nwait:480\nwait:480\nend\n";  // 5 tokens
  writeTextFile(dir.path() / "a.tokens.txt", a);
  writeTextFile(dir.path() / "b.tokens.txt", b);

  const CorpusStats stats = corpusStats(dir.path());
  EXPECT_EQ(stats.file_count, 2);
  EXPECT_EQ(stats.max_tokens_per_file, 5);
  EXPECT_DOUBLE_EQ(stats.avg_tokens_per_file, 4.5);
  EXPECT_EQ(stats.total_bytes, static_cast<std::int64_t>(a.size() + b.size()));
  EXPECT_TRUE(stats.unreadable_files.empty());
}

TEST(DatasetTest, CorpusStatsListsUnreadableFiles) {
  TempDir dir("statsbad");
  writeTextFile(dir.path() / "ok.tokens.txt", "start\nwait:480\nend\n");
  writeTextFile(dir.path() / "bad.tokens.txt", "start\nwait:zero\nend\n");

  const CorpusStats stats = corpusStats(dir.path());
  EXPECT_EQ(stats.file_count, 1);
  ASSERT_EQ(stats.unreadable_files.size(), 1u);
  EXPECT_NE(stats.unreadable_files[0].find("bad.tokens.txt"), std::string::npos);
}

// ============================================================================
// Parameter sweeps
// ============================================================================

TEST(DatasetTest, ReferenceSweepGridShape) {
  const std::vector<ExtractionParams> grid = referenceSweepGrid();
  ASSERT_EQ(grid.size(), 16u);
  bool has_reference_row = false;
  for (const ExtractionParams& params : grid) {
    EXPECT_EQ(params.lb_min, 4);
    EXPECT_TRUE(params.lb_max == 8 || params.lb_max == 16);
    has_reference_row =
        has_reference_row || (params.lb_max == 8 && params.rho_min == 3.0 &&
                              params.l_min == 4 && params.rd_min == 2.0);
  }
  EXPECT_TRUE(has_reference_row);
}

TEST(DatasetTest, ParamSweepMatchesDirectExtraction) {
  TempDir dir("sweep");
  std::mt19937_64 rng(29);
  const auto songs = writePlantedSongs(dir, 4, rng, /*bonus=*/true);

  const std::vector<ExtractionParams> grid = referenceSweepGrid();
  const std::vector<SweepRow> rows = paramSweep(songs, grid, 2);
  ASSERT_EQ(rows.size(), grid.size());

  for (std::size_t combo = 0; combo < grid.size(); ++combo) {
    std::int64_t expected = 0;
    for (const auto& path : songs) {
      expected +=
          static_cast<std::int64_t>(extractLoops(readTokenFile(path), grid[combo]).loops.size());
    }
    EXPECT_EQ(rows[combo].loops, expected) << "combination " << combo;
    EXPECT_DOUBLE_EQ(rows[combo].avg_loops_per_song,
                     static_cast<double>(expected) / static_cast<double>(songs.size()));
  }
}

TEST(DatasetTest, ParamSweepIgnoresUnparseableSongs) {
  TempDir dir("sweepbad");
  std::mt19937_64 rng(31);
  auto songs = writePlantedSongs(dir, 1, rng);
  writeTextFile(dir.path() / "bad.tokens.txt", "start\nwait:abc\nend\n");
  songs.push_back(dir.path() / "bad.tokens.txt");

  const std::vector<SweepRow> rows = paramSweep(songs, {ExtractionParams{}}, 1);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_GE(rows[0].loops, 1);
  // The average still divides by every song handed in.
  EXPECT_DOUBLE_EQ(rows[0].avg_loops_per_song, static_cast<double>(rows[0].loops) / 2.0);
}

TEST(DatasetTest, SweepCsvAndTableFormat) {
  TempDir dir("sweepfmt");
  std::mt19937_64 rng(37);
  const auto songs = writePlantedSongs(dir, 2, rng);
  const std::vector<SweepRow> rows = paramSweep(songs, referenceSweepGrid(), 2);

  const std::string csv = sweepCsv(rows);
  std::vector<std::string> lines;
  std::istringstream csv_in(csv);
  for (std::string line; std::getline(csv_in, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 17u);
  EXPECT_EQ(lines[0], "bars_min,bars_max,density,l_min,rd_min,loops,avg_loops_per_song");
  EXPECT_EQ(lines[1].rfind("4,8,4,4,4,", 0), 0u);  // first grid row
  for (std::size_t i = 1; i < lines.size(); ++i) {
    EXPECT_EQ(std::count(lines[i].begin(), lines[i].end(), ','), 6) << lines[i];
  }

  const std::string table = sweepTable(rows);
  std::istringstream table_in(table);
  lines.clear();
  for (std::string line; std::getline(table_in, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 17u);
  EXPECT_EQ(lines[0].rfind("bars", 0), 0u);
  EXPECT_NE(lines[1].find("4-8"), std::string::npos);
}

// ============================================================================
// Train/validation split
// ============================================================================

TEST(DatasetTest, SplitCorpusIsDeterministicPartition) {
  std::vector<std::filesystem::path> files;
  for (int i = 0; i < 200; ++i) {
    files.emplace_back("corpus/song" + std::to_string(i) + ".tokens.txt");
  }

  const CorpusSplit split = splitCorpus(files, 85);
  EXPECT_EQ(split.train.size() + split.validation.size(), files.size());

  std::set<std::filesystem::path> train(split.train.begin(), split.train.end());
  for (const auto& path : split.validation) {
    EXPECT_EQ(train.count(path), 0u);
  }
  // Roughly 85 percent lands in train.
  EXPECT_GT(split.train.size(), 130u);
  EXPECT_LT(split.train.size(), 195u);

  const CorpusSplit again = splitCorpus(files, 85);
  EXPECT_EQ(again.train, split.train);
  EXPECT_EQ(again.validation, split.validation);
}

TEST(DatasetTest, SplitDependsOnStemNotDirectory) {
  std::vector<std::filesystem::path> here;
  std::vector<std::filesystem::path> there;
  for (int i = 0; i < 50; ++i) {
    here.emplace_back("a/song" + std::to_string(i) + ".tokens.txt");
    there.emplace_back("b/nested/song" + std::to_string(i) + ".tokens.txt");
  }
  const CorpusSplit split_here = splitCorpus(here, 70);
  const CorpusSplit split_there = splitCorpus(there, 70);
  ASSERT_EQ(split_here.train.size(), split_there.train.size());
  for (std::size_t i = 0; i < split_here.train.size(); ++i) {
    EXPECT_EQ(songStem(split_here.train[i]), songStem(split_there.train[i]));
  }
}

TEST(DatasetTest, SplitEdgePercents) {
  std::vector<std::filesystem::path> files;
  for (int i = 0; i < 20; ++i) {
    files.emplace_back("song" + std::to_string(i) + ".tokens.txt");
  }
  EXPECT_TRUE(splitCorpus(files, 0).train.empty());
  EXPECT_TRUE(splitCorpus(files, 100).validation.empty());
  EXPECT_EQ(codeOf([&] { splitCorpus(files, 101); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(codeOf([&] { splitCorpus(files, -1); }), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace tabloop
