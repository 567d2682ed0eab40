#include "tabloop/dataset.h"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "json_util.h"
#include "tabloop/corpus_io.h"
#include "tabloop/correlation.h"
#include "tabloop/error.h"

namespace tabloop {
namespace {

// Body slice without start/end tokens; those frame whole files, and a
// slice anchored at tick 0 would otherwise drag the song's own start
// token into the middle of a built corpus file.
void appendBodyContent(std::vector<Token>& out, const std::vector<Token>& body) {
  for (const Token& token : body) {
    if (token.kind == TokenKind::kStart || token.kind == TokenKind::kEnd) continue;
    out.push_back(token);
  }
}

struct SongOutcome {
  bool failed = false;
  std::vector<std::string> warnings;
  std::vector<nlohmann::json> files;  // manifest entries
  std::int64_t loops = 0;
};

nlohmann::json loopSummary(int index, const LoopCandidate& c) {
  return nlohmann::json{
      {"index", index},          {"start_tick", c.start_tick}, {"end_tick", c.end_tick},
      {"body_bars", c.body_bars}, {"density", c.density},       {"source", loopSourceName(c.source)},
  };
}

std::string formatNumber(double value) {
  if (value == static_cast<std::int64_t>(value)) {
    return std::to_string(static_cast<std::int64_t>(value));
  }
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%g", value);
  return buffer;
}

std::string formatAverage(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4f", value);
  return buffer;
}

}  // namespace

TokenStream frameLoopFile(const Loop& loop) {
  TokenStream out;
  out.header = loop.stream.header;
  out.body.push_back(makeStart());
  appendBodyContent(out.body, loop.stream.body);
  out.body.push_back(makeEnd());
  return out;
}

std::string loopMetadataLine(const std::string& song, int loop_index,
                             const std::string& file, const LoopCandidate& candidate,
                             const ExtractionParams& params) {
  return loopMetadataJson(song, loop_index, file, candidate, params).dump();
}

std::string extractionParamsJson(const ExtractionParams& params) {
  return paramsToJson(params).dump();
}

BuildReport buildLoopCorpus(const std::vector<std::filesystem::path>& songs,
                            const ExtractionParams& params, const CorpusFormat& format,
                            const std::filesystem::path& out_dir, int jobs) {
  if (songs.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "no songs to process");
  }
  if (format.variant == CorpusVariant::kHard && format.hard_repetitions < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "hard corpus needs at least 2 repetitions, got " +
                    std::to_string(format.hard_repetitions));
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure,
                "cannot create " + out_dir.string() + ": " + ec.message());
  }

  const std::vector<std::string> stems = uniqueStems(songs);
  std::vector<SongOutcome> outcomes(songs.size());

  parallelFor(songs.size(), jobs, [&](std::size_t index) {
    SongOutcome& outcome = outcomes[index];
    const std::filesystem::path& song_path = songs[index];
    ExtractionResult extraction;
    try {
      TokenStream song = readTokenFile(song_path, &outcome.warnings);
      extraction = extractLoops(song, params);
    } catch (const Error& error) {
      outcome.failed = true;
      outcome.warnings.push_back("skipped " + song_path.string() + ": " + error.what());
      return;
    }
    for (std::string& warning : extraction.warnings) {
      outcome.warnings.push_back(song_path.string() + ": " + std::move(warning));
    }
    if (extraction.loops.empty()) return;

    if (format.variant == CorpusVariant::kBarred) {
      TokenStream out;
      out.header = extraction.loops.front().stream.header;
      out.body.push_back(makeStart());
      nlohmann::json loop_list = nlohmann::json::array();
      for (std::size_t i = 0; i < extraction.loops.size(); ++i) {
        const Loop& loop = extraction.loops[i];
        out.body.push_back(makeRepeatOpen());
        appendBodyContent(out.body, loop.stream.body);
        out.body.push_back(makeRepeatClose());
        loop_list.push_back(loopSummary(static_cast<int>(i), loop.candidate));
      }
      out.body.push_back(makeEnd());
      const std::string name = stems[index] + ".tokens.txt";
      writeTokenFile(out_dir / name, out);
      outcome.files.push_back(nlohmann::json{
          {"file", name}, {"source", song_path.string()}, {"loops", std::move(loop_list)}});
      outcome.loops = static_cast<std::int64_t>(extraction.loops.size());
    } else {
      for (std::size_t i = 0; i < extraction.loops.size(); ++i) {
        const Loop& loop = extraction.loops[i];
        TokenStream out;
        out.header = loop.stream.header;
        out.body.push_back(makeStart());
        for (int rep = 0; rep < format.hard_repetitions; ++rep) {
          appendBodyContent(out.body, loop.stream.body);
        }
        out.body.push_back(makeEnd());
        const std::string name = stems[index] + ".loop" + std::to_string(i) + ".tokens.txt";
        writeTokenFile(out_dir / name, out);
        outcome.files.push_back(nlohmann::json{{"file", name},
                                               {"source", song_path.string()},
                                               {"loops", nlohmann::json::array({loopSummary(
                                                             static_cast<int>(i),
                                                             loop.candidate)})}});
      }
      outcome.loops = static_cast<std::int64_t>(extraction.loops.size());
    }
  });

  BuildReport report;
  nlohmann::json files = nlohmann::json::array();
  for (const SongOutcome& outcome : outcomes) {
    if (outcome.failed) {
      ++report.songs_failed;
    } else {
      ++report.songs_processed;
    }
    report.loops_written += outcome.loops;
    report.files_written += static_cast<std::int64_t>(outcome.files.size());
    for (const nlohmann::json& entry : outcome.files) {
      files.push_back(entry);
    }
    for (const std::string& warning : outcome.warnings) {
      report.warnings.push_back(warning);
    }
  }

  nlohmann::json manifest{
      {"variant", format.variant == CorpusVariant::kBarred ? "barred" : "hard"},
      {"params", paramsToJson(params)},
      {"songs_processed", report.songs_processed},
      {"songs_failed", report.songs_failed},
      {"files", std::move(files)},
  };
  if (format.variant == CorpusVariant::kHard) {
    manifest["hard_repetitions"] = format.hard_repetitions;
  }
  writeTextFile(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return report;
}

BuildReport buildBarredCorpus(const std::vector<std::filesystem::path>& songs,
                              const ExtractionParams& params,
                              const std::filesystem::path& out_dir, int jobs) {
  return buildLoopCorpus(songs, params, CorpusFormat{CorpusVariant::kBarred, 0}, out_dir,
                         jobs);
}

BuildReport buildHardCorpus(const std::vector<std::filesystem::path>& songs,
                            const ExtractionParams& params,
                            const std::filesystem::path& out_dir, int reps, int jobs) {
  return buildLoopCorpus(songs, params, CorpusFormat{CorpusVariant::kHard, reps}, out_dir,
                         jobs);
}

CorpusStats corpusStats(const std::filesystem::path& dir) {
  CorpusStats stats;
  std::int64_t total_tokens = 0;
  for (const auto& path : listTokenFiles(dir)) {
    std::string text;
    TokenStream stream;
    try {
      text = readTextFile(path);
      stream = tokenize(text);
    } catch (const Error& error) {
      stats.unreadable_files.push_back(path.string() + ": " + error.what());
      continue;
    }
    const auto tokens =
        static_cast<std::int64_t>(stream.header.size() + stream.body.size());
    ++stats.file_count;
    stats.total_bytes += static_cast<std::int64_t>(text.size());
    stats.max_tokens_per_file = std::max(stats.max_tokens_per_file, tokens);
    total_tokens += tokens;
  }
  if (stats.file_count > 0) {
    stats.avg_tokens_per_file =
        static_cast<double>(total_tokens) / static_cast<double>(stats.file_count);
  }
  return stats;
}

std::vector<SweepRow> paramSweep(const std::vector<std::filesystem::path>& songs,
                                 const std::vector<ExtractionParams>& grid, int jobs) {
  std::vector<SweepRow> rows(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rows[i].params = grid[i];
  }
  if (grid.empty() || songs.empty()) return rows;

  // counts[song][combo]; slots are per-song so workers never contend.
  std::vector<std::vector<std::int64_t>> counts(
      songs.size(), std::vector<std::int64_t>(grid.size(), 0));

  parallelFor(songs.size(), jobs, [&](std::size_t index) {
    TokenStream song;
    MelodyLine melody;
    try {
      song = readTokenFile(songs[index]);
      melody = buildMelodyLine(song);
    } catch (const Error&) {
      return;  // unparseable songs contribute zero to every combination
    }
    const CorrMatrices matrices =
        melody.length() >= 2 ? buildCorrelation(melody) : CorrMatrices{};
    for (std::size_t combo = 0; combo < grid.size(); ++combo) {
      counts[index][combo] =
          static_cast<std::int64_t>(selectLoops(song, melody, matrices, grid[combo]).size());
    }
  });

  for (std::size_t combo = 0; combo < grid.size(); ++combo) {
    std::int64_t total = 0;
    for (std::size_t song = 0; song < songs.size(); ++song) {
      total += counts[song][combo];
    }
    rows[combo].loops = total;
    rows[combo].avg_loops_per_song =
        static_cast<double>(total) / static_cast<double>(songs.size());
  }
  return rows;
}

std::vector<ExtractionParams> referenceSweepGrid() {
  std::vector<ExtractionParams> grid;
  for (int lb_max : {8, 16}) {
    for (double rho_min : {4.0, 3.0}) {
      for (int l_min : {4, 2}) {
        for (double rd_min : {4.0, 2.0}) {
          ExtractionParams params;
          params.lb_min = 4;
          params.lb_max = lb_max;
          params.rho_min = rho_min;
          params.l_min = l_min;
          params.rd_min = rd_min;
          grid.push_back(params);
        }
      }
    }
  }
  return grid;
}

std::string sweepCsv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "bars_min,bars_max,density,l_min,rd_min,loops,avg_loops_per_song\n";
  for (const SweepRow& row : rows) {
    out << row.params.lb_min << ',' << row.params.lb_max << ','
        << formatNumber(row.params.rho_min) << ',' << row.params.l_min << ','
        << formatNumber(row.params.rd_min) << ',' << row.loops << ','
        << formatAverage(row.avg_loops_per_song) << '\n';
  }
  return out.str();
}

std::string sweepTable(const std::vector<SweepRow>& rows) {
  std::vector<std::array<std::string, 6>> cells;
  cells.push_back({"bars", "density", "l_min", "rd_min", "loops", "avg/song"});
  for (const SweepRow& row : rows) {
    cells.push_back({std::to_string(row.params.lb_min) + "-" + std::to_string(row.params.lb_max),
                     formatNumber(row.params.rho_min), std::to_string(row.params.l_min),
                     formatNumber(row.params.rd_min), std::to_string(row.loops),
                     formatAverage(row.avg_loops_per_song)});
  }
  std::array<std::size_t, 6> widths{};
  for (const auto& line : cells) {
    for (std::size_t col = 0; col < line.size(); ++col) {
      widths[col] = std::max(widths[col], line[col].size());
    }
  }
  std::ostringstream out;
  for (const auto& line : cells) {
    for (std::size_t col = 0; col < line.size(); ++col) {
      out << line[col];
      if (col + 1 < line.size()) {
        out << std::string(widths[col] - line[col].size() + 2, ' ');
      }
    }
    out << '\n';
  }
  return out.str();
}

CorpusSplit splitCorpus(const std::vector<std::filesystem::path>& files, int train_percent) {
  if (train_percent < 0 || train_percent > 100) {
    throw Error(ErrorCode::kInvalidArgument,
                "train percent must be in [0, 100], got " + std::to_string(train_percent));
  }
  CorpusSplit split;
  for (const auto& path : files) {
    if (fnv1a64(songStem(path)) % 100 < static_cast<std::uint64_t>(train_percent)) {
      split.train.push_back(path);
    } else {
      split.validation.push_back(path);
    }
  }
  return split;
}

}  // namespace tabloop
