#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tabloop/loop_extract.h"

namespace tabloop {

enum class CorpusVariant { kBarred, kHard };

/// Loop-training corpus layout. Barred wraps each loop of a song in repeat
/// signs and concatenates them into one file per song; Hard writes each
/// loop to its own file with the body repeated `hard_repetitions` times.
struct CorpusFormat {
  CorpusVariant variant = CorpusVariant::kBarred;
  int hard_repetitions = 4;
};

struct CorpusStats {
  std::int64_t file_count = 0;
  std::int64_t max_tokens_per_file = 0;
  double avg_tokens_per_file = 0.0;
  std::int64_t total_bytes = 0;
  std::vector<std::string> unreadable_files;
};

struct BuildReport {
  std::int64_t songs_processed = 0;
  std::int64_t songs_failed = 0;
  std::int64_t files_written = 0;
  std::int64_t loops_written = 0;
  std::vector<std::string> warnings;
};

/// A loop as a standalone token file: header, start, the body slice with
/// any stray file-framing tokens removed, end.
TokenStream frameLoopFile(const Loop& loop);

/// One JSON line of loop metadata (no trailing newline), as written to
/// loops.jsonl next to extracted loop files.
std::string loopMetadataLine(const std::string& song, int loop_index,
                             const std::string& file, const LoopCandidate& candidate,
                             const ExtractionParams& params);

/// Extraction thresholds as a JSON object string.
std::string extractionParamsJson(const ExtractionParams& params);

/// One file per song with >= 1 loops: header, start, then every loop body
/// wrapped in repeat_open/repeat_close back to back, then end. Songs that
/// fail to parse are logged and skipped. A manifest.json in the output
/// directory maps each file to its source song and loop indices.
BuildReport buildBarredCorpus(const std::vector<std::filesystem::path>& songs,
                              const ExtractionParams& params,
                              const std::filesystem::path& out_dir, int jobs = 0);

/// One file per loop: header, start, the body written `reps` times, end.
/// reps must be >= 2.
BuildReport buildHardCorpus(const std::vector<std::filesystem::path>& songs,
                            const ExtractionParams& params,
                            const std::filesystem::path& out_dir, int reps = 4,
                            int jobs = 0);

BuildReport buildLoopCorpus(const std::vector<std::filesystem::path>& songs,
                            const ExtractionParams& params, const CorpusFormat& format,
                            const std::filesystem::path& out_dir, int jobs = 0);

/// Token counts (header included) and sizes over every token file in a
/// directory. Unreadable files are listed and skipped.
CorpusStats corpusStats(const std::filesystem::path& dir);

struct SweepRow {
  ExtractionParams params;
  std::int64_t loops = 0;
  double avg_loops_per_song = 0.0;
};

/// Counts loops for every parameter combination, reusing the per-song
/// melody line and match matrices across combinations. Rows come back in
/// grid order.
std::vector<SweepRow> paramSweep(const std::vector<std::filesystem::path>& songs,
                                 const std::vector<ExtractionParams>& grid,
                                 int jobs = 0);

/// The 16 reference combinations: bars {4-8, 4-16} x density {4, 3} x
/// l_min {4, 2} x rd_min {4, 2}.
std::vector<ExtractionParams> referenceSweepGrid();

std::string sweepCsv(const std::vector<SweepRow>& rows);
std::string sweepTable(const std::vector<SweepRow>& rows);

struct CorpusSplit {
  std::vector<std::filesystem::path> train;
  std::vector<std::filesystem::path> validation;
};

/// Deterministic file-hash split, `train_percent` percent to train.
CorpusSplit splitCorpus(const std::vector<std::filesystem::path>& files,
                        int train_percent = 85);

}  // namespace tabloop
