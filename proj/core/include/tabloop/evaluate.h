#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tabloop/generate.h"
#include "tabloop/loop_extract.h"

namespace tabloop {

/// Primer material pulled from one corpus file: its tempo and the first
/// note each track plays, in track appearance order.
struct PrimerSpec {
  std::string source;
  int tempo_bpm = 120;
  std::vector<InstrumentNote> notes;
};

/// Primer for one song: the header tempo (120 when absent) and each
/// track's first note. `notes` is empty when the song has no note-ons.
PrimerSpec primerFromStream(const std::string& source, const TokenStream& stream);

/// One primer per readable corpus file with at least one note-on; files
/// that lex but carry no notes are skipped with a warning.
std::vector<PrimerSpec> loadPrimerPool(const std::filesystem::path& dir,
                                       std::vector<std::string>* warnings = nullptr);

/// Loopability screening thresholds: exact 4-bar loops, bookends of >= 4
/// events and >= 2 beats, no density floor.
ExtractionParams evalExtractionParams();

struct EvalOptions {
  int excerpts = 25;
  int bars = 16;
  TimeSignature time_sig;
  std::uint64_t seed = 0;
  double temperature = 1.0;
  std::int64_t max_tokens = 20000;
  ExtractionParams params = evalExtractionParams();
};

struct ExcerptResult {
  std::uint64_t seed = 0;
  std::string primer_source;
  std::int64_t loops = 0;
  double avg_density = 0.0;
  std::string failure;  // empty when the excerpt generated cleanly
};

struct EvalReport {
  int excerpt_count = 0;
  int failed_excerpts = 0;
  std::int64_t loops_found = 0;
  double avg_loops_per_excerpt = 0.0;  // failed excerpts count as zero loops
  double avg_density = 0.0;            // over every loop found
  std::vector<ExcerptResult> excerpts;
};

/// Generates `excerpts` pieces seeded seed, seed + 1, ..., priming each
/// from the pool round-robin (or the default primer when the pool is
/// empty), extracts loops from each and aggregates. Per-excerpt failures
/// are recorded in the report, never thrown.
EvalReport evaluateSource(const TokenSource& source, const std::vector<PrimerSpec>& pool,
                          const EvalOptions& options = {});

std::string evalReportJson(const EvalReport& report);
std::string evalReportText(const EvalReport& report);

}  // namespace tabloop
