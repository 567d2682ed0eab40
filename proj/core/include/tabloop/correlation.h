#pragma once

#include <cstdint>
#include <vector>

#include "tabloop/melody.h"

namespace tabloop {

/// One maximal stretch of consecutive element matches on a diagonal of the
/// note correlation matrix: cells (row + p, row + diag + p) match for
/// p in [0, length).
struct DiagonalRun {
  std::int32_t diag = 0;    // column minus row, always > 0
  std::int32_t row = 0;     // first matching row
  std::int32_t length = 0;  // consecutive matches

  bool operator==(const DiagonalRun&) const = default;
};

enum class CorrelationStrategy {
  kAuto,              // pick by estimated match density
  kDiagonalScan,      // walk every diagonal, O(L^2) time, O(runs) memory
  kGroupedPositions,  // enumerate matching cells by element group, then sort
};

/// Sparse upper-triangle view of the note-match matrix and its tick-duration
/// twin. The match matrix C counts the run of consecutive matches ending at
/// a cell; D holds the tick length of that run. Both are reconstructed on
/// demand from the run store plus a duration prefix sum, so memory stays
/// proportional to the matched cells rather than L^2.
class CorrMatrices {
 public:
  CorrMatrices() = default;

  std::int32_t length() const { return length_; }

  /// Runs sorted by (diag, row).
  const std::vector<DiagonalRun>& runs() const { return runs_; }

  /// C[i][j]: matches in the repeated segment ending at both i and j.
  /// Zero outside runs; p - row + 1 at the p-th cell inside a run.
  std::int64_t cValue(std::int32_t i, std::int32_t j) const;

  /// D[i][j]: tick duration of that repeated segment, zero outside runs.
  Tick dValue(std::int32_t i, std::int32_t j) const;

  /// Sum of event durations for `count` events starting at `first`.
  Tick durationSum(std::int32_t first, std::int32_t count) const;

  /// Total matching cells, i.e. the summed run lengths.
  std::int64_t matchCellCount() const;

  /// Run containing cell (i, i + diag), or nullptr.
  const DiagonalRun* runContaining(std::int32_t i, std::int32_t diag) const;

 private:
  friend CorrMatrices buildCorrelation(const MelodyLine&, CorrelationStrategy);

  std::vector<DiagonalRun> runs_;
  std::vector<Tick> duration_prefix_;  // duration_prefix_[n] = sum of first n durations
  std::int32_t length_ = 0;
};

/// Builds the run store for a melody line. Equality of elements is content
/// equality (note set plus duration). Elements are interned to integer ids
/// first so the scan compares ints only.
CorrMatrices buildCorrelation(const MelodyLine& melody,
                              CorrelationStrategy strategy = CorrelationStrategy::kAuto);

}  // namespace tabloop
