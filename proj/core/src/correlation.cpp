#include "tabloop/correlation.h"

#include <algorithm>
#include <unordered_map>

namespace tabloop {
namespace {

// Interns each melody element as an integer id; equal content gets the
// same id. Ids are assigned in first-appearance order, so they are
// deterministic for a given melody.
std::vector<std::int32_t> internEvents(const MelodyLine& melody,
                                       std::int32_t* id_count) {
  struct Hasher {
    std::size_t operator()(const NoteSet* e) const {
      std::size_t h = std::hash<Tick>()(e->duration);
      for (const auto& [track, descriptor] : e->notes) {
        h ^= std::hash<std::string>()(track) + 0x9e3779b97f4a7c15ull + (h << 6) +
             (h >> 2);
        h ^= std::hash<std::string>()(descriptor) + 0x9e3779b97f4a7c15ull +
             (h << 6) + (h >> 2);
      }
      return h;
    }
  };
  struct Equal {
    bool operator()(const NoteSet* a, const NoteSet* b) const { return *a == *b; }
  };

  std::vector<std::int32_t> ids(melody.events.size());
  std::unordered_map<const NoteSet*, std::int32_t, Hasher, Equal> table;
  table.reserve(melody.events.size());
  std::int32_t next = 0;
  for (std::size_t n = 0; n < melody.events.size(); ++n) {
    auto [it, inserted] = table.emplace(&melody.events[n], next);
    if (inserted) ++next;
    ids[n] = it->second;
  }
  *id_count = next;
  return ids;
}

void scanDiagonals(const std::vector<std::int32_t>& ids,
                   const std::vector<std::int64_t>& id_counts,
                   std::vector<DiagonalRun>* runs) {
  const std::int32_t length = static_cast<std::int32_t>(ids.size());
  for (std::int32_t diag = 1; diag < length; ++diag) {
    const std::int32_t limit = length - diag;
    std::int32_t row = 0;
    while (row < limit) {
      // Elements whose content appears only once can never match.
      if (id_counts[ids[row]] < 2 || ids[row] != ids[row + diag]) {
        ++row;
        continue;
      }
      const std::int32_t start = row;
      do {
        ++row;
      } while (row < limit && ids[row] == ids[row + diag]);
      runs->push_back(DiagonalRun{diag, start, row - start});
    }
  }
}

void groupPositions(const std::vector<std::int32_t>& ids,
                    std::int32_t id_count,
                    const std::vector<std::int64_t>& id_counts,
                    std::vector<DiagonalRun>* runs) {
  const std::int32_t length = static_cast<std::int32_t>(ids.size());

  std::vector<std::int32_t> offsets(id_count + 1, 0);
  for (std::int32_t id = 0; id < id_count; ++id) {
    offsets[id + 1] = offsets[id] + static_cast<std::int32_t>(id_counts[id]);
  }
  std::vector<std::int32_t> positions(length);
  {
    std::vector<std::int32_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::int32_t n = 0; n < length; ++n) positions[cursor[ids[n]]++] = n;
  }

  // All matching cells as (diag, row), then coalesce consecutive rows per
  // diagonal into runs.
  std::vector<std::pair<std::int32_t, std::int32_t>> cells;
  for (std::int32_t id = 0; id < id_count; ++id) {
    const std::int32_t begin = offsets[id];
    const std::int32_t end = offsets[id + 1];
    for (std::int32_t a = begin; a < end; ++a) {
      for (std::int32_t b = a + 1; b < end; ++b) {
        cells.emplace_back(positions[b] - positions[a], positions[a]);
      }
    }
  }
  std::sort(cells.begin(), cells.end());

  std::size_t n = 0;
  while (n < cells.size()) {
    const std::int32_t diag = cells[n].first;
    const std::int32_t start = cells[n].second;
    std::int32_t row = start;
    while (n < cells.size() && cells[n].first == diag && cells[n].second == row) {
      ++row;
      ++n;
    }
    runs->push_back(DiagonalRun{diag, start, row - start});
  }
}

}  // namespace

std::int64_t CorrMatrices::matchCellCount() const {
  std::int64_t total = 0;
  for (const DiagonalRun& run : runs_) total += run.length;
  return total;
}

const DiagonalRun* CorrMatrices::runContaining(std::int32_t i,
                                               std::int32_t diag) const {
  auto it = std::upper_bound(
      runs_.begin(), runs_.end(), std::make_pair(diag, i),
      [](const std::pair<std::int32_t, std::int32_t>& key, const DiagonalRun& run) {
        return key < std::make_pair(run.diag, run.row);
      });
  if (it == runs_.begin()) return nullptr;
  const DiagonalRun& run = *std::prev(it);
  if (run.diag != diag || i < run.row || i >= run.row + run.length) return nullptr;
  return &run;
}

std::int64_t CorrMatrices::cValue(std::int32_t i, std::int32_t j) const {
  if (j <= i) return 0;
  const DiagonalRun* run = runContaining(i, j - i);
  return run == nullptr ? 0 : i - run->row + 1;
}

Tick CorrMatrices::dValue(std::int32_t i, std::int32_t j) const {
  if (j <= i) return 0;
  const DiagonalRun* run = runContaining(i, j - i);
  if (run == nullptr) return 0;
  return durationSum(run->row, i - run->row + 1);
}

Tick CorrMatrices::durationSum(std::int32_t first, std::int32_t count) const {
  return duration_prefix_[first + count] - duration_prefix_[first];
}

CorrMatrices buildCorrelation(const MelodyLine& melody,
                              CorrelationStrategy strategy) {
  CorrMatrices matrices;
  const std::int32_t length = melody.length();
  matrices.length_ = length;
  matrices.duration_prefix_.resize(length + 1, 0);
  for (std::int32_t n = 0; n < length; ++n) {
    matrices.duration_prefix_[n + 1] =
        matrices.duration_prefix_[n] + melody.events[n].duration;
  }
  if (length < 2) return matrices;

  std::int32_t id_count = 0;
  const std::vector<std::int32_t> ids = internEvents(melody, &id_count);
  std::vector<std::int64_t> id_counts(id_count, 0);
  for (std::int32_t id : ids) ++id_counts[id];

  if (strategy == CorrelationStrategy::kAuto) {
    // Matching cells are sum over groups of c*(c-1)/2; the grouped path
    // wins when that is well below the L^2/2 cells the scan visits.
    std::int64_t match_cells = 0;
    for (std::int64_t c : id_counts) match_cells += c * (c - 1) / 2;
    const std::int64_t scan_cells =
        static_cast<std::int64_t>(length) * (length - 1) / 2;
    strategy = match_cells * 16 <= scan_cells
                   ? CorrelationStrategy::kGroupedPositions
                   : CorrelationStrategy::kDiagonalScan;
  }

  // Either path emits runs already sorted by (diag, row).
  if (strategy == CorrelationStrategy::kDiagonalScan) {
    scanDiagonals(ids, id_counts, &matrices.runs_);
  } else {
    groupPositions(ids, id_count, id_counts, &matrices.runs_);
  }
  return matrices;
}

}  // namespace tabloop
