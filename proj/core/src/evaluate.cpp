#include "tabloop/evaluate.h"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "tabloop/corpus_io.h"
#include "tabloop/error.h"

namespace tabloop {

PrimerSpec primerFromStream(const std::string& source, const TokenStream& stream) {
  PrimerSpec spec;
  spec.source = source;
  for (const Token& token : stream.header) {
    if (auto tempo = parseTempo(token)) {
      spec.tempo_bpm = static_cast<int>(std::lround(*tempo));
      break;
    }
  }
  std::unordered_set<std::string> seen_tracks;
  for (const Token& token : stream.body) {
    if (token.kind != TokenKind::kNoteOn) continue;
    if (!seen_tracks.insert(token.track).second) continue;
    spec.notes.push_back(InstrumentNote{token.track, token.descriptor});
  }
  return spec;
}

std::vector<PrimerSpec> loadPrimerPool(const std::filesystem::path& dir,
                                       std::vector<std::string>* warnings) {
  std::vector<PrimerSpec> pool;
  for (const auto& path : listTokenFiles(dir)) {
    TokenStream stream;
    try {
      stream = readTokenFile(path);
    } catch (const Error& error) {
      if (warnings != nullptr) {
        warnings->push_back("skipped " + path.string() + ": " + error.what());
      }
      continue;
    }
    PrimerSpec spec = primerFromStream(path.string(), stream);
    if (spec.notes.empty()) {
      if (warnings != nullptr) {
        warnings->push_back("skipped " + path.string() + ": no notes to prime from");
      }
      continue;
    }
    pool.push_back(std::move(spec));
  }
  return pool;
}

ExtractionParams evalExtractionParams() {
  ExtractionParams params;
  params.l_min = 4;
  params.rd_min = 2.0;
  params.lb_min = 4;
  params.lb_max = 4;
  params.rho_min = 0.0;
  return params;
}

EvalReport evaluateSource(const TokenSource& source, const std::vector<PrimerSpec>& pool,
                          const EvalOptions& options) {
  if (options.excerpts < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "excerpt count must be >= 1, got " + std::to_string(options.excerpts));
  }
  EvalReport report;
  report.excerpt_count = options.excerpts;
  double density_sum = 0.0;

  for (int index = 0; index < options.excerpts; ++index) {
    ExcerptResult excerpt;
    excerpt.seed = options.seed + static_cast<std::uint64_t>(index);

    GenerationConstraints constraints;
    constraints.bars = options.bars;
    constraints.time_sig = options.time_sig;
    constraints.max_tokens = options.max_tokens;
    constraints.seed = excerpt.seed;
    constraints.temperature = options.temperature;
    if (!pool.empty()) {
      const PrimerSpec& primer = pool[static_cast<std::size_t>(index) % pool.size()];
      excerpt.primer_source = primer.source;
      constraints.tempo_bpm = primer.tempo_bpm;
      constraints.primer = primer.notes;
    }

    try {
      const GenerationResult generated = generateConstrained(source, constraints);
      const ExtractionResult extraction = extractLoops(generated.stream, options.params);
      excerpt.loops = static_cast<std::int64_t>(extraction.loops.size());
      double excerpt_density = 0.0;
      for (const Loop& loop : extraction.loops) {
        excerpt_density += loop.candidate.density;
      }
      density_sum += excerpt_density;
      if (excerpt.loops > 0) {
        excerpt.avg_density = excerpt_density / static_cast<double>(excerpt.loops);
      }
      report.loops_found += excerpt.loops;
    } catch (const Error& error) {
      excerpt.failure = error.what();
      ++report.failed_excerpts;
    }
    report.excerpts.push_back(std::move(excerpt));
  }

  report.avg_loops_per_excerpt =
      static_cast<double>(report.loops_found) / static_cast<double>(options.excerpts);
  if (report.loops_found > 0) {
    report.avg_density = density_sum / static_cast<double>(report.loops_found);
  }
  return report;
}

std::string evalReportJson(const EvalReport& report) {
  nlohmann::json excerpts = nlohmann::json::array();
  for (const ExcerptResult& excerpt : report.excerpts) {
    excerpts.push_back(nlohmann::json{
        {"seed", excerpt.seed},
        {"primer_source", excerpt.primer_source},
        {"loops", excerpt.loops},
        {"avg_density", excerpt.avg_density},
        {"failure", excerpt.failure},
    });
  }
  nlohmann::json doc{
      {"excerpt_count", report.excerpt_count},
      {"failed_excerpts", report.failed_excerpts},
      {"loops_found", report.loops_found},
      {"avg_loops_per_excerpt", report.avg_loops_per_excerpt},
      {"avg_density", report.avg_density},
      {"excerpts", std::move(excerpts)},
  };
  return doc.dump(2) + "\n";
}

std::string evalReportText(const EvalReport& report) {
  char line[128];
  std::ostringstream out;
  out << "excerpts:          " << report.excerpt_count << '\n';
  out << "failed:            " << report.failed_excerpts << '\n';
  out << "loops found:       " << report.loops_found << '\n';
  std::snprintf(line, sizeof(line), "avg loops/excerpt: %.2f\n",
                report.avg_loops_per_excerpt);
  out << line;
  std::snprintf(line, sizeof(line), "avg loop density:  %.2f\n", report.avg_density);
  out << line;
  return out.str();
}

}  // namespace tabloop
