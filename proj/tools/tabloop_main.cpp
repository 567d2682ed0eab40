/// @file
/// @brief Command-line front end: loop extraction, corpus building, n-gram
/// training and bar-constrained generation over guitar-tab token files.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tabloop/corpus_io.h"
#include "tabloop/dataset.h"
#include "tabloop/error.h"
#include "tabloop/evaluate.h"
#include "tabloop/generate.h"
#include "tabloop/loop_extract.h"
#include "tabloop/melody.h"
#include "tabloop/ngram.h"
#include "tabloop/token.h"

namespace fs = std::filesystem;
using namespace tabloop;

namespace {

std::vector<fs::path> collectSongs(const std::string& in) {
  const fs::path path(in);
  if (fs::is_directory(path)) return listTokenFiles(path);
  return {path};
}

void addParamFlags(CLI::App* cmd, ExtractionParams& params) {
  cmd->add_option("--l-min", params.l_min, "minimum bookend events")
      ->capture_default_str();
  cmd->add_option("--rd-min", params.rd_min, "minimum bookend length in beats")
      ->capture_default_str();
  cmd->add_option("--bars-min", params.lb_min, "minimum loop length in bars")
      ->capture_default_str();
  cmd->add_option("--bars-max", params.lb_max, "maximum loop length in bars")
      ->capture_default_str();
  cmd->add_option("--density", params.rho_min, "minimum note density")
      ->capture_default_str();
  cmd->add_flag_callback(
      "--per-track-density",
      [&params] { params.density_mode = DensityMode::kPerTrack; },
      "normalize density by track count instead of scaling by it");
}

TimeSignature timeSigFromText(const std::string& text) {
  const auto parsed = parseTimeSignature(makeHeader("time_signature", text));
  if (!parsed) {
    throw Error(ErrorCode::kInvalidArgument,
                "bad time signature '" + text + "', expected <num>/<den>");
  }
  return *parsed;
}

std::string timeSigValidator(const std::string& text) {
  return parseTimeSignature(makeHeader("time_signature", text))
             ? std::string{}
             : "expected <num>/<den>, got '" + text + "'";
}

void makeOutputDir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure, "cannot create " + out + ": " + ec.message());
  }
}

int runExtract(const std::string& in, const std::string& out,
               const ExtractionParams& params, int jobs) {
  const std::vector<fs::path> songs = collectSongs(in);
  if (songs.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "no token files under " + in);
  }
  makeOutputDir(out);
  const std::vector<std::string> stems = uniqueStems(songs);

  struct SongResult {
    std::vector<std::string> metadata_lines;
    std::vector<std::string> warnings;
    std::int64_t loops = 0;
    bool failed = false;
  };
  std::vector<SongResult> results(songs.size());

  parallelFor(songs.size(), jobs, [&](std::size_t index) {
    SongResult& result = results[index];
    try {
      const TokenStream song = readTokenFile(songs[index], &result.warnings);
      ExtractionResult extraction = extractLoops(song, params);
      for (std::string& warning : extraction.warnings) {
        result.warnings.push_back(songs[index].string() + ": " + std::move(warning));
      }
      for (std::size_t k = 0; k < extraction.loops.size(); ++k) {
        const Loop& loop = extraction.loops[k];
        const std::string name =
            stems[index] + ".loop" + std::to_string(k) + ".tokens.txt";
        writeTokenFile(fs::path(out) / name, frameLoopFile(loop));
        result.metadata_lines.push_back(loopMetadataLine(
            songs[index].string(), static_cast<int>(k), name, loop.candidate, params));
      }
      result.loops = static_cast<std::int64_t>(extraction.loops.size());
    } catch (const Error& error) {
      result.failed = true;
      result.warnings.push_back("skipped " + songs[index].string() + ": " + error.what());
    }
  });

  std::int64_t total_loops = 0;
  std::int64_t failed = 0;
  std::string jsonl;
  for (const SongResult& result : results) {
    total_loops += result.loops;
    if (result.failed) ++failed;
    for (const std::string& line : result.metadata_lines) {
      jsonl += line;
      jsonl += '\n';
    }
    for (const std::string& warning : result.warnings) {
      std::cerr << warning << '\n';
    }
  }
  writeTextFile(fs::path(out) / "loops.jsonl", jsonl);
  std::cout << "songs:" << songs.size() - failed << " failed:" << failed
            << " loops:" << total_loops << '\n';
  return failed == static_cast<std::int64_t>(songs.size()) ? 1 : 0;
}

int runSweep(const std::string& in, const std::string& csv_path, int jobs) {
  const std::vector<fs::path> songs = collectSongs(in);
  if (songs.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "no token files under " + in);
  }
  const std::vector<SweepRow> rows = paramSweep(songs, referenceSweepGrid(), jobs);
  std::cout << sweepTable(rows);
  if (!csv_path.empty()) {
    writeTextFile(csv_path, sweepCsv(rows));
  }
  return 0;
}

int runBuildDataset(const std::string& in, const std::string& out,
                    const std::string& format_name, int reps,
                    const ExtractionParams& params, int jobs,
                    const std::string& split_manifest, int train_percent) {
  CorpusFormat format;
  format.variant = format_name == "hard" ? CorpusVariant::kHard : CorpusVariant::kBarred;
  format.hard_repetitions = reps;
  const BuildReport report = buildLoopCorpus(collectSongs(in), params, format, out, jobs);
  for (const std::string& warning : report.warnings) {
    std::cerr << warning << '\n';
  }
  std::cout << "songs:" << report.songs_processed << " failed:" << report.songs_failed
            << " files:" << report.files_written << " loops:" << report.loops_written
            << '\n';

  if (!split_manifest.empty()) {
    const CorpusSplit split = splitCorpus(listTokenFiles(out), train_percent);
    nlohmann::json train = nlohmann::json::array();
    nlohmann::json validation = nlohmann::json::array();
    for (const auto& path : split.train) train.push_back(path.string());
    for (const auto& path : split.validation) validation.push_back(path.string());
    const nlohmann::json doc{{"train_percent", train_percent},
                             {"train", std::move(train)},
                             {"validation", std::move(validation)}};
    writeTextFile(split_manifest, doc.dump(2) + "\n");
    std::cout << "split: " << split.train.size() << " train / "
              << split.validation.size() << " validation\n";
  }
  return 0;
}

int runStats(const std::string& in, bool as_json) {
  const CorpusStats stats = corpusStats(in);
  for (const std::string& file : stats.unreadable_files) {
    std::cerr << "unreadable: " << file << '\n';
  }
  if (as_json) {
    const nlohmann::json doc{
        {"file_count", stats.file_count},
        {"max_tokens_per_file", stats.max_tokens_per_file},
        {"avg_tokens_per_file", stats.avg_tokens_per_file},
        {"total_bytes", stats.total_bytes},
        {"unreadable_files", stats.unreadable_files},
    };
    std::cout << doc.dump(2) << '\n';
  } else {
    std::cout << "files:      " << stats.file_count << '\n'
              << "max tokens: " << stats.max_tokens_per_file << '\n'
              << "avg tokens: " << stats.avg_tokens_per_file << '\n'
              << "bytes:      " << stats.total_bytes << '\n'
              << "unreadable: " << stats.unreadable_files.size() << '\n';
  }
  return 0;
}

int runTrain(const std::string& in, const std::string& model_path, int order) {
  std::vector<std::string> warnings;
  const NgramModel model = NgramModel::trainOnCorpus(in, order, &warnings);
  for (const std::string& warning : warnings) {
    std::cerr << warning << '\n';
  }
  model.save(model_path);
  std::cout << "sequences:" << model.sequencesTrained()
            << " vocabulary:" << model.vocabularySize() << " order:" << model.order()
            << " model:" << model_path << '\n';
  return 0;
}

int runGenerate(const std::string& model_path, const std::string& out, int bars,
                const std::string& time_sig_text, Tick ticks_per_bar, int tempo,
                bool tempo_given, std::uint64_t seed, double temperature,
                std::int64_t max_tokens, const std::string& primer_file) {
  const NgramModel model = NgramModel::load(model_path);
  GenerationConstraints constraints;
  constraints.bars = bars;
  constraints.time_sig = timeSigFromText(time_sig_text);
  constraints.ticks_per_bar = ticks_per_bar;
  constraints.tempo_bpm = tempo;
  constraints.seed = seed;
  constraints.temperature = temperature;
  constraints.max_tokens = max_tokens;
  if (!primer_file.empty()) {
    const PrimerSpec primer = primerFromStream(primer_file, readTokenFile(primer_file));
    if (primer.notes.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  primer_file + " has no notes to prime from");
    }
    constraints.primer = primer.notes;
    if (!tempo_given) constraints.tempo_bpm = primer.tempo_bpm;
  }

  const GenerationResult result = generateConstrained(model, constraints);
  writeTokenFile(out, result.stream);

  nlohmann::json primer_notes = nlohmann::json::array();
  const std::vector<InstrumentNote>& notes =
      constraints.primer.empty() ? defaultPrimer() : constraints.primer;
  for (const InstrumentNote& note : notes) {
    primer_notes.push_back(nlohmann::json{{"track", note.track},
                                          {"descriptor", note.descriptor}});
  }
  const Tick effective_tpb = constraints.ticks_per_bar > 0
                                 ? constraints.ticks_per_bar
                                 : barDuration(constraints.time_sig, kTicksPerQuarter);
  const nlohmann::json meta{
      {"seed", constraints.seed},
      {"bars", constraints.bars},
      {"time_signature", time_sig_text},
      {"ticks_per_bar", effective_tpb},
      {"tempo_bpm", constraints.tempo_bpm},
      {"temperature", constraints.temperature},
      {"max_tokens", constraints.max_tokens},
      {"primer", std::move(primer_notes)},
      {"source_tokens", result.source_tokens},
      {"dropped_tokens", result.dropped_tokens},
      {"truncated_ticks", result.truncated_ticks},
  };
  writeTextFile(out + ".meta.json", meta.dump(2) + "\n");
  std::cout << "wrote " << out << " (" << result.stream.body.size()
            << " body tokens from " << result.source_tokens << " sampled)\n";
  return 0;
}

int runEvaluate(const std::string& model_path, const std::string& primers_dir,
                int excerpts, int bars, const std::string& time_sig_text,
                std::uint64_t seed, double temperature, std::int64_t max_tokens,
                const std::string& json_path) {
  const NgramModel model = NgramModel::load(model_path);
  std::vector<PrimerSpec> pool;
  if (!primers_dir.empty()) {
    std::vector<std::string> warnings;
    pool = loadPrimerPool(primers_dir, &warnings);
    for (const std::string& warning : warnings) {
      std::cerr << warning << '\n';
    }
  }
  EvalOptions options;
  options.excerpts = excerpts;
  options.bars = bars;
  options.time_sig = timeSigFromText(time_sig_text);
  options.seed = seed;
  options.temperature = temperature;
  options.max_tokens = max_tokens;
  const EvalReport report = evaluateSource(model, pool, options);
  std::cout << evalReportText(report);
  if (!json_path.empty()) {
    writeTextFile(json_path, evalReportJson(report));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loop extraction, corpus building and constrained generation "
               "for guitar-tab token files"};
  app.require_subcommand(1);

  // extract
  auto* extract = app.add_subcommand("extract", "extract loops from songs");
  std::string extract_in, extract_out;
  ExtractionParams extract_params;
  int extract_jobs = 0;
  extract->add_option("--in", extract_in, "song file or directory")->required();
  extract->add_option("--out", extract_out, "output directory")->required();
  addParamFlags(extract, extract_params);
  extract->add_option("--jobs", extract_jobs, "worker threads (0 = auto)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "count loops across the reference "
                                            "parameter grid");
  std::string sweep_in, sweep_csv;
  int sweep_jobs = 0;
  sweep->add_option("--in", sweep_in, "song file or directory")->required();
  sweep->add_option("--csv", sweep_csv, "also write rows as CSV");
  sweep->add_option("--jobs", sweep_jobs, "worker threads (0 = auto)");

  // build-dataset
  auto* build = app.add_subcommand("build-dataset", "restructure songs into a "
                                                    "loop-training corpus");
  std::string build_in, build_out, build_format = "barred", build_split;
  ExtractionParams build_params;
  int build_reps = 4;
  int build_jobs = 0;
  int build_train_percent = 85;
  build->add_option("--in", build_in, "song file or directory")->required();
  build->add_option("--out", build_out, "output directory")->required();
  build->add_option("--format", build_format, "corpus layout")
      ->check(CLI::IsMember({"barred", "hard"}))
      ->capture_default_str();
  build->add_option("--reps", build_reps, "body repetitions per file (hard)")
      ->capture_default_str();
  addParamFlags(build, build_params);
  build->add_option("--jobs", build_jobs, "worker threads (0 = auto)");
  build->add_option("--split-manifest", build_split,
                    "write a train/validation split of the output here");
  build->add_option("--train-percent", build_train_percent,
                    "share of files assigned to train")
      ->capture_default_str();

  // stats
  auto* stats = app.add_subcommand("stats", "token counts over a corpus");
  std::string stats_in;
  bool stats_json = false;
  stats->add_option("--in", stats_in, "corpus directory")->required();
  stats->add_flag("--json", stats_json, "print JSON instead of text");

  // train
  auto* train = app.add_subcommand("train", "fit the n-gram token model");
  std::string train_in, train_model;
  int train_order = 3;
  train->add_option("--in", train_in, "training corpus directory")->required();
  train->add_option("--model", train_model, "model file to write")->required();
  train->add_option("--order", train_order, "n-gram order")->capture_default_str();

  // generate
  auto* generate = app.add_subcommand("generate", "decode a bar-constrained piece");
  std::string gen_model, gen_out, gen_time_sig = "4/4", gen_primer;
  int gen_bars = 8;
  Tick gen_ticks_per_bar = 0;
  int gen_tempo = 120;
  std::uint64_t gen_seed = 0;
  double gen_temperature = 1.0;
  std::int64_t gen_max_tokens = 20000;
  generate->add_option("--model", gen_model, "model file")->required();
  generate->add_option("--out", gen_out, "token file to write")->required();
  generate->add_option("--bars", gen_bars, "bars to generate")->capture_default_str();
  generate->add_option("--time-sig", gen_time_sig, "time signature")
      ->check(timeSigValidator)
      ->capture_default_str();
  generate->add_option("--ticks-per-bar", gen_ticks_per_bar,
                       "override the bar length in ticks");
  auto* gen_tempo_opt =
      generate->add_option("--tempo", gen_tempo, "tempo in BPM")->capture_default_str();
  generate->add_option("--seed", gen_seed, "random seed")->capture_default_str();
  generate->add_option("--temperature", gen_temperature, "sampling temperature")
      ->capture_default_str();
  generate->add_option("--max-tokens", gen_max_tokens, "sampling budget")
      ->capture_default_str();
  generate->add_option("--primer-file", gen_primer,
                       "song to borrow the opening notes and tempo from");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "loop statistics over seeded "
                                                  "generations");
  std::string eval_model, eval_primers, eval_json, eval_time_sig = "4/4";
  int eval_excerpts = 25;
  int eval_bars = 16;
  std::uint64_t eval_seed = 0;
  double eval_temperature = 1.0;
  std::int64_t eval_max_tokens = 20000;
  evaluate->add_option("--model", eval_model, "model file")->required();
  evaluate->add_option("--primers", eval_primers, "corpus to draw primers from");
  evaluate->add_option("--excerpts", eval_excerpts, "pieces to generate")
      ->capture_default_str();
  evaluate->add_option("--bars", eval_bars, "bars per piece")->capture_default_str();
  evaluate->add_option("--time-sig", eval_time_sig, "time signature")
      ->check(timeSigValidator)
      ->capture_default_str();
  evaluate->add_option("--seed", eval_seed, "base random seed")->capture_default_str();
  evaluate->add_option("--temperature", eval_temperature, "sampling temperature")
      ->capture_default_str();
  evaluate->add_option("--max-tokens", eval_max_tokens, "sampling budget per piece")
      ->capture_default_str();
  evaluate->add_option("--json", eval_json, "also write the report as JSON here");

  try {
    app.parse(argc, argv);
    if (*extract) {
      return runExtract(extract_in, extract_out, extract_params, extract_jobs);
    }
    if (*sweep) {
      return runSweep(sweep_in, sweep_csv, sweep_jobs);
    }
    if (*build) {
      return runBuildDataset(build_in, build_out, build_format, build_reps,
                             build_params, build_jobs, build_split,
                             build_train_percent);
    }
    if (*stats) {
      return runStats(stats_in, stats_json);
    }
    if (*train) {
      return runTrain(train_in, train_model, train_order);
    }
    if (*generate) {
      return runGenerate(gen_model, gen_out, gen_bars, gen_time_sig,
                         gen_ticks_per_bar, gen_tempo, gen_tempo_opt->count() > 0,
                         gen_seed, gen_temperature, gen_max_tokens, gen_primer);
    }
    if (*evaluate) {
      return runEvaluate(eval_model, eval_primers, eval_excerpts, eval_bars,
                         eval_time_sig, eval_seed, eval_temperature,
                         eval_max_tokens, eval_json);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
