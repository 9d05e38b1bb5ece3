// Command-line driver: feature extraction, group statistics and
// speaker-independent classification over a manifest.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dysarthria/error.hpp"
#include "dysarthria/extraction.hpp"
#include "dysarthria/fixtures.hpp"
#include "dysarthria/manifest.hpp"
#include "dysarthria/ml.hpp"
#include "dysarthria/stats.hpp"

namespace fs = std::filesystem;
using namespace dysarthria;

namespace {

constexpr int kExitFailureRate = 1;
constexpr int kExitError = 2;

struct Config {
  fs::path manifest;
  fs::path profile;
  fs::path out = ".";
  fs::path features;
  std::uint64_t seed = 42;
  int jobs = 1;
  bool dump_alignments = false;
  bool dump_contours = false;
  bool no_select = false;
  bool selection_outside_cv = false;
  std::string grid;
  int trees = 100;
  std::vector<std::string> columns;
};

void warn(const std::string& msg) { fmt::print(stderr, "warning: {}\n", msg); }

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path features_path(const Config& cfg) { return cfg.features.empty() ? cfg.out / "features.csv" : cfg.features; }

int cmd_extract(const Config& cfg) {
  const auto profile = load_profile(cfg.profile);
  const auto entries = parse_manifest_entries(read_file(cfg.manifest), profile, cfg.manifest.parent_path());
  std::vector<UtteranceRecord> records;
  std::size_t rejected = 0;
  for (const auto& e : entries) {
    if (e.ok()) {
      records.push_back(std::get<UtteranceRecord>(e.value));
    } else {
      ++rejected;
      warn(fmt::format("manifest line {} skipped: {}", e.line, std::get<LineError>(e.value).what()));
    }
  }

  ExtractOptions options;
  options.jobs = cfg.jobs;
  options.keep_alignments = cfg.dump_alignments;
  options.keep_contours = cfg.dump_contours;
  const auto result = extract_features(records, profile, options);
  for (const auto& f : result.failures) warn(fmt::format("utterance {} skipped: {}", f.utterance_id, f.reason));

  fs::create_directories(cfg.out);
  write_file(cfg.out / "features.csv", to_csv(result.matrix));
  if (cfg.dump_alignments) {
    std::string text;
    for (const auto& a : result.analyses) {
      if (a.alignment) text += fmt::format("{}\n{}\n", a.row.utterance_id, *a.alignment);
    }
    write_file(cfg.out / "alignments.txt", text);
  }
  if (cfg.dump_contours) {
    for (const auto& a : result.analyses) {
      if (a.pitch_csv) write_file(cfg.out / "contours" / (a.row.utterance_id + ".pitch.csv"), *a.pitch_csv);
      if (a.intensity_csv) write_file(cfg.out / "contours" / (a.row.utterance_id + ".intensity.csv"), *a.intensity_csv);
    }
  }

  const std::size_t attempted = entries.size();
  if (attempted == 0) {
    warn("manifest has no utterances; wrote a header-only feature table");
    return 0;
  }
  const std::size_t failed = rejected + result.failures.size();
  fmt::print(stderr, "extracted {} of {} utterances\n", result.matrix.size(), attempted);
  if (2 * failed > attempted) {
    fmt::print(stderr, "error: {} of {} utterances failed\n", failed, attempted);
    return kExitFailureRate;
  }
  return 0;
}

int cmd_stats(const Config& cfg) {
  const auto matrix = read_feature_csv(features_path(cfg));
  fs::create_directories(cfg.out);
  const auto means = group_means(matrix);
  for (const auto& w : means.warnings) warn(w);
  write_file(cfg.out / "group_means.csv", to_csv(means));
  const auto significance = significance_tests(matrix);
  for (const auto& s : significance.skipped) warn(fmt::format("{}: Kruskal-Wallis skipped, {}", s.measurement, s.reason));
  write_file(cfg.out / "significance.json", to_json(significance));
  write_file(cfg.out / "normality.json", to_json(normality_tests(matrix)));
  return 0;
}

int cmd_classify(const Config& cfg) {
  const auto matrix = read_feature_csv(features_path(cfg));
  CvOptions options;
  if (!cfg.grid.empty()) options.grid = parse_grid(cfg.grid);
  options.forest.n_trees = cfg.trees;
  options.forest.seed = cfg.seed;
  options.jobs = cfg.jobs;
  options.selection = cfg.no_select              ? SelectionMode::None
                      : cfg.selection_outside_cv ? SelectionMode::OutsideCv
                                                 : SelectionMode::InsideCv;
  for (const auto& name : cfg.columns) options.features.push_back(feature_index(name));

  const auto report = cross_validate(matrix, options);
  fs::create_directories(cfg.out);
  write_file(cfg.out / "cv_report.json", to_json(report));
  if (report.selected) {
    write_file(cfg.out / "importances.csv", importance_csv(report.importances));
    write_file(cfg.out / "importances.svg", importance_svg(report.importances));
  }
  fmt::print(stderr, "accuracy all features {:.2f}%", report.all.accuracy);
  if (report.selected) fmt::print(stderr, ", selected {:.2f}%", report.selected->accuracy);
  fmt::print(stderr, "\n");
  return 0;
}

int cmd_report(Config cfg) {
  if (const int rc = cmd_extract(cfg); rc != 0) return rc;
  cfg.features.clear();
  cmd_stats(cfg);
  return cmd_classify(cfg);
}

int cmd_fixtures(const Config& cfg, const CorpusOptions& corpus) {
  const auto profile = load_profile(cfg.profile);
  const auto manifest = write_corpus(cfg.out, corpus, profile, cfg.profile);
  fmt::print("{}\n", manifest.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acoustic intelligibility measurements and severity classification for dysarthric speech"};
  app.require_subcommand(1);
  Config cfg;
  CorpusOptions corpus;

  auto add_manifest = [&](CLI::App* sub) {
    sub->add_option("--manifest", cfg.manifest, "JSON-lines manifest")->required()->check(CLI::ExistingFile);
    sub->add_option("--profile", cfg.profile, "language profile JSON")->required()->check(CLI::ExistingFile);
  };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", cfg.out, "output directory"); };
  auto add_features = [&](CLI::App* sub) {
    sub->add_option("--features", cfg.features, "feature CSV (default: <out>/features.csv)");
  };
  auto add_extract = [&](CLI::App* sub) {
    sub->add_option("--jobs", cfg.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--dump-alignments", cfg.dump_alignments, "write alignments.txt");
    sub->add_flag("--dump-contours", cfg.dump_contours, "write pitch and intensity contours as CSV");
  };
  auto add_classify = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "seed for every random choice");
    sub->add_option("--jobs", cfg.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--grid", cfg.grid, "C-list:gamma-list, e.g. 1e-4..1e4:1e-4..1e4");
    sub->add_option("--trees", cfg.trees, "extra-trees ensemble size")->check(CLI::PositiveNumber);
    sub->add_option("--columns", cfg.columns, "restrict classification to these measurements");
    auto* no_select = sub->add_flag("--no-select", cfg.no_select, "skip the selected-feature run");
    sub->add_flag("--selection-outside-cv", cfg.selection_outside_cv,
                  "select features once on all utterances before cross-validation")
        ->excludes(no_select);
  };

  auto* extract = app.add_subcommand("extract", "compute the 39 measurements per utterance");
  add_manifest(extract);
  add_out(extract);
  add_extract(extract);

  auto* stats = app.add_subcommand("stats", "group means, Kruskal-Wallis and normality tests");
  add_features(stats);
  add_out(stats);

  auto* classify = app.add_subcommand("classify", "leave-one-speaker-out SVM classification");
  add_features(classify);
  add_out(classify);
  add_classify(classify);

  auto* report = app.add_subcommand("report", "extract, stats and classify in one run");
  add_manifest(report);
  add_out(report);
  report->add_flag("--dump-alignments", cfg.dump_alignments, "write alignments.txt");
  report->add_flag("--dump-contours", cfg.dump_contours, "write pitch and intensity contours as CSV");
  add_classify(report);

  auto* fixtures = app.add_subcommand("fixtures", "synthetic corpora");
  fixtures->require_subcommand(1);
  auto* generate = fixtures->add_subcommand("generate", "write a synthetic corpus with manifest, audio and tiers");
  generate->add_option("--out", cfg.out, "output directory")->required();
  generate->add_option("--speakers", corpus.speakers, "number of speakers")->check(CLI::PositiveNumber);
  generate->add_option("--utts-per-speaker", corpus.utterances_per_speaker, "utterances per speaker")
      ->check(CLI::PositiveNumber);
  generate->add_option("--seed", corpus.seed, "generator seed");
  cfg.profile = DYSARTHRIA_DEFAULT_PROFILE;
  generate->add_option("--profile", cfg.profile, "language profile JSON")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) return cmd_extract(cfg);
    if (*stats) return cmd_stats(cfg);
    if (*classify) return cmd_classify(cfg);
    if (*report) return cmd_report(cfg);
    if (*generate) return cmd_fixtures(cfg, corpus);
  } catch (const Error& e) {
    fmt::print(stderr, "error: [{}] {}\n", to_string(e.code()), e.what());
    return kExitError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitError;
  }
  return 0;
}
