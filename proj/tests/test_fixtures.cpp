#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "dysarthria/annotation.hpp"
#include "dysarthria/error.hpp"
#include "dysarthria/fixtures.hpp"
#include "dysarthria/pronunciation.hpp"
#include "dysarthria/signal.hpp"
#include "dysarthria/voice_quality.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace dysarthria;
using testing::english;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

SynthSpec vowel_spec(double jitter, double shimmer, std::optional<double> hnr, std::uint64_t seed) {
  SynthSpec spec;
  spec.f0_start = spec.f0_end = 110.0;
  spec.jitter_pct = jitter;
  spec.shimmer_pct = shimmer;
  spec.hnr_db = hnr;
  spec.plan = {{"AA", 1.0}};
  spec.seed = seed;
  return spec;
}

double all_runs_perturbation(const std::vector<std::vector<double>>& runs) {
  double diffs = 0.0, sum = 0.0;
  std::size_t n_diff = 0, n = 0;
  for (const auto& r : runs) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      sum += r[i];
      ++n;
      if (i > 0) {
        diffs += std::abs(r[i] - r[i - 1]);
        ++n_diff;
      }
    }
  }
  return 100.0 * (diffs / static_cast<double>(n_diff)) / (sum / static_cast<double>(n));
}

}  // namespace

TEST_CASE("generator-side perturbation oracles") {
  for (double target : {1.0, 2.0, 5.0, 10.0}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      CAPTURE(target);
      CAPTURE(seed);
      const auto synth = synthesize(vowel_spec(target, 0.0, std::nullopt, seed), english());
      REQUIRE(synth.periods.size() == 1);
      CHECK(std::abs(oracle::local_perturbation(synth.periods[0]) - target) <= 0.05);
      CHECK(synth.periods[0].size() + 1 == synth.pulse_times.size());
    }
  }
  for (double target : {3.0, 8.0}) {
    const auto synth = synthesize(vowel_spec(0.0, target, std::nullopt, 4), english());
    CHECK(std::abs(oracle::local_perturbation(synth.amplitudes[0]) - target) <= 0.05);
  }
  SUBCASE("runs split at every unvoiced interval") {
    auto spec = vowel_spec(2.0, 4.0, std::nullopt, 6);
    spec.plan = {{"AA", 0.3}, {"S", 0.08}, {"IY", 0.3}, {"sil", 0.2}, {"UW", 0.3}};
    const auto synth = synthesize(spec, english());
    REQUIRE(synth.periods.size() == 3);
    CHECK(std::abs(all_runs_perturbation(synth.periods) - 2.0) <= 0.05);
    for (double t : synth.pulse_times) {
      const bool in_vowel = (t >= 0.0 && t < 0.3) || (t >= 0.38 && t < 0.68) || (t >= 0.88 && t < 1.18);
      CHECK(in_vowel);
    }
  }
}

TEST_CASE("clean synthesis measures clean") {
  for (double f0 : {100.0, 150.0, 220.0}) {
    CAPTURE(f0);
    auto spec = vowel_spec(0.0, 0.0, std::nullopt, 8);
    spec.f0_start = spec.f0_end = f0;
    const auto synth = synthesize(spec, english());
    const auto contour = pitch_track(synth.clip);
    const auto f = voice_quality_features(synth.clip, contour, detect_pulses(synth.clip, contour));
    REQUIRE(f.jitter_local.has_value());
    CHECK(*f.jitter_local < 0.2);
    REQUIRE(f.hnr.has_value());
    CHECK(*f.hnr > 30.0);
  }
}

TEST_CASE("annotation and sequences follow the plan") {
  SynthSpec spec;
  spec.plan = {{"sil", 0.2}, {"K", 0.07}, {"AA", 0.15}, {"T", 0.06}, {"sil", 0.2}, {"IY", 0.14}, {"sil", 0.1}};
  spec.seed = 12;
  const auto synth = synthesize(spec, english());
  REQUIRE(synth.tier.size() == spec.plan.size());
  double t = 0.0;
  for (std::size_t i = 0; i < spec.plan.size(); ++i) {
    const auto& iv = synth.tier.intervals()[i];
    CHECK(iv.label == spec.plan[i].label);
    CHECK(iv.start == doctest::Approx(t).epsilon(1e-12));
    t += spec.plan[i].duration;
    CHECK(iv.end == doctest::Approx(t).epsilon(1e-12));
  }
  CHECK(synth.clip.duration() == doctest::Approx(t).epsilon(1e-3));
  CHECK(synth.canonical == std::vector<std::string>{"K", "AA", "T", "IY"});
  CHECK(synth.decoded == synth.canonical);

  // Silences are digital zero.
  const auto samples = synth.clip.samples();
  for (std::size_t i = 0; i < static_cast<std::size_t>(0.19 * 16000); ++i) CHECK(samples[i] == 0.0);
}

TEST_CASE("planned pause recovered from energy") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    CAPTURE(seed);
    SynthSpec spec;
    spec.plan = {{"AA", 0.3}, {"IY", 0.2}, {"sil", 0.2}, {"UW", 0.25}, {"AA", 0.2}};
    spec.hnr_db = 20.0;
    spec.seed = seed;
    const auto synth = synthesize(spec, english());
    const double frame = 0.010;
    const auto segments = segment_silence(synth.clip, nullptr, english());
    std::vector<Segment> silent;
    for (const auto& s : segments) {
      if (s.silent) silent.push_back(s);
    }
    REQUIRE(silent.size() == 1);
    CHECK(std::abs(silent[0].start - 0.5) <= frame);
    CHECK(std::abs(silent[0].end - 0.7) <= frame);
    // With the tier, the pause is exact.
    const auto from_tier = segment_silence(synth.clip, &synth.tier, english());
    CHECK(std::count_if(from_tier.begin(), from_tier.end(), [](const Segment& s) { return s.silent; }) == 1);
  }
}

TEST_CASE("determinism") {
  SynthSpec spec;
  spec.plan = {{"sil", 0.1}, {"K", 0.07}, {"AA", 0.2}, {"S", 0.08}, {"IY", 0.2}, {"sil", 0.1}};
  spec.jitter_pct = 1.5;
  spec.shimmer_pct = 4.0;
  spec.hnr_db = 15.0;
  spec.decode_error_rate = 0.5;
  spec.seed = 77;
  const auto a = synthesize(spec, english());
  const auto b = synthesize(spec, english());
  CHECK(std::equal(a.clip.samples().begin(), a.clip.samples().end(), b.clip.samples().begin(), b.clip.samples().end()));
  CHECK(a.periods == b.periods);
  CHECK(a.decoded == b.decoded);
  spec.seed = 78;
  const auto c = synthesize(spec, english());
  CHECK_FALSE(std::equal(a.clip.samples().begin(), a.clip.samples().end(), c.clip.samples().begin(),
                         c.clip.samples().end()));

  CorpusOptions options;
  options.speakers = 4;
  options.utterances_per_speaker = 2;
  const auto p1 = plan_corpus(options, english());
  const auto p2 = plan_corpus(options, english());
  REQUIRE(p1.size() == 8);
  for (std::size_t i = 0; i < p1.size(); ++i) {
    CHECK(to_manifest_line(p1[i].record) == to_manifest_line(p2[i].record));
    CHECK(p1[i].spec.seed == p2[i].spec.seed);
  }
}

TEST_CASE("invalid specifications") {
  auto bad = [](auto&& mutate) {
    auto spec = vowel_spec(1.0, 1.0, 20.0, 1);
    mutate(spec);
    return code_of([&] { synthesize(spec, english()); });
  };
  CHECK(bad([](SynthSpec& s) { s.f0_start = 500.0; }) == ErrorCode::InvalidSpec);
  CHECK(bad([](SynthSpec& s) { s.f0_end = 60.0; }) == ErrorCode::InvalidSpec);
  CHECK(bad([](SynthSpec& s) { s.jitter_pct = 12.0; }) == ErrorCode::InvalidSpec);
  CHECK(bad([](SynthSpec& s) { s.hnr_db = 45.0; }) == ErrorCode::InvalidSpec);
  CHECK(bad([](SynthSpec& s) { s.hnr_db = -1.0; }) == ErrorCode::InvalidSpec);
  CHECK(bad([](SynthSpec& s) { s.plan.clear(); }) == ErrorCode::InvalidSpec);
  CHECK(bad([](SynthSpec& s) { s.plan = {{"QQ", 0.1}}; }) == ErrorCode::InvalidSpec);
  CHECK(bad([](SynthSpec& s) { s.plan = {{"AA", 0.0}}; }) == ErrorCode::InvalidSpec);
  CHECK(bad([](SynthSpec& s) { s.decode_error_rate = 1.5; }) == ErrorCode::InvalidSpec);

  CorpusOptions none;
  none.speakers = 0;
  CHECK(code_of([&] { plan_corpus(none, english()); }) == ErrorCode::InvalidSpec);
}

TEST_CASE("decoding error injection") {
  const std::vector<std::string> canonical{"K", "AA", "T", "IY", "S", "UW", "N", "AE", "L", "IH", "M", "EH"};
  CHECK(inject_errors(canonical, 0.0, english(), 3) == canonical);

  // Mean PCC over many draws falls monotonically with severity.
  double previous = 101.0;
  for (auto severity : kSeverities) {
    const double rate = severity_parameters(severity).error_rate;
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto decoded = inject_errors(canonical, rate, english(), seed);
      total += phoneme_correctness(align_phoneme_sequences(canonical, decoded), english()).pcp;
    }
    const double mean_pcp = total / 200.0;
    CAPTURE(to_string(severity));
    CHECK(mean_pcp < previous);
    previous = mean_pcp;
  }
  CHECK(severity_parameters(Severity::Healthy).error_rate == 0.0);
  CHECK(severity_parameters(Severity::Mild).error_rate == 0.15);
  CHECK(severity_parameters(Severity::Moderate).error_rate == 0.40);
  CHECK(severity_parameters(Severity::Severe).error_rate == 0.70);

  SUBCASE("substitutions stay within the phone class") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto decoded = inject_errors(canonical, 1.0, english(), seed);
      for (const auto& s : decoded) CHECK(english().is_phoneme(s));
    }
  }
}

TEST_CASE("corpus plan") {
  CorpusOptions options;
  options.speakers = 8;
  options.utterances_per_speaker = 3;
  const auto corpus = plan_corpus(options, english());
  REQUIRE(corpus.size() == 24);

  std::map<Severity, std::set<std::string>> by_severity;
  std::map<std::string, double> jitter_of;
  for (const auto& cu : corpus) {
    by_severity[cu.record.severity].insert(cu.record.speaker_id);
    // One voice per speaker, whatever the utterance.
    auto [it, fresh] = jitter_of.emplace(cu.record.speaker_id, cu.spec.jitter_pct);
    if (!fresh) CHECK(it->second == cu.spec.jitter_pct);

    int nuclei = 0;
    for (const auto& phone : cu.spec.plan) nuclei += english().is_nucleus(phone.label) ? 1 : 0;
    CHECK(nuclei >= 18);
    CHECK(cu.record.canonical.size() >= 18);
    CHECK(cu.spec.decode_error_rate == severity_parameters(cu.record.severity).error_rate);

    int pauses = 0;
    for (std::size_t i = 1; i + 1 < cu.spec.plan.size(); ++i) pauses += english().is_silence(cu.spec.plan[i].label) ? 1 : 0;
    CHECK(pauses == severity_parameters(cu.record.severity).pauses);
    if (cu.record.severity == Severity::Healthy) CHECK(cu.record.decoded == cu.record.canonical);
  }
  for (auto s : kSeverities) CHECK(by_severity[s].size() == 2);
  // Voice quality is drawn per speaker, not per severity.
  std::set<double> distinct;
  for (const auto& [speaker, j] : jitter_of) distinct.insert(j);
  CHECK(distinct.size() == 8);
}

TEST_CASE("corpus on disk") {
  testing::TempDir dir;
  CorpusOptions options;
  options.speakers = 2;
  options.utterances_per_speaker = 2;
  const auto manifest = write_corpus(dir.path(), options, english(), testing::profile_path());
  CHECK(std::filesystem::exists(dir.path() / "profile.json"));
  const auto records = parse_manifest(manifest, english());
  REQUIRE(records.size() == 4);
  const auto planned = plan_corpus(options, english());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto clip = read_wav(records[i].audio_path);
    const auto tier = parse_annotation(records[i].annotation_path, english());
    const auto synth = synthesize(planned[i].spec, english());
    CHECK(clip.sample_rate() == 16000);
    CHECK(clip.size() == synth.clip.size());
    CHECK(tier.size() == synth.tier.size());
    CHECK(tier.fits_within(clip.duration()));
    CHECK(records[i].decoded == planned[i].record.decoded);
  }
}

TEST_CASE("default vowel formants") {
  const auto i = default_vowel_formants("IY", english());
  const auto a = default_vowel_formants("AA", english());
  const auto u = default_vowel_formants("UW", english());
  REQUIRE(i.size() >= 2);
  CHECK(i[0].frequency < a[0].frequency);
  CHECK(i[1].frequency > u[1].frequency);
  CHECK(a[0].frequency > u[0].frequency);
}
