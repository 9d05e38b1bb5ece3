#include "dysarthria/fixtures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "dysarthria/error.hpp"
#include "dysarthria/random.hpp"

namespace dysarthria {

namespace {

// Glottal flow t^2 (Te - t) over the open phase (KLGLOTT88), closing abruptly
// after this fraction of the period.
constexpr double kOpenQuotient = 0.6;
constexpr std::size_t kOversample = 8;
// Per-speaker voice, drawn regardless of severity.
constexpr std::pair<double, double> kJitterRange{0.5, 3.0};
constexpr std::pair<double, double> kShimmerRange{2.0, 8.0};
constexpr std::pair<double, double> kHnrRange{10.0, 25.0};
// Per-speaker multipliers around the severity values, narrow enough that
// adjacent severities never overlap.
constexpr std::pair<double, double> kTempoSpread{0.95, 1.05};
constexpr std::pair<double, double> kCentralSpread{0.85, 1.15};

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidSpec, what);
}

void validate(const SynthSpec& spec, const LanguageProfile& profile) {
  require(spec.sample_rate >= 8000, "sample rate below 8000 Hz");
  require(spec.f0_start >= 80.0 && spec.f0_start <= 400.0 && spec.f0_end >= 80.0 && spec.f0_end <= 400.0,
          "F0 outside 80-400 Hz");
  require(spec.jitter_pct >= 0.0 && spec.jitter_pct <= 10.0, "jitter outside 0-10 %");
  require(spec.shimmer_pct >= 0.0 && spec.shimmer_pct <= 30.0, "shimmer outside 0-30 %");
  require(!spec.hnr_db || (*spec.hnr_db >= 0.0 && *spec.hnr_db <= 40.0), "HNR outside 0-40 dB");
  require(spec.amplitude > 0.0 && spec.amplitude <= 1.0, "amplitude outside (0, 1]");
  require(spec.consonant_level >= 0.0, "negative consonant level");
  require(spec.centralization >= 0.0 && spec.centralization <= 1.0, "centralization outside [0, 1]");
  require(spec.formant_scale > 0.5 && spec.formant_scale < 2.0, "formant scale outside (0.5, 2)");
  require(spec.decode_error_rate >= 0.0 && spec.decode_error_rate <= 1.0, "error rate outside [0, 1]");
  require(!spec.plan.empty(), "empty interval plan");
  for (const auto& phone : spec.plan) {
    require(phone.duration > 0.0, "non-positive duration for '" + phone.label + "'");
    require(profile.classify(phone.label) != PhoneClass::Unknown, "label '" + phone.label + "' not in profile");
  }
}

struct VoicedRun {
  double start = 0.0;
  double end = 0.0;
};

std::vector<VoicedRun> voiced_runs(const std::vector<Interval>& intervals, const LanguageProfile& profile) {
  std::vector<VoicedRun> runs;
  for (const auto& iv : intervals) {
    if (profile.classify(iv.label) != PhoneClass::Vowel) continue;
    if (!runs.empty() && std::abs(runs.back().end - iv.start) < 1e-12) {
      runs.back().end = iv.end;
    } else {
      runs.push_back({iv.start, iv.end});
    }
  }
  return runs;
}

double relative_mean_difference(const std::vector<std::vector<double>>& runs) {
  double diff = 0.0;
  double total = 0.0;
  std::size_t pairs = 0;
  std::size_t count = 0;
  for (const auto& run : runs) {
    for (std::size_t k = 0; k < run.size(); ++k) {
      total += run[k];
      ++count;
      if (k + 1 < run.size()) {
        diff += std::abs(run[k] - run[k + 1]);
        ++pairs;
      }
    }
  }
  if (pairs == 0 || total <= 0.0) return 0.0;
  return 100.0 * (diff / static_cast<double>(pairs)) / (total / static_cast<double>(count));
}

// Pulse schedule for a given perturbation depth; draws are indexed so that
// repeated calls with different depths see the same random sequence.
struct Schedule {
  std::vector<std::vector<double>> times;
  std::vector<std::vector<double>> periods;
};

Schedule schedule_pulses(const std::vector<VoicedRun>& runs, const SynthSpec& spec, double total,
                         const std::vector<double>& draws, double depth) {
  Schedule s;
  std::size_t k = 0;
  for (const auto& run : runs) {
    std::vector<double> times;
    double t = run.start + 0.001;
    while (t < run.end) {
      times.push_back(t);
      const double f0 = spec.f0_start + (spec.f0_end - spec.f0_start) * (t / total);
      const double u = k < draws.size() ? draws[k] : 0.0;
      ++k;
      t += (1.0 + depth * u) / f0;
    }
    std::vector<double> periods;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) periods.push_back(times[i + 1] - times[i]);
    s.times.push_back(std::move(times));
    s.periods.push_back(std::move(periods));
  }
  return s;
}

// Finds the depth whose realized perturbation equals the target by repeated rescaling.
template <typename Measure>
double calibrate(double target_pct, Measure measure) {
  if (target_pct <= 0.0) return 0.0;
  double depth = 1.5 * target_pct / 100.0;
  for (int iter = 0; iter < 12; ++iter) {
    const double realized = measure(depth);
    if (realized <= 0.0) break;
    depth *= target_pct / realized;
  }
  return depth;
}

std::vector<Resonance> shifted(std::vector<Resonance> formants, const SynthSpec& spec) {
  constexpr double kNeutral[] = {500.0, 1500.0, 2500.0};
  for (std::size_t i = 0; i < formants.size(); ++i) {
    auto& f = formants[i].frequency;
    if (i < 3) f += spec.centralization * (kNeutral[i] - f);
    f *= spec.formant_scale;
  }
  return formants;
}

}  // namespace

std::vector<Resonance> default_vowel_formants(const std::string& vowel, const LanguageProfile& profile) {
  auto make = [](double f1, double f2, double f3) {
    return std::vector<Resonance>{{f1, 80.0}, {f2, 100.0}, {f3, 150.0}};
  };
  for (const auto& [role, symbol] : profile.corners()) {
    if (symbol != vowel) continue;
    switch (role) {
      case CornerVowel::I: return make(300.0, 2300.0, 3000.0);
      case CornerVowel::A: return make(850.0, 1220.0, 2600.0);
      case CornerVowel::U: return make(320.0, 900.0, 2300.0);
      case CornerVowel::AE: return make(700.0, 1800.0, 2600.0);
    }
  }
  static constexpr double kMid[][2] = {{500.0, 1500.0}, {450.0, 1900.0}, {600.0, 1000.0},
                                       {550.0, 1700.0}, {400.0, 1100.0}, {650.0, 1300.0}};
  const std::size_t h = std::accumulate(vowel.begin(), vowel.end(), std::size_t{0},
                                        [](std::size_t acc, char c) { return acc * 31 + static_cast<unsigned char>(c); });
  const auto& m = kMid[h % std::size(kMid)];
  return make(m[0], m[1], 2500.0);
}

std::vector<std::string> inject_errors(const std::vector<std::string>& canonical, double rate,
                                       const LanguageProfile& profile, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<std::string> vowels(profile.vowels().begin(), profile.vowels().end());
  const std::vector<std::string> consonants(profile.consonants().begin(), profile.consonants().end());
  auto other = [&](const std::string& symbol) {
    const auto& pool = profile.classify(symbol) == PhoneClass::Vowel ? vowels : consonants;
    if (pool.size() < 2) return symbol;
    while (true) {
      const auto& pick = pool[rng.index(pool.size())];
      if (pick != symbol) return pick;
    }
  };
  std::vector<std::string> decoded;
  for (const auto& symbol : canonical) {
    if (!rng.bernoulli(rate)) {
      decoded.push_back(symbol);
      continue;
    }
    const double kind = rng.uniform();
    if (kind < 0.6) {
      decoded.push_back(other(symbol));
    } else if (kind < 0.85) {
      continue;
    } else {
      decoded.push_back(symbol);
      decoded.push_back(other(symbol));
    }
  }
  return decoded;
}

namespace {

// Blackman-windowed sinc passing up to 0.45 of the output rate.
std::vector<double> decimation_filter() {
  constexpr std::size_t kLength = 16 * kOversample + 1;
  const double cutoff = 0.45 / static_cast<double>(kOversample);
  std::vector<double> taps(kLength);
  double sum = 0.0;
  for (std::size_t j = 0; j < kLength; ++j) {
    const double x = static_cast<double>(j) - static_cast<double>(kLength - 1) / 2.0;
    const double sinc = x == 0.0 ? 1.0 : std::sin(2.0 * std::numbers::pi * cutoff * x) / (2.0 * std::numbers::pi * cutoff * x);
    const double w = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(kLength - 1);
    taps[j] = sinc * (0.42 - 0.5 * std::cos(w) + 0.08 * std::cos(2.0 * w));
    sum += taps[j];
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

// Cascade of second-order resonators whose coefficients follow the vowel of
// the current interval; consonants and silences keep the last vowel's setting.
std::vector<double> resonate(const std::vector<double>& input, int rate, const std::vector<Interval>& intervals,
                             const std::vector<std::vector<Resonance>>& formants_by_interval,
                             std::vector<Resonance> current) {
  std::vector<double> output(input.size(), 0.0);
  std::vector<std::array<double, 2>> state(current.size(), {0.0, 0.0});
  std::size_t which = 0;
  for (std::size_t m = 0; m < input.size(); ++m) {
    const double time = static_cast<double>(m) / rate;
    while (which + 1 < intervals.size() && time >= intervals[which].end) ++which;
    if (!formants_by_interval[which].empty()) current = formants_by_interval[which];
    double v = input[m];
    for (std::size_t f = 0; f < current.size() && f < state.size(); ++f) {
      const double c = -std::exp(-2.0 * std::numbers::pi * current[f].bandwidth / rate);
      const double b = 2.0 * std::exp(-std::numbers::pi * current[f].bandwidth / rate) *
                       std::cos(2.0 * std::numbers::pi * current[f].frequency / rate);
      const double a = 1.0 - b - c;
      const double y = a * v + b * state[f][0] + c * state[f][1];
      state[f][1] = state[f][0];
      state[f][0] = y;
      v = y;
    }
    output[m] = v;
  }
  return output;
}

}  // namespace

SynthResult synthesize(const SynthSpec& spec, const LanguageProfile& profile) {
  validate(spec, profile);
  const int rate = spec.sample_rate;

  std::vector<Interval> intervals;
  double t = 0.0;
  for (const auto& phone : spec.plan) {
    intervals.push_back({t, t + phone.duration, phone.label});
    t += phone.duration;
  }
  const double total = t;
  const auto n = static_cast<std::size_t>(std::ceil(total * rate));

  SynthResult out;
  for (const auto& iv : intervals) {
    if (profile.is_phoneme(iv.label)) out.canonical.push_back(iv.label);
  }
  out.decoded = inject_errors(out.canonical, spec.decode_error_rate, profile, derive_seed(spec.seed, 1));

  Rng draws_rng(derive_seed(spec.seed, 2));
  const auto runs = voiced_runs(intervals, profile);
  const std::size_t max_pulses = static_cast<std::size_t>(total * 400.0 * 1.2) + 16;
  std::vector<double> period_draws(max_pulses);
  std::vector<double> amplitude_draws(max_pulses);
  for (auto& u : period_draws) u = draws_rng.uniform(-1.0, 1.0);
  for (auto& v : amplitude_draws) v = draws_rng.uniform(-1.0, 1.0);

  const double depth = calibrate(spec.jitter_pct, [&](double d) {
    return relative_mean_difference(schedule_pulses(runs, spec, total, period_draws, d).periods);
  });
  const auto schedule = schedule_pulses(runs, spec, total, period_draws, depth);

  auto gains_for = [&](double shimmer_depth) {
    std::vector<std::vector<double>> gains;
    std::size_t k = 0;
    for (const auto& times : schedule.times) {
      std::vector<double> g;
      for (std::size_t i = 0; i < times.size(); ++i) g.push_back(1.0 + shimmer_depth * amplitude_draws[k++]);
      gains.push_back(std::move(g));
    }
    return gains;
  };
  const double shimmer_depth =
      calibrate(spec.shimmer_pct, [&](double d) { return relative_mean_difference(gains_for(d)); });
  const auto gains = gains_for(shimmer_depth);

  // The closure is a discontinuity, so the source is built at a higher rate
  // and low-passed before decimation to keep it free of aliasing.
  const std::size_t fine_rate = static_cast<std::size_t>(rate) * kOversample;
  std::vector<double> fine(n * kOversample, 0.0);
  for (std::size_t r = 0; r < schedule.times.size(); ++r) {
    for (std::size_t i = 0; i < schedule.times[r].size(); ++i) {
      const double t0 = schedule.times[r][i];
      const double nominal = 1.0 / (spec.f0_start + (spec.f0_end - spec.f0_start) * (t0 / total));
      const double open = kOpenQuotient * nominal;
      const auto first = static_cast<std::size_t>(std::ceil(t0 * static_cast<double>(fine_rate)));
      for (std::size_t m = first; m < fine.size(); ++m) {
        const double tau = static_cast<double>(m) / static_cast<double>(fine_rate) - t0;
        if (tau >= open) break;
        const double flow_slope = 2.0 * tau / (open * open) - 3.0 * tau * tau / (open * open * open);
        fine[m] += gains[r][i] * nominal * flow_slope;
      }
    }
  }
  const auto taps = decimation_filter();
  const auto half = static_cast<std::ptrdiff_t>(taps.size() / 2);
  std::vector<double> source(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    const auto center = static_cast<std::ptrdiff_t>(m * kOversample);
    double acc = 0.0;
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(taps.size()); ++j) {
      const auto k = center + j - half;
      if (k >= 0 && k < static_cast<std::ptrdiff_t>(fine.size())) acc += taps[static_cast<std::size_t>(j)] * fine[static_cast<std::size_t>(k)];
    }
    source[m] = acc;
  }

  std::vector<std::vector<Resonance>> formants_by_interval;
  for (const auto& iv : intervals) {
    auto found = spec.vowel_formants.find(iv.label);
    formants_by_interval.push_back(profile.classify(iv.label) != PhoneClass::Vowel ? std::vector<Resonance>{}
                                   : found != spec.vowel_formants.end()
                                       ? shifted(found->second, spec)
                                       : shifted(default_vowel_formants(iv.label, profile), spec));
  }
  std::vector<Resonance> initial = formants_by_interval.front();
  if (initial.empty()) initial = shifted(default_vowel_formants(*profile.corner_symbol(CornerVowel::A), profile), spec);
  auto vocal_tract = [&](const std::vector<double>& input) {
    return resonate(input, rate, intervals, formants_by_interval, initial);
  };

  std::vector<double> periodic = vocal_tract(source);
  const double peak = std::accumulate(periodic.begin(), periodic.end(), 0.0,
                                      [](double acc, double v) { return std::max(acc, std::abs(v)); });
  if (peak > 0.0) {
    for (auto& v : periodic) v *= spec.amplitude / peak;
  }

  Rng noise_rng(derive_seed(spec.seed, 3));
  std::vector<double> samples = periodic;
  if (spec.hnr_db) {
    std::vector<double> turbulence(n, 0.0);
    for (const auto& run : runs) {
      const auto a = static_cast<std::size_t>(run.start * rate);
      const auto b = std::min(n, static_cast<std::size_t>(run.end * rate));
      for (std::size_t m = a; m < b; ++m) turbulence[m] = noise_rng.normal();
    }
    const auto aspiration = vocal_tract(turbulence);
    for (const auto& run : runs) {
      const auto a = static_cast<std::size_t>(run.start * rate);
      const auto b = std::min(n, static_cast<std::size_t>(run.end * rate));
      if (b <= a) continue;
      double power = 0.0;
      double noise_power = 0.0;
      for (std::size_t m = a; m < b; ++m) {
        power += periodic[m] * periodic[m];
        noise_power += aspiration[m] * aspiration[m];
      }
      if (!(noise_power > 0.0)) continue;
      const double gain = std::sqrt(power / noise_power / std::pow(10.0, *spec.hnr_db / 10.0));
      for (std::size_t m = a; m < b; ++m) samples[m] += gain * aspiration[m];
    }
  }
  const double consonant_sigma = spec.consonant_level * spec.amplitude / 0.5;
  for (const auto& iv : intervals) {
    if (profile.classify(iv.label) != PhoneClass::Consonant) continue;
    const auto a = static_cast<std::size_t>(iv.start * rate);
    const auto b = std::min(n, static_cast<std::size_t>(iv.end * rate));
    for (std::size_t m = a; m < b; ++m) samples[m] += consonant_sigma * noise_rng.normal();
  }
  for (auto& v : samples) v = std::clamp(v, -1.0, 1.0);

  out.clip = AudioClip(std::move(samples), rate);
  out.tier = AnnotationTier(std::move(intervals));
  for (const auto& times : schedule.times) out.pulse_times.insert(out.pulse_times.end(), times.begin(), times.end());
  out.periods = schedule.periods;
  out.amplitudes = gains;
  return out;
}

SeverityParameters severity_parameters(Severity severity) noexcept {
  switch (severity) {
    case Severity::Healthy: return {0.00, 1.00, 0, 0.00};
    case Severity::Mild: return {0.15, 1.25, 1, 0.15};
    case Severity::Moderate: return {0.40, 1.60, 2, 0.30};
    case Severity::Severe: return {0.70, 2.00, 3, 0.45};
  }
  return {};
}

namespace {

std::vector<PhonePlan> plan_utterance(Rng& rng, const LanguageProfile& profile, const SeverityParameters& p) {
  const std::vector<std::string> nuclei(profile.nuclei().begin(), profile.nuclei().end());
  const std::vector<std::string> consonants(profile.consonants().begin(), profile.consonants().end());
  const std::string silence = profile.silence_symbol();

  const int syllables = 18 + static_cast<int>(rng.index(5));
  std::vector<std::string> vowels;
  for (auto role : {CornerVowel::I, CornerVowel::A, CornerVowel::U}) vowels.push_back(*profile.corner_symbol(role));
  if (auto ae = profile.corner_symbol(CornerVowel::AE); ae && rng.bernoulli(0.7)) vowels.push_back(*ae);
  while (static_cast<int>(vowels.size()) < syllables) vowels.push_back(nuclei[rng.index(nuclei.size())]);
  for (std::size_t i = vowels.size(); i > 1; --i) std::swap(vowels[i - 1], vowels[rng.index(i)]);

  std::vector<bool> pause_after(static_cast<std::size_t>(syllables), false);
  for (int k = 0; k < p.pauses; ++k) {
    std::size_t pos;
    do {
      pos = 1 + rng.index(static_cast<std::size_t>(syllables) - 2);
    } while (pause_after[pos]);
    pause_after[pos] = true;
  }

  const auto corners = profile.corners();
  auto is_corner = [&](const std::string& v) {
    return std::any_of(corners.begin(), corners.end(), [&](const auto& c) { return c.second == v; });
  };
  std::vector<PhonePlan> plan{{silence, rng.uniform(0.15, 0.30)}};
  for (int s = 0; s < syllables; ++s) {
    if (rng.bernoulli(0.85)) plan.push_back({consonants[rng.index(consonants.size())], p.duration_scale * rng.uniform(0.05, 0.09)});
    const auto& v = vowels[static_cast<std::size_t>(s)];
    const double base = is_corner(v) ? rng.uniform(0.12, 0.18) : rng.uniform(0.10, 0.16);
    plan.push_back({v, p.duration_scale * base});
    if (rng.bernoulli(0.35)) plan.push_back({consonants[rng.index(consonants.size())], p.duration_scale * rng.uniform(0.05, 0.09)});
    if (pause_after[static_cast<std::size_t>(s)]) plan.push_back({silence, rng.uniform(0.15, 0.35)});
  }
  plan.push_back({silence, rng.uniform(0.15, 0.30)});
  return plan;
}

}  // namespace

std::vector<CorpusUtterance> plan_corpus(const CorpusOptions& options, const LanguageProfile& profile) {
  if (options.speakers < 1 || options.utterances_per_speaker < 1) {
    throw Error(ErrorCode::InvalidSpec, "corpus needs at least one speaker and one utterance");
  }
  std::vector<CorpusUtterance> corpus;
  for (int k = 0; k < options.speakers; ++k) {
    const Severity severity = kSeverities[static_cast<std::size_t>(k % 4)];
    auto params = severity_parameters(severity);
    Rng speaker_rng(derive_seed(options.seed, static_cast<std::uint64_t>(k)));
    const double f0 = speaker_rng.uniform(100.0, 170.0);
    const double formant_scale = speaker_rng.uniform(0.96, 1.06);
    const double jitter = speaker_rng.uniform(kJitterRange.first, kJitterRange.second);
    const double shimmer = speaker_rng.uniform(kShimmerRange.first, kShimmerRange.second);
    const double hnr = speaker_rng.uniform(kHnrRange.first, kHnrRange.second);
    params.duration_scale *= speaker_rng.uniform(kTempoSpread.first, kTempoSpread.second);
    params.centralization *= speaker_rng.uniform(kCentralSpread.first, kCentralSpread.second);
    const std::string speaker = fmt::format("S{:02d}", k + 1);

    for (int u = 0; u < options.utterances_per_speaker; ++u) {
      const auto utt_seed = derive_seed(derive_seed(options.seed, static_cast<std::uint64_t>(k)), static_cast<std::uint64_t>(u) + 100);
      Rng rng(utt_seed);
      CorpusUtterance cu;
      auto& spec = cu.spec;
      spec.sample_rate = options.sample_rate;
      spec.f0_start = f0 * 1.08;
      spec.f0_end = f0 * 0.92;
      spec.jitter_pct = jitter;
      spec.shimmer_pct = shimmer;
      spec.hnr_db = hnr;
      spec.amplitude = rng.uniform(0.3, 0.6);
      spec.centralization = params.centralization;
      spec.formant_scale = formant_scale;
      spec.decode_error_rate = params.error_rate;
      spec.plan = plan_utterance(rng, profile, params);
      spec.seed = utt_seed;

      auto& rec = cu.record;
      rec.utterance_id = fmt::format("{}_u{}", speaker, u + 1);
      rec.speaker_id = speaker;
      rec.severity = severity;
      rec.audio_path = std::filesystem::path("audio") / (rec.utterance_id + ".wav");
      rec.annotation_path = std::filesystem::path("tiers") / (rec.utterance_id + ".txt");
      for (const auto& phone : spec.plan) {
        if (profile.is_phoneme(phone.label)) rec.canonical.push_back(phone.label);
      }
      rec.decoded = inject_errors(rec.canonical, spec.decode_error_rate, profile, derive_seed(spec.seed, 1));
      corpus.push_back(std::move(cu));
    }
  }
  return corpus;
}

std::filesystem::path write_corpus(const std::filesystem::path& out_dir, const CorpusOptions& options,
                                   const LanguageProfile& profile, const std::filesystem::path& profile_path) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "audio");
  fs::create_directories(out_dir / "tiers");
  const auto manifest_path = out_dir / "manifest.jsonl";
  std::ofstream manifest(manifest_path, std::ios::binary);
  if (!manifest) throw Error(ErrorCode::IoError, "cannot write " + manifest_path.string());

  for (const auto& cu : plan_corpus(options, profile)) {
    const auto synth = synthesize(cu.spec, profile);
    write_wav(out_dir / cu.record.audio_path, synth.clip, WavEncoding::Float32);
    std::ofstream tier(out_dir / cu.record.annotation_path, std::ios::binary);
    if (!tier) throw Error(ErrorCode::IoError, "cannot write " + (out_dir / cu.record.annotation_path).string());
    tier << to_plain_tier(synth.tier);
    manifest << to_manifest_line(cu.record) << '\n';
  }
  if (!profile_path.empty()) fs::copy_file(profile_path, out_dir / "profile.json", fs::copy_options::overwrite_existing);
  return manifest_path;
}

}  // namespace dysarthria
