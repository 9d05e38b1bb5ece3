#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dysarthria/annotation.hpp"
#include "dysarthria/audio.hpp"
#include "dysarthria/manifest.hpp"
#include "dysarthria/profile.hpp"

namespace dysarthria {

struct PhonePlan {
  std::string label;
  double duration = 0.0;  ///< s
};

struct Resonance {
  double frequency = 0.0;  ///< Hz
  double bandwidth = 0.0;  ///< Hz
};

struct SynthSpec {
  int sample_rate = 16000;
  /// F0 moves linearly from start to end over the utterance.
  double f0_start = 120.0;
  double f0_end = 110.0;
  double jitter_pct = 0.0;   ///< programmed local jitter of the period list
  double shimmer_pct = 0.0;  ///< programmed local shimmer of the amplitude list
  std::optional<double> hnr_db;  ///< empty: no additive noise in vowels
  double amplitude = 0.5;
  double consonant_level = 0.02;  ///< RMS of consonant noise
  /// Pulls vowel formants toward a neutral (500, 1500) Hz vowel; 0 keeps the targets.
  double centralization = 0.0;
  /// Multiplies every vowel formant (speaker vocal-tract length).
  double formant_scale = 1.0;
  double decode_error_rate = 0.0;
  std::vector<PhonePlan> plan;  ///< phones and silences back to back from t = 0
  /// Formants per vowel label; labels not listed fall back to built-in targets.
  std::map<std::string, std::vector<Resonance>> vowel_formants;
  std::uint64_t seed = 1;
};

/// Synthesized utterance plus the generator-side ground truth.
struct SynthResult {
  AudioClip clip;
  AnnotationTier tier;
  std::vector<std::string> canonical;  ///< phonemes of the plan, silences removed
  std::vector<std::string> decoded;    ///< canonical after error injection
  std::vector<double> pulse_times;     ///< glottal excitation instants
  std::vector<std::vector<double>> periods;     ///< one list per voiced run
  std::vector<std::vector<double>> amplitudes;  ///< per-pulse source gains per voiced run
};

/// Vowels are a glottal-flow-derivative pulse train (one pulse per scheduled
/// instant) through a cascade of formant resonators, with aspiration noise
/// through the same resonators; consonants are low-level noise and silences
/// are digital zero. Throws InvalidSpec when parameters leave the measurable range.
SynthResult synthesize(const SynthSpec& spec, const LanguageProfile& profile);

/// Default (F1, F2, F3) targets for a vowel symbol; corners get textbook values.
std::vector<Resonance> default_vowel_formants(const std::string& vowel, const LanguageProfile& profile);

/// Decoded sequence with per-symbol error probability `rate`; an error is a
/// same-class substitution, a deletion, or an insertion after the symbol.
std::vector<std::string> inject_errors(const std::vector<std::string>& canonical, double rate,
                                       const LanguageProfile& profile, std::uint64_t seed);

struct SeverityParameters {
  double error_rate;
  double duration_scale;  ///< stretches phone durations (slower speech)
  int pauses;             ///< internal pauses per utterance
  double centralization;
};

SeverityParameters severity_parameters(Severity severity) noexcept;

struct CorpusOptions {
  int speakers = 12;
  int utterances_per_speaker = 4;
  std::uint64_t seed = 7;
  int sample_rate = 16000;
};

struct CorpusUtterance {
  UtteranceRecord record;
  SynthSpec spec;
};

/// Plans a corpus: speaker k gets severity k mod 4, so severities are balanced.
/// Decoding errors, tempo, pauses and vowel centralization follow severity;
/// voice quality is drawn per speaker regardless of it.
std::vector<CorpusUtterance> plan_corpus(const CorpusOptions& options, const LanguageProfile& profile);

/// Synthesizes and writes `manifest.jsonl`, `audio/*.wav`, `tiers/*.txt` and
/// `profile.json` under `out_dir`; returns the manifest path.
std::filesystem::path write_corpus(const std::filesystem::path& out_dir, const CorpusOptions& options,
                                   const LanguageProfile& profile, const std::filesystem::path& profile_path);

}  // namespace dysarthria
