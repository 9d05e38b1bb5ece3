#include "dysarthria/extraction.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

#include "dysarthria/annotation.hpp"
#include "dysarthria/audio.hpp"
#include "dysarthria/error.hpp"
#include "dysarthria/prosody.hpp"
#include "dysarthria/voice_quality.hpp"

namespace dysarthria {

namespace {

void set(FeatureVector& v, std::string_view name, std::optional<double> value) { v[feature_index(name)] = value; }

template <typename Fn>
auto attempt(Fn fn) -> std::optional<decltype(fn())> {
  try {
    return fn();
  } catch (const Error&) {
    return std::nullopt;
  }
}

void put_stats(FeatureVector& v, std::string_view prefix, const std::optional<SummaryStats>& s) {
  const std::string p(prefix);
  set(v, p + "_mean", s ? std::optional(s->mean) : std::nullopt);
  set(v, p + "_std", s ? std::optional(s->std) : std::nullopt);
  set(v, p + "_min", s ? std::optional(s->min) : std::nullopt);
  set(v, p + "_max", s ? std::optional(s->max) : std::nullopt);
  set(v, p + "_range", s ? std::optional(s->range) : std::nullopt);
}

std::vector<std::string> phonemes_only(const std::vector<std::string>& symbols, const LanguageProfile& profile) {
  std::vector<std::string> out;
  for (const auto& s : symbols) {
    if (!profile.is_silence(s)) out.push_back(s);
  }
  return out;
}

}  // namespace

UtteranceAnalysis analyze_utterance(const UtteranceRecord& record, const LanguageProfile& profile,
                                    const ExtractOptions& options) {
  const AudioClip clip = read_wav(record.audio_path);
  const AnnotationTier tier = parse_annotation(record.annotation_path, profile);
  if (!tier.fits_within(clip.duration())) {
    throw Error(ErrorCode::InvalidArgument, "annotation extends past the end of the audio");
  }

  UtteranceAnalysis out;
  out.row.utterance_id = record.utterance_id;
  out.row.speaker_id = record.speaker_id;
  out.row.severity = record.severity;
  auto& v = out.row.values;

  // voice quality
  const auto contour = attempt([&] { return pitch_track(clip, options.pitch); });
  if (contour) {
    const auto pulses = detect_pulses(clip, *contour);
    const auto vq = voice_quality_features(clip, *contour, pulses);
    set(v, "jitter", vq.jitter_local);
    set(v, "shimmer", vq.shimmer_local);
    set(v, "ppq", vq.ppq);
    set(v, "apq", vq.apq);
    set(v, "hnr", vq.hnr);
    set(v, "num_voice_breaks", vq.num_voice_breaks);
    set(v, "degree_voice_breaks", vq.degree_voice_breaks);
  }

  // pronunciation
  if (record.decoded) {
    const auto alignment =
        align_phoneme_sequences(phonemes_only(record.canonical, profile), phonemes_only(*record.decoded, profile));
    const auto pc = phoneme_correctness(alignment, profile);
    set(v, "pcc", pc.pcc);
    set(v, "pcv", pc.pcv);
    set(v, "pcp", pc.pcp);
    if (options.keep_alignments) out.alignment = format_alignment(alignment);
  }
  out.measured_corners = measure_corner_formants(tier, clip, profile, options.formants);

  // prosody
  const auto silence = segment_silence(clip, &tier, profile);
  if (auto rate = attempt([&] { return speech_rate_features(tier, silence, profile); })) {
    set(v, "speaking_rate", rate->speaking_rate);
    set(v, "articulation_rate", rate->articulation_rate);
    set(v, "num_pauses", rate->num_pauses);
    set(v, "pause_duration", rate->pause_duration);
    set(v, "phone_ratio", rate->phone_ratio);
  }
  put_stats(v, "f0", contour ? attempt([&] { return pitch_stats(*contour); }) : std::nullopt);
  const auto intensity = intensity_contour(clip);
  put_stats(v, "energy", attempt([&] { return energy_stats(intensity); }));

  const auto rhythm = rhythm_metrics(build_rhythm_intervals(tier, profile));
  set(v, "percent_v", rhythm.percent_v);
  set(v, "delta_v", rhythm.delta_v);
  set(v, "delta_c", rhythm.delta_c);
  set(v, "varco_v", rhythm.varco_v);
  set(v, "varco_c", rhythm.varco_c);
  set(v, "rpvi_v", rhythm.rpvi_v);
  set(v, "rpvi_c", rhythm.rpvi_c);
  set(v, "npvi_v", rhythm.npvi_v);
  set(v, "npvi_c", rhythm.npvi_c);

  if (options.keep_contours) {
    if (contour) out.pitch_csv = pitch_csv(*contour);
    out.intensity_csv = intensity_csv(intensity);
  }
  return out;
}

void fill_vowel_space(std::vector<UtteranceAnalysis>& analyses, const LanguageProfile& profile) {
  std::map<std::string, std::vector<CornerFormants>> by_speaker;
  for (const auto& a : analyses) by_speaker[a.row.speaker_id].push_back(a.measured_corners);
  std::map<std::string, SpeakerCornerMeans> means;
  for (const auto& [speaker, list] : by_speaker) means[speaker] = speaker_corner_means(list);

  for (auto& a : analyses) {
    auto& v = a.row.values;
    const auto corners =
        attempt([&] { return complete_corner_formants(a.measured_corners, means[a.row.speaker_id], profile); });
    if (!corners) continue;
    const auto m = vowel_space_metrics(*corners);
    set(v, "tvsa", m.tvsa);
    set(v, "qvsa", m.qvsa);
    set(v, "fcr", m.fcr);
    set(v, "vai", m.vai);
    set(v, "f2_ratio", m.f2_ratio);
  }
}

ExtractionResult extract_features(const std::vector<UtteranceRecord>& records, const LanguageProfile& profile,
                                  const ExtractOptions& options) {
  std::vector<std::optional<UtteranceAnalysis>> slots(records.size());
  std::vector<std::string> reasons(records.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      try {
        slots[i] = analyze_utterance(records[i], profile, options);
      } catch (const std::exception& e) {
        reasons[i] = e.what();
      }
    }
  };
  const auto jobs = static_cast<std::size_t>(std::max(1, options.jobs));
  const auto workers = std::min(jobs, std::max<std::size_t>(1, records.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  ExtractionResult result;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (slots[i]) {
      result.analyses.push_back(std::move(*slots[i]));
    } else {
      result.failures.push_back({i, records[i].utterance_id, reasons[i]});
    }
  }
  fill_vowel_space(result.analyses, profile);
  for (const auto& a : result.analyses) result.matrix.rows.push_back(a.row);
  return result;
}

}  // namespace dysarthria
