#include "dysarthria/prosody.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dysarthria/error.hpp"

namespace dysarthria {

SpeechRateFeatures speech_rate_features(const AnnotationTier& tier, const std::vector<Segment>& silence,
                                        const LanguageProfile& profile) {
  SpeechRateFeatures f;
  f.total_duration = tier.end_time() - tier.start_time();
  if (!(f.total_duration > 0.0)) throw Error(ErrorCode::ZeroDuration, "empty annotation tier");

  for (const auto& iv : tier.intervals()) {
    if (profile.is_nucleus(iv.label)) ++f.syllables;
  }
  double silent_total = 0.0;
  for (const auto& seg : silence) {
    if (!seg.silent) continue;
    silent_total += seg.duration();
    if (seg.duration() > kPauseThreshold) {
      ++f.num_pauses;
      f.pause_duration += seg.duration();
    }
  }
  const double speaking_time = f.total_duration - f.pause_duration;
  if (!(speaking_time > 0.0)) throw Error(ErrorCode::ZeroDuration, "utterance is all pause");
  f.speaking_rate = f.syllables / f.total_duration;
  f.articulation_rate = f.syllables / speaking_time;
  f.phone_ratio = std::clamp((f.total_duration - silent_total) / f.total_duration, 0.0, 1.0);
  return f;
}

SummaryStats summary_stats(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::NoQualifyingFrames, "no qualifying frames");
  SummaryStats s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  s.range = s.max - s.min;
  return s;
}

SummaryStats pitch_stats(const PitchContour& contour) { return summary_stats(contour.voiced_f0()); }

SummaryStats energy_stats(const IntensityContour& contour) {
  std::vector<double> levels;
  for (const auto& f : contour.frames) {
    if (f.db > contour.floor_db) levels.push_back(f.db);
  }
  return summary_stats(levels);
}

RhythmIntervals build_rhythm_intervals(const AnnotationTier& tier, const LanguageProfile& profile) {
  RhythmIntervals out;
  PhoneClass run_class = PhoneClass::Silence;
  double run_start = 0.0;
  double run_end = 0.0;
  auto close = [&] {
    if (run_class == PhoneClass::Vowel) out.vocalic.push_back(run_end - run_start);
    if (run_class == PhoneClass::Consonant) out.consonantal.push_back(run_end - run_start);
    run_class = PhoneClass::Silence;
  };
  for (const auto& iv : tier.intervals()) {
    const auto cls = profile.classify(iv.label);
    if (cls == PhoneClass::Unknown) throw Error(ErrorCode::UnclassifiedSymbol, "label '" + iv.label + "'");
    if (cls == PhoneClass::Silence) {
      close();
      continue;
    }
    if (cls == run_class && std::abs(iv.start - run_end) < 1e-9) {
      run_end = iv.end;
      continue;
    }
    close();
    run_class = cls;
    run_start = iv.start;
    run_end = iv.end;
  }
  close();
  return out;
}

double rpvi(std::span<const double> d) {
  if (d.size() < 2) throw Error(ErrorCode::TooFewIntervals, "PVI needs at least two intervals");
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < d.size(); ++k) sum += std::abs(d[k] - d[k + 1]);
  return sum / static_cast<double>(d.size() - 1);
}

double npvi(std::span<const double> d) {
  if (d.size() < 2) throw Error(ErrorCode::TooFewIntervals, "PVI needs at least two intervals");
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < d.size(); ++k) sum += std::abs((d[k] - d[k + 1]) / ((d[k] + d[k + 1]) / 2.0));
  return 100.0 * sum / static_cast<double>(d.size() - 1);
}

namespace {

struct Dispersion {
  double delta_ms = 0.0;
  double varco = 0.0;
};

std::optional<Dispersion> dispersion(const std::vector<double>& d) {
  if (d.empty()) return std::nullopt;
  const auto s = summary_stats(d);
  return Dispersion{1000.0 * s.std, s.mean > 0.0 ? 100.0 * s.std / s.mean : 0.0};
}

}  // namespace

RhythmMetrics rhythm_metrics(const RhythmIntervals& ri) {
  RhythmMetrics m;
  const double v_total = std::accumulate(ri.vocalic.begin(), ri.vocalic.end(), 0.0);
  const double c_total = std::accumulate(ri.consonantal.begin(), ri.consonantal.end(), 0.0);
  if (v_total + c_total > 0.0) m.percent_v = 100.0 * v_total / (v_total + c_total);
  if (auto d = dispersion(ri.vocalic)) {
    m.delta_v = d->delta_ms;
    m.varco_v = d->varco;
  }
  if (auto d = dispersion(ri.consonantal)) {
    m.delta_c = d->delta_ms;
    m.varco_c = d->varco;
  }
  if (ri.vocalic.size() >= 2) {
    m.rpvi_v = 1000.0 * rpvi(ri.vocalic);
    m.npvi_v = npvi(ri.vocalic);
  }
  if (ri.consonantal.size() >= 2) {
    m.rpvi_c = 1000.0 * rpvi(ri.consonantal);
    m.npvi_c = npvi(ri.consonantal);
  }
  return m;
}

}  // namespace dysarthria
