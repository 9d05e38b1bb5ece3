#include "dysarthria/voice_quality.hpp"

#include <cmath>

#include "dysarthria/error.hpp"

namespace dysarthria {

namespace {

constexpr double kMaxCorrelation = 1.0 - 1e-7;

double overall_mean(Runs runs) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& run : runs) {
    for (double v : run) sum += v;
    n += run.size();
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace

double relative_perturbation(Runs runs) {
  double diff_sum = 0.0;
  std::size_t pairs = 0;
  for (const auto& run : runs) {
    for (std::size_t i = 1; i < run.size(); ++i) {
      diff_sum += std::abs(run[i] - run[i - 1]);
      ++pairs;
    }
  }
  if (pairs == 0) throw Error(ErrorCode::TooFewPeriods, "need at least two consecutive values");
  const double mean = overall_mean(runs);
  if (!(mean > 0.0)) throw Error(ErrorCode::InvalidArgument, "mean must be positive");
  return 100.0 * (diff_sum / static_cast<double>(pairs)) / mean;
}

double perturbation_quotient5(Runs runs) {
  double dev_sum = 0.0;
  std::size_t count = 0;
  for (const auto& run : runs) {
    for (std::size_t i = 2; i + 2 < run.size(); ++i) {
      const double local = (run[i - 2] + run[i - 1] + run[i] + run[i + 1] + run[i + 2]) / 5.0;
      dev_sum += std::abs(run[i] - local);
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorCode::TooFewPeriods, "need a run of at least five values");
  const double mean = overall_mean(runs);
  if (!(mean > 0.0)) throw Error(ErrorCode::InvalidArgument, "mean must be positive");
  return 100.0 * (dev_sum / static_cast<double>(count)) / mean;
}

namespace {

double single(double (*fn)(Runs), std::span<const double> values) {
  const std::vector<double> run(values.begin(), values.end());
  return fn(Runs(&run, 1));
}

}  // namespace

double jitter_local(std::span<const double> periods) { return single(relative_perturbation, periods); }
double ppq(std::span<const double> periods) { return single(perturbation_quotient5, periods); }
double shimmer_local(std::span<const double> amplitudes) { return single(relative_perturbation, amplitudes); }
double apq(std::span<const double> amplitudes) { return single(perturbation_quotient5, amplitudes); }

double hnr_from_correlation(double r) {
  r = std::clamp(r, 1e-12, kMaxCorrelation);
  return 10.0 * std::log10(r / (1.0 - r));
}

double hnr(const AudioClip& clip, const PitchContour& contour) {
  double sum = 0.0;
  std::size_t voiced = 0;
  const double window = contour.settings().window_s;
  for (const auto& frame : contour.frames()) {
    if (!frame.f0) continue;
    const double lag = clip.sample_rate() / *frame.f0;
    sum += hnr_from_correlation(normalized_autocorrelation(clip, frame.time, window, lag));
    ++voiced;
  }
  if (voiced == 0) throw Error(ErrorCode::NoVoicedFrames, "HNR needs at least one voiced frame");
  return sum / static_cast<double>(voiced);
}

VoiceBreaks voice_breaks(const PulseTrain& pulses, double total_duration, double threshold_s) {
  if (!(total_duration > 0.0)) throw Error(ErrorCode::InvalidArgument, "total duration must be positive");
  VoiceBreaks vb;
  double broken = 0.0;
  for (double period : pulses.periods()) {
    if (period > threshold_s) {
      ++vb.count;
      broken += period;
    }
  }
  vb.degree = std::min(100.0, 100.0 * broken / total_duration);
  return vb;
}

PulseRuns split_pulse_runs(const PulseTrain& pulses, double threshold_s) {
  PulseRuns runs;
  if (pulses.empty()) return runs;
  auto ratio = [](double a, double b) { return std::max(a, b) / std::max(std::min(a, b), 1e-300); };
  runs.periods.emplace_back();
  runs.amplitudes.push_back({pulses.amplitudes.front()});
  for (std::size_t i = 1; i < pulses.size(); ++i) {
    const double period = pulses.times[i] - pulses.times[i - 1];
    const double amplitude = pulses.amplitudes[i];
    if (period > threshold_s) {
      runs.periods.emplace_back();
      runs.amplitudes.emplace_back();
    } else {
      auto& p = runs.periods.back();
      if (!p.empty() && ratio(period, p.back()) > kMaxPeriodFactor) runs.periods.emplace_back();
      runs.periods.back().push_back(period);
      const auto& a = runs.amplitudes.back();
      if (!a.empty() && ratio(amplitude, a.back()) > kMaxAmplitudeFactor) runs.amplitudes.emplace_back();
    }
    runs.amplitudes.back().push_back(amplitude);
  }
  return runs;
}

VoiceQualityFeatures voice_quality_features(const AudioClip& clip, const PitchContour& contour,
                                            const PulseTrain& pulses) {
  VoiceQualityFeatures f;
  const double threshold = kVoiceBreakFactor / contour.floor();
  const auto runs = split_pulse_runs(pulses, threshold);
  auto attempt = [](auto fn) -> std::optional<double> {
    try {
      return fn();
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  f.jitter_local = attempt([&] { return relative_perturbation(runs.periods); });
  f.ppq = attempt([&] { return perturbation_quotient5(runs.periods); });
  f.shimmer_local = attempt([&] { return relative_perturbation(runs.amplitudes); });
  f.apq = attempt([&] { return perturbation_quotient5(runs.amplitudes); });
  f.hnr = attempt([&] { return hnr(clip, contour); });
  const auto vb = voice_breaks(pulses, clip.duration(), threshold);
  f.num_voice_breaks = vb.count;
  f.degree_voice_breaks = vb.degree;
  return f;
}

}  // namespace dysarthria
