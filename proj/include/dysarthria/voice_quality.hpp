#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dysarthria/audio.hpp"
#include "dysarthria/signal.hpp"

namespace dysarthria {

/// Inter-pulse gaps longer than this are voice breaks: 1.25 / 70 Hz, kept exact.
inline constexpr double kVoiceBreakFactor = 1.25;
inline constexpr double kDefaultPitchFloor = 70.0;
inline constexpr double kVoiceBreakThreshold = kVoiceBreakFactor / kDefaultPitchFloor;

struct VoiceQualityFeatures {
  std::optional<double> jitter_local;
  std::optional<double> shimmer_local;
  std::optional<double> ppq;
  std::optional<double> apq;
  std::optional<double> hnr;
  int num_voice_breaks = 0;
  double degree_voice_breaks = 0.0;
};

// Perturbation measures take either one sequence or several runs of
// consecutive cycles; differences and 5-point neighbourhoods never straddle runs.
using Runs = std::span<const std::vector<double>>;

/// Mean absolute difference of consecutive values over the mean value, in percent.
/// Throws TooFewPeriods when no run has two values.
double relative_perturbation(Runs runs);
/// 5-point perturbation quotient in percent; needs a run of at least five values.
double perturbation_quotient5(Runs runs);

double jitter_local(std::span<const double> periods);
double ppq(std::span<const double> periods);
double shimmer_local(std::span<const double> amplitudes);
double apq(std::span<const double> amplitudes);

/// 10*log10(r / (1 - r)) with r clamped to keep the result finite.
double hnr_from_correlation(double r);
/// Mean frame HNR over voiced frames; throws NoVoicedFrames.
double hnr(const AudioClip& clip, const PitchContour& contour);

struct VoiceBreaks {
  int count = 0;
  double degree = 0.0;  ///< percent of total_duration
};

VoiceBreaks voice_breaks(const PulseTrain& pulses, double total_duration,
                         double threshold_s = kVoiceBreakThreshold);

struct PulseRuns {
  std::vector<std::vector<double>> periods;
  std::vector<std::vector<double>> amplitudes;
};

inline constexpr double kMaxPeriodFactor = 1.3;
inline constexpr double kMaxAmplitudeFactor = 1.6;

/// Splits the train at voice breaks; each run keeps its periods and the
/// amplitudes of its pulses. Period runs are also cut between neighbours
/// more than kMaxPeriodFactor apart, amplitude runs between neighbours more
/// than kMaxAmplitudeFactor apart.
PulseRuns split_pulse_runs(const PulseTrain& pulses, double threshold_s = kVoiceBreakThreshold);

/// All seven measures; entries whose preconditions fail stay empty.
VoiceQualityFeatures voice_quality_features(const AudioClip& clip, const PitchContour& contour,
                                            const PulseTrain& pulses);

}  // namespace dysarthria
