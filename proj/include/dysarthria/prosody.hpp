#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dysarthria/annotation.hpp"
#include "dysarthria/profile.hpp"
#include "dysarthria/signal.hpp"

namespace dysarthria {

/// Silent spans longer than this count as pauses.
inline constexpr double kPauseThreshold = 0.1;

struct SpeechRateFeatures {
  double speaking_rate = 0.0;      ///< syllables / s
  double articulation_rate = 0.0;  ///< syllables / s excluding pauses
  int num_pauses = 0;
  double pause_duration = 0.0;  ///< s
  double phone_ratio = 0.0;     ///< non-silent time / total time
  int syllables = 0;
  double total_duration = 0.0;
};

/// Syllables are the nucleus-labelled intervals; the utterance spans the tier.
/// Throws ZeroDuration when the tier (or its pause-free part) has no extent.
SpeechRateFeatures speech_rate_features(const AnnotationTier& tier, const std::vector<Segment>& silence,
                                        const LanguageProfile& profile);

struct SummaryStats {
  double mean = 0.0;
  double std = 0.0;  ///< population (divide by n)
  double min = 0.0;
  double max = 0.0;
  double range = 0.0;
};

/// Throws NoQualifyingFrames on an empty input.
SummaryStats summary_stats(std::span<const double> values);
/// Over voiced frames only.
SummaryStats pitch_stats(const PitchContour& contour);
/// Over frames above the 0 dB silence sentinel.
SummaryStats energy_stats(const IntensityContour& contour);

struct RhythmIntervals {
  std::vector<double> vocalic;      ///< s
  std::vector<double> consonantal;  ///< s
};

/// Merges consecutive same-class phones; silences and gaps end a run.
/// Throws UnclassifiedSymbol.
RhythmIntervals build_rhythm_intervals(const AnnotationTier& tier, const LanguageProfile& profile);

struct RhythmMetrics {
  std::optional<double> percent_v;
  std::optional<double> delta_v;  ///< ms
  std::optional<double> delta_c;  ///< ms
  std::optional<double> varco_v;  ///< %
  std::optional<double> varco_c;  ///< %
  std::optional<double> rpvi_v;   ///< ms
  std::optional<double> rpvi_c;   ///< ms
  std::optional<double> npvi_v;
  std::optional<double> npvi_c;
};

/// Raw pairwise variability (mean |d_k - d_k+1|, input units); TooFewIntervals below 2.
double rpvi(std::span<const double> durations);
/// Normalized pairwise variability: 100/(m-1) * sum |d_k - d_k+1| / ((d_k + d_k+1)/2).
double npvi(std::span<const double> durations);

/// Each metric is filled when its list is long enough; a single interval gives
/// delta = Varco = 0, PVIs need two.
RhythmMetrics rhythm_metrics(const RhythmIntervals& intervals);

}  // namespace dysarthria
