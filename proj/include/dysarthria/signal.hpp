#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dysarthria/annotation.hpp"
#include "dysarthria/audio.hpp"
#include "dysarthria/profile.hpp"

namespace dysarthria {

struct PitchSettings {
  double floor_hz = 70.0;
  double ceiling_hz = 600.0;
  double window_s = 0.040;
  double step_s = 0.010;
  double voicing_threshold = 0.45;
  /// Frames whose peak amplitude is below this fraction of the clip peak are unvoiced.
  double silence_threshold = 0.03;
};

struct PitchFrame {
  double time = 0.0;
  std::optional<double> f0;  ///< empty when unvoiced
  double strength = 0.0;     ///< normalized autocorrelation at the chosen lag
};

class PitchContour {
 public:
  PitchContour() = default;
  PitchContour(std::vector<PitchFrame> frames, PitchSettings settings);

  const std::vector<PitchFrame>& frames() const noexcept { return frames_; }
  const PitchSettings& settings() const noexcept { return settings_; }
  double floor() const noexcept { return settings_.floor_hz; }
  double ceiling() const noexcept { return settings_.ceiling_hz; }
  double step() const noexcept { return settings_.step_s; }

  std::vector<double> voiced_f0() const;
  std::size_t voiced_count() const noexcept;
  /// F0 at time t from the nearest frame, empty if that frame is unvoiced.
  std::optional<double> f0_near(double t) const;

 private:
  std::vector<PitchFrame> frames_;
  PitchSettings settings_;
};

/// Autocorrelation pitch tracker: DC-removed frames, normalized autocorrelation
/// over the overlap, parabolic peak interpolation, shortest strong lag wins.
/// Throws ClipTooShort when the clip is shorter than three floor periods.
PitchContour pitch_track(const AudioClip& clip, const PitchSettings& settings = {});
inline PitchContour pitch_track(const AudioClip& clip, double floor_hz, double ceiling_hz) {
  PitchSettings s;
  s.floor_hz = floor_hz;
  s.ceiling_hz = ceiling_hz;
  return pitch_track(clip, s);
}

/// Normalized autocorrelation of the window centred at `center` at a fractional
/// lag (linear interpolation between integer lags is not used; the integer-lag
/// curve is interpolated parabolically around `lag_samples`).
double normalized_autocorrelation(const AudioClip& clip, double center_s, double window_s, double lag_samples);

struct PulseTrain {
  std::vector<double> times;       ///< strictly increasing, seconds
  std::vector<double> amplitudes;  ///< absolute peak within +-25% of a period around each pulse

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
  std::vector<double> periods() const;
};

/// One pulse per glottal cycle in voiced stretches, placed at the positive
/// waveform peak inside each predicted period window (sub-sample refined).
/// A march stops when consecutive cycles stop resembling each other.
PulseTrain detect_pulses(const AudioClip& clip, const PitchContour& contour);

struct IntensityFrame {
  double time = 0.0;
  double db = 0.0;
};

struct IntensityContour {
  std::vector<IntensityFrame> frames;
  double floor_db = 0.0;
  double window_s = 0.040;
  double step_s = 0.010;
};

/// Hann-weighted RMS level; a full-scale sine reads 100 dB, levels below
/// floor_db (0 dB) are reported at floor_db.
IntensityContour intensity_contour(const AudioClip& clip, double window_s = 0.040, double step_s = 0.010);

struct FormantSlice {
  double time = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
};

struct FormantSettings {
  int lpc_order = 0;  ///< 0: 2 + sample_rate/1000
  double window_s = 0.025;  ///< effective length; the Gaussian spans twice this
  double pre_emphasis = 0.97;
  double max_bandwidth_hz = 400.0;
  double min_frequency_hz = 50.0;
};

/// LPC coefficients a[1..order] of the prediction-error filter 1 + sum a_k z^-k
/// via Levinson-Durbin on the autocorrelation sequence r[0..order].
std::vector<double> levinson_durbin(const std::vector<double>& autocorr, int order);

/// Roots of the prediction polynomial turned into (frequency, bandwidth) pairs,
/// positive frequencies only, sorted by frequency.
std::vector<std::pair<double, double>> lpc_resonances(const std::vector<double>& lpc, int sample_rate);

/// Throws NoFormantsFound with fewer than two qualifying resonances and
/// InvalidArgument when the analysis window leaves the clip.
FormantSlice estimate_formants(const AudioClip& clip, double at_s, const FormantSettings& settings = {});

struct Segment {
  double start = 0.0;
  double end = 0.0;
  bool silent = false;

  double duration() const noexcept { return end - start; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Silence straight from the tier: silence-labelled intervals, touching
/// same-class intervals merged.
std::vector<Segment> silence_from_tier(const AnnotationTier& tier, const LanguageProfile& profile);

/// Energy fallback: frames more than `relative_db` below the 99th-percentile
/// level are silent; each silent run covers its frames' analysis windows.
std::vector<Segment> silence_from_energy(const AudioClip& clip, double relative_db = 25.0);

std::vector<Segment> segment_silence(const AudioClip& clip, const AnnotationTier* tier,
                                     const LanguageProfile& profile);

std::string pitch_csv(const PitchContour& contour);
std::string intensity_csv(const IntensityContour& contour);

}  // namespace dysarthria
