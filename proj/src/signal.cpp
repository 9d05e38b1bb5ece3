#include "dysarthria/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "dysarthria/error.hpp"

namespace dysarthria {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Per-octave bonus that breaks near-ties between a lag and its multiples in
// favour of the shorter lag.
constexpr double kOctaveCost = 0.02;
// Path costs between consecutive frames: per octave of F0 change, and per
// voiced/unvoiced switch.
constexpr double kOctaveJumpCost = 0.35;
constexpr double kVoicedUnvoicedCost = 0.14;
constexpr std::size_t kMaxCandidates = 6;
// Taps on each side of the windowed-sinc interpolator.
constexpr int kSincDepth = 8;
// Minimum similarity of consecutive cycles for the pulse march to continue.
constexpr double kCycleSimilarity = 0.6;
// A stretch left over by a march is re-seeded only if it is at least this
// loud relative to the seed of the march.
constexpr double kReseedLevel = 0.2;
// Full-scale sine (rms 1/sqrt(2)) reads 100 dB.
const double kIntensityRefPower = 0.5 * 1e-10;

struct Frame {
  std::size_t start = 0;
  double center = 0.0;
};

std::vector<Frame> frame_grid(std::size_t n_samples, int rate, std::size_t window, double step_s) {
  std::vector<Frame> frames;
  for (std::size_t k = 0;; ++k) {
    const auto start = static_cast<std::size_t>(std::llround(static_cast<double>(k) * step_s * rate));
    if (start + window > n_samples) break;
    frames.push_back({start, (static_cast<double>(start) + 0.5 * static_cast<double>(window)) / rate});
  }
  return frames;
}

enum class Normalization {
  Geometric,  // sqrt(E_head * E_tail): exact periodic-to-total ratio for stationary frames
  Larger,     // max(E_head, E_tail): decaying ringing does not read as periodic
};

// Autocorrelation of a (DC-removed) frame over the overlapping part.
class FrameCorrelator {
 public:
  FrameCorrelator(std::vector<double> x, Normalization mode)
      : x_(std::move(x)), energy_(x_.size() + 1, 0.0), mode_(mode) {
    for (std::size_t i = 0; i < x_.size(); ++i) energy_[i + 1] = energy_[i] + x_[i] * x_[i];
  }

  double at(std::size_t lag) const {
    const std::size_t n = x_.size();
    if (lag >= n) return 0.0;
    double num = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) num += x_[i] * x_[i + lag];
    const double e1 = energy_[n - lag];
    const double e2 = energy_[n] - energy_[lag];
    const double denom = mode_ == Normalization::Geometric ? std::sqrt(e1 * e2) : std::max(e1, e2);
    return denom > 0.0 ? num / denom : 0.0;
  }

  std::size_t size() const noexcept { return x_.size(); }

 private:
  std::vector<double> x_;
  std::vector<double> energy_;
  Normalization mode_;
};

struct Peak {
  double lag = 0.0;
  double value = 0.0;
};

Peak parabolic(double left, double mid, double right, std::size_t lag) {
  const double denom = left - 2.0 * mid + right;
  double delta = 0.0;
  if (denom < 0.0) delta = std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
  return {static_cast<double>(lag) + delta, mid - 0.25 * (left - right) * delta};
}

// Correlation curve r[0..n) read with even symmetry at negative lags and zero past the end.
double curve_at(const std::vector<double>& r, long long k) {
  if (k < 0) k = -k;
  return k < static_cast<long long>(r.size()) ? r[static_cast<std::size_t>(k)] : 0.0;
}

double sinc_interpolate(const std::vector<double>& r, double x) {
  const auto center = static_cast<long long>(std::floor(x));
  double sum = 0.0;
  for (long long k = center - kSincDepth; k <= center + kSincDepth + 1; ++k) {
    const double d = x - static_cast<double>(k);
    if (std::abs(d) >= kSincDepth + 1) continue;
    const double sinc = std::abs(d) < 1e-12 ? 1.0 : std::sin(kPi * d) / (kPi * d);
    const double window = 0.5 + 0.5 * std::cos(kPi * d / (kSincDepth + 1));
    sum += curve_at(r, k) * sinc * window;
  }
  return sum;
}

// Maximum of the sinc-interpolated curve within one lag of an integer peak.
Peak refine_peak(const std::vector<double>& r, std::size_t lag) {
  constexpr double kGolden = 0.6180339887498949;
  double a = static_cast<double>(lag) - 1.0;
  double b = static_cast<double>(lag) + 1.0;
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = sinc_interpolate(r, c);
  double fd = sinc_interpolate(r, d);
  for (int iter = 0; iter < 40; ++iter) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = sinc_interpolate(r, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = sinc_interpolate(r, d);
    }
  }
  const double x = 0.5 * (a + b);
  const double value = sinc_interpolate(r, x);
  if (value < r[lag]) return {static_cast<double>(lag), r[lag]};
  return {x, value};
}

std::vector<double> dc_removed(std::span<const double> samples, std::size_t start, std::size_t length) {
  std::vector<double> x(samples.begin() + static_cast<std::ptrdiff_t>(start),
                        samples.begin() + static_cast<std::ptrdiff_t>(start + length));
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  for (auto& v : x) v -= mean;
  return x;
}

}  // namespace

PitchContour::PitchContour(std::vector<PitchFrame> frames, PitchSettings settings)
    : frames_(std::move(frames)), settings_(settings) {}

std::vector<double> PitchContour::voiced_f0() const {
  std::vector<double> out;
  for (const auto& f : frames_) {
    if (f.f0) out.push_back(*f.f0);
  }
  return out;
}

std::size_t PitchContour::voiced_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(frames_.begin(), frames_.end(), [](const PitchFrame& f) { return f.f0.has_value(); }));
}

std::optional<double> PitchContour::f0_near(double t) const {
  if (frames_.empty()) return std::nullopt;
  auto it = std::lower_bound(frames_.begin(), frames_.end(), t,
                             [](const PitchFrame& f, double v) { return f.time < v; });
  if (it == frames_.end()) return frames_.back().f0;
  if (it != frames_.begin() && t - std::prev(it)->time < it->time - t) --it;
  return it->f0;
}

PitchContour pitch_track(const AudioClip& clip, const PitchSettings& settings) {
  const int rate = clip.sample_rate();
  if (clip.duration() < 3.0 / settings.floor_hz) {
    throw Error(ErrorCode::ClipTooShort,
                fmt::format("clip of {:.4f} s is shorter than 3 periods of {} Hz", clip.duration(), settings.floor_hz));
  }
  const auto window = static_cast<std::size_t>(std::llround(settings.window_s * rate));
  const auto samples = clip.samples();
  double global_peak = 0.0;
  for (double s : samples) global_peak = std::max(global_peak, std::abs(s));

  const auto lag_min = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(rate / settings.ceiling_hz)));
  const auto lag_max = std::min<std::size_t>(window / 2, static_cast<std::size_t>(std::ceil(rate / settings.floor_hz)));

  struct Candidate {
    double f0 = 0.0;  // 0: unvoiced
    double strength = 0.0;
    double r = 0.0;
  };
  const auto grid = frame_grid(samples.size(), rate, window, settings.step_s);
  std::vector<std::vector<Candidate>> candidates(grid.size());
  for (std::size_t f = 0; f < grid.size(); ++f) {
    auto x = dc_removed(samples, grid[f].start, window);
    double local_peak = 0.0;
    for (double v : x) local_peak = std::max(local_peak, std::abs(v));
    const double loudness = global_peak > 0.0 ? local_peak / global_peak : 0.0;
    auto& cands = candidates[f];
    cands.push_back({0.0, settings.voicing_threshold +
                              std::max(0.0, 2.0 - loudness / (settings.silence_threshold / (1.0 + settings.voicing_threshold))),
                     0.0});
    if (local_peak <= 0.0 || loudness < settings.silence_threshold) continue;

    const FrameCorrelator corr(std::move(x), Normalization::Larger);
    std::vector<double> r(std::min(window, lag_max + kSincDepth + 3), 0.0);
    for (std::size_t lag = 0; lag < r.size(); ++lag) r[lag] = corr.at(lag);

    for (std::size_t lag = lag_min; lag <= lag_max && lag + 1 < r.size(); ++lag) {
      if (!(r[lag] >= r[lag - 1] && r[lag] > r[lag + 1]) || r[lag] < 0.5 * settings.voicing_threshold) continue;
      const Peak p = refine_peak(r, lag);
      const double f0 = rate / p.lag;
      if (f0 < settings.floor_hz || f0 > settings.ceiling_hz || p.value < settings.voicing_threshold) continue;
      cands.push_back({f0, p.value + kOctaveCost * std::log2(f0 / settings.floor_hz), std::min(p.value, 1.0)});
    }
    std::sort(cands.begin() + 1, cands.end(),
              [](const Candidate& a, const Candidate& b) { return a.strength > b.strength; });
    if (cands.size() > kMaxCandidates + 1) cands.resize(kMaxCandidates + 1);
  }

  // Viterbi path through the candidates.
  auto transition = [](const Candidate& a, const Candidate& b) {
    const bool va = a.f0 > 0.0;
    const bool vb = b.f0 > 0.0;
    if (va != vb) return kVoicedUnvoicedCost;
    if (!va) return 0.0;
    return kOctaveJumpCost * std::abs(std::log2(a.f0 / b.f0));
  };
  std::vector<std::vector<double>> score(grid.size());
  std::vector<std::vector<std::size_t>> back(grid.size());
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const auto& cands = candidates[f];
    score[f].resize(cands.size());
    back[f].resize(cands.size(), 0);
    for (std::size_t c = 0; c < cands.size(); ++c) {
      double best = f == 0 ? 0.0 : -1e300;
      if (f > 0) {
        for (std::size_t p = 0; p < candidates[f - 1].size(); ++p) {
          const double v = score[f - 1][p] - transition(candidates[f - 1][p], cands[c]);
          if (v > best) {
            best = v;
            back[f][c] = p;
          }
        }
      }
      score[f][c] = best + cands[c].strength;
    }
  }
  std::vector<PitchFrame> out(grid.size());
  if (!grid.empty()) {
    std::size_t c = static_cast<std::size_t>(
        std::max_element(score.back().begin(), score.back().end()) - score.back().begin());
    for (std::size_t f = grid.size(); f-- > 0;) {
      const auto& chosen = candidates[f][c];
      out[f].time = grid[f].center;
      if (chosen.f0 > 0.0) out[f].f0 = chosen.f0;
      out[f].strength = chosen.f0 > 0.0 ? chosen.r : (candidates[f].size() > 1 ? candidates[f][1].r : 0.0);
      c = back[f][c];
    }
  }
  return PitchContour(std::move(out), settings);
}

double normalized_autocorrelation(const AudioClip& clip, double center_s, double window_s, double lag_samples) {
  const int rate = clip.sample_rate();
  const auto window = static_cast<std::size_t>(std::llround(window_s * rate));
  const auto samples = clip.samples();
  if (window > samples.size()) return 0.0;
  const auto half = static_cast<long long>(window / 2);
  long long start = std::llround(center_s * rate) - half;
  start = std::clamp<long long>(start, 0, static_cast<long long>(samples.size() - window));
  const FrameCorrelator corr(dc_removed(samples, static_cast<std::size_t>(start), window), Normalization::Geometric);

  // Climb to the local maximum nearest the requested lag, then refine.
  auto lag = static_cast<std::size_t>(std::max(2LL, std::llround(lag_samples)));
  if (lag + 1 >= window) return 0.0;
  for (int step = 0; step < 4; ++step) {
    const double here = corr.at(lag);
    if (corr.at(lag + 1) > here && lag + 2 < window) {
      ++lag;
    } else if (lag > 2 && corr.at(lag - 1) > here) {
      --lag;
    } else {
      break;
    }
  }
  std::vector<double> r(std::min(window, lag + kSincDepth + 3));
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = corr.at(k);
  return std::min(refine_peak(r, lag).value, 1.0);
}

std::vector<double> PulseTrain::periods() const {
  std::vector<double> out;
  for (std::size_t i = 1; i < times.size(); ++i) out.push_back(times[i] - times[i - 1]);
  return out;
}

namespace {

struct VoicedSpan {
  double start = 0.0;
  double end = 0.0;
  std::size_t first_frame = 0;
  std::size_t last_frame = 0;
};

class PulseMarcher {
 public:
  PulseMarcher(const AudioClip& clip, const PitchContour& contour)
      : x_(clip.samples()), rate_(clip.sample_rate()), contour_(contour) {}

  // Median voiced period within 50 ms of t; isolated octave slips do not move it.
  double period_at(double t) const {
    const auto& frames = contour_.frames();
    std::vector<double> near;
    for (const auto& f : frames) {
      if (f.f0 && std::abs(f.time - t) <= 0.05) near.push_back(*f.f0);
    }
    if (near.empty()) {
      const auto f0 = nearest_voiced(t);
      return f0 ? 1.0 / *f0 : 1.0 / contour_.floor();
    }
    std::nth_element(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(near.size() / 2), near.end());
    return 1.0 / near[near.size() / 2];
  }

  std::optional<double> nearest_voiced(double t) const {
    std::optional<double> best;
    double dist = 1e300;
    for (const auto& f : contour_.frames()) {
      if (f.f0 && std::abs(f.time - t) < dist) {
        dist = std::abs(f.time - t);
        best = f.f0;
      }
    }
    return best;
  }

  // Positive peak in [lo, hi] seconds; empty when the range is empty or the
  // maximum sits on the range edge without being a local maximum there.
  std::optional<double> peak_in(double lo, double hi) const {
    const auto n = static_cast<long long>(x_.size());
    const long long a = std::max(0LL, static_cast<long long>(std::ceil(lo * rate_)));
    const long long b = std::min(n - 1, static_cast<long long>(std::floor(hi * rate_)));
    if (a > b) return std::nullopt;
    long long best = a;
    for (long long i = a; i <= b; ++i) {
      if (x_[i] > x_[best]) best = i;
    }
    if (best == a || best == b) {
      if (best == 0 || best == n - 1 || x_[best - 1] >= x_[best] || x_[best + 1] > x_[best]) return std::nullopt;
    }
    return refine(best, false);
  }

  double refine(long long i, bool absolute) const {
    const auto n = static_cast<long long>(x_.size());
    if (i <= 0 || i >= n - 1) return static_cast<double>(i) / rate_;
    auto v = [&](long long j) { return absolute ? std::abs(x_[j]) : x_[j]; };
    const Peak p = parabolic(v(i - 1), v(i), v(i + 1), static_cast<std::size_t>(i));
    return p.lag / rate_;
  }

  double amplitude(double t, double period) const {
    const auto n = static_cast<long long>(x_.size());
    const long long a = std::max(0LL, static_cast<long long>(std::ceil((t - 0.25 * period) * rate_)));
    const long long b = std::min(n - 1, static_cast<long long>(std::floor((t + 0.25 * period) * rate_)));
    long long best = std::clamp<long long>(std::llround(t * rate_), 0, n - 1);
    for (long long i = a; i <= b; ++i) {
      if (std::abs(x_[i]) > std::abs(x_[best])) best = i;
    }
    const double peak = std::abs(x_[best]);
    if (best <= 0 || best >= n - 1) return peak;
    const double l = std::abs(x_[best - 1]);
    const double r = std::abs(x_[best + 1]);
    const double denom = l - 2.0 * peak + r;
    if (denom >= 0.0) return peak;
    const double delta = std::clamp(0.5 * (l - r) / denom, -0.5, 0.5);
    return peak - 0.25 * (l - r) * delta;
  }

  // Normalized cross-correlation of one period around each of two pulses.
  double similarity(double a, double b, double period) const {
    const auto n = static_cast<long long>(x_.size());
    const long long len = std::max(4LL, std::llround(period * rate_));
    const long long ia = std::llround(a * rate_) - len / 2;
    const long long ib = std::llround(b * rate_) - len / 2;
    const long long k0 = std::max({0LL, -ia, -ib});
    const long long k1 = std::min({len, n - ia, n - ib});
    if (2 * (k1 - k0) < len) return 0.0;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (long long k = k0; k < k1; ++k) {
      sab += x_[ia + k] * x_[ib + k];
      saa += x_[ia + k] * x_[ia + k];
      sbb += x_[ib + k] * x_[ib + k];
    }
    return saa > 0.0 && sbb > 0.0 ? sab / std::sqrt(saa * sbb) : 0.0;
  }

  // Marches from the loudest voiced frame in [start, end] in both directions,
  // then handles whatever the march left uncovered on either side. Seeds
  // quieter than `min_level` are ignored.
  std::vector<double> march(double start, double end, double min_level) const {
    const auto& frames = contour_.frames();
    std::optional<double> center;
    double loudest = 0.0;
    for (const auto& f : frames) {
      if (!f.f0 || f.time < start || f.time > end) continue;
      const double half = 0.5 / *f.f0;
      const auto a = static_cast<std::size_t>(std::max(0.0, std::ceil((f.time - half) * rate_)));
      const auto b = std::min(x_.size(), static_cast<std::size_t>((f.time + half) * rate_) + 1);
      for (std::size_t i = a; i < b; ++i) {
        if (x_[i] > loudest) {
          loudest = x_[i];
          center = f.time;
        }
      }
    }
    if (!center || loudest < min_level) return {};
    const double t0 = period_at(*center);
    if (end - start < 3.0 * t0) return {};
    auto seed = peak_in(std::max(start, *center - 0.5 * t0), std::min(end, *center + 0.5 * t0));
    if (!seed) return {};

    std::vector<double> backward;
    for (double last = *seed;;) {
      const double period = period_at(last);
      const double hi = last - 0.8 * period;
      if (hi <= start) break;
      auto next = peak_in(std::max(last - 1.2 * period, start), hi);
      if (!next || *next >= last || similarity(last, *next, period) < kCycleSimilarity) break;
      backward.push_back(*next);
      last = *next;
    }
    std::vector<double> pulses(backward.rbegin(), backward.rend());
    pulses.push_back(*seed);
    for (double last = *seed;;) {
      const double period = period_at(last);
      const double lo = last + 0.8 * period;
      if (lo >= end) break;
      auto next = peak_in(lo, std::min(last + 1.2 * period, end));
      if (!next || *next <= last || similarity(last, *next, period) < kCycleSimilarity) break;
      pulses.push_back(*next);
      last = *next;
    }

    const double sub_level = std::max(min_level, kReseedLevel * loudest);
    auto left = march(start, pulses.front() - 0.5 * period_at(pulses.front()), sub_level);
    auto right = march(pulses.back() + 0.5 * period_at(pulses.back()), end, sub_level);
    left.insert(left.end(), pulses.begin(), pulses.end());
    left.insert(left.end(), right.begin(), right.end());
    return left;
  }

 private:
  std::span<const double> x_;
  int rate_;
  const PitchContour& contour_;
};

}  // namespace

PulseTrain detect_pulses(const AudioClip& clip, const PitchContour& contour) {
  PulseTrain train;
  const auto& frames = contour.frames();
  if (frames.empty() || clip.empty()) return train;
  const double half_window = 0.5 * contour.settings().window_s;

  std::vector<VoicedSpan> spans;
  for (std::size_t k = 0; k < frames.size();) {
    if (!frames[k].f0) {
      ++k;
      continue;
    }
    std::size_t j = k;
    while (j + 1 < frames.size() && frames[j + 1].f0) ++j;
    VoicedSpan span{std::max(0.0, frames[k].time - half_window),
                    std::min(clip.duration(), frames[j].time + half_window), k, j};
    if (!spans.empty() && span.start <= spans.back().end) {
      spans.back().end = span.end;
      spans.back().last_frame = j;
    } else {
      spans.push_back(span);
    }
    k = j + 1;
  }

  double global_peak = 0.0;
  for (double v : clip.samples()) global_peak = std::max(global_peak, std::abs(v));
  const PulseMarcher marcher(clip, contour);
  for (const auto& span : spans) {
    for (double t : marcher.march(span.start, span.end, contour.settings().silence_threshold * global_peak)) {
      if (!train.times.empty() && t <= train.times.back()) continue;
      train.times.push_back(t);
      train.amplitudes.push_back(marcher.amplitude(t, marcher.period_at(t)));
    }
  }
  return train;
}

IntensityContour intensity_contour(const AudioClip& clip, double window_s, double step_s) {
  IntensityContour contour;
  contour.window_s = window_s;
  contour.step_s = step_s;
  const int rate = clip.sample_rate();
  const auto samples = clip.samples();
  auto window = static_cast<std::size_t>(std::llround(window_s * rate));
  if (samples.empty()) return contour;
  window = std::min(window, samples.size());

  std::vector<double> hann(window);
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < window; ++i) {
    hann[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * (static_cast<double>(i) + 0.5) / static_cast<double>(window));
    weight_sum += hann[i];
  }
  for (const auto& frame : frame_grid(samples.size(), rate, window, step_s)) {
    double mean = 0.0;
    for (std::size_t i = 0; i < window; ++i) mean += hann[i] * samples[frame.start + i];
    mean /= weight_sum;
    double power = 0.0;
    for (std::size_t i = 0; i < window; ++i) {
      const double v = samples[frame.start + i] - mean;
      power += hann[i] * v * v;
    }
    power /= weight_sum;
    double db = power > 0.0 ? 10.0 * std::log10(power / kIntensityRefPower) : contour.floor_db;
    contour.frames.push_back({frame.center, std::max(db, contour.floor_db)});
  }
  return contour;
}

std::vector<double> levinson_durbin(const std::vector<double>& r, int order) {
  if (order <= 0 || static_cast<int>(r.size()) <= order) {
    throw Error(ErrorCode::InvalidArgument, "autocorrelation shorter than the LPC order");
  }
  std::vector<double> a(order + 1, 0.0);
  a[0] = 1.0;
  double err = r[0];
  if (err <= 0.0) throw Error(ErrorCode::NoFormantsFound, "zero-energy analysis window");
  std::vector<double> prev(order + 1, 0.0);
  for (int i = 1; i <= order; ++i) {
    double acc = r[i];
    for (int j = 1; j < i; ++j) acc += a[j] * r[i - j];
    const double k = -acc / err;
    prev = a;
    for (int j = 1; j < i; ++j) a[j] = prev[j] + k * prev[i - j];
    a[i] = k;
    err *= (1.0 - k * k);
    if (err <= 0.0) break;
  }
  return std::vector<double>(a.begin() + 1, a.end());
}

std::vector<std::pair<double, double>> lpc_resonances(const std::vector<double>& lpc, int sample_rate) {
  const auto p = static_cast<Eigen::Index>(lpc.size());
  std::vector<std::pair<double, double>> out;
  if (p == 0) return out;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) companion(0, j) = -lpc[static_cast<std::size_t>(j)];
  for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) return out;
  for (const auto& z : solver.eigenvalues()) {
    if (z.imag() <= 0.0) continue;
    const double radius = std::abs(z);
    if (radius <= 0.0) continue;
    const double freq = std::arg(z) * sample_rate / (2.0 * kPi);
    const double bandwidth = -std::log(radius) * sample_rate / kPi;
    out.emplace_back(freq, bandwidth);
  }
  std::sort(out.begin(), out.end());
  return out;
}

FormantSlice estimate_formants(const AudioClip& clip, double at_s, const FormantSettings& settings) {
  const int rate = clip.sample_rate();
  const int order = settings.lpc_order > 0 ? settings.lpc_order
                                           : 2 + static_cast<int>(std::lround(rate / 1000.0));
  const auto window = static_cast<long long>(std::llround(2.0 * settings.window_s * rate));
  const long long start = std::llround(at_s * rate) - window / 2;
  const auto samples = clip.samples();
  if (start < 0 || start + window > static_cast<long long>(samples.size())) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("formant window at {:.4f} s leaves the clip", at_s));
  }

  std::vector<double> y(static_cast<std::size_t>(window));
  const double edge = std::exp(-12.0);
  const double mid = 0.5 * static_cast<double>(window - 1);
  for (long long n = 0; n < window; ++n) {
    const double prev = start + n > 0 ? samples[start + n - 1] : 0.0;
    const double emphasized = samples[start + n] - settings.pre_emphasis * prev;
    const double d = (static_cast<double>(n) - mid) / static_cast<double>(window + 1);
    const double w = (std::exp(-48.0 * d * d) - edge) / (1.0 - edge);
    y[static_cast<std::size_t>(n)] = emphasized * w;
  }

  std::vector<double> r(static_cast<std::size_t>(order) + 1, 0.0);
  for (int k = 0; k <= order; ++k) {
    for (std::size_t n = 0; n + k < y.size(); ++n) r[k] += y[n] * y[n + k];
  }
  if (!(r[0] > 0.0)) throw Error(ErrorCode::NoFormantsFound, "silent analysis window");

  const double nyquist = 0.5 * rate;
  std::vector<double> formants;
  for (const auto& [freq, bw] : lpc_resonances(levinson_durbin(r, order), rate)) {
    if (bw > 0.0 && bw < settings.max_bandwidth_hz && freq > settings.min_frequency_hz &&
        freq < nyquist - settings.min_frequency_hz) {
      formants.push_back(freq);
    }
  }
  if (formants.size() < 2) {
    throw Error(ErrorCode::NoFormantsFound, fmt::format("{} qualifying resonance(s) at {:.4f} s", formants.size(), at_s));
  }
  return {at_s, formants[0], formants[1]};
}

std::vector<Segment> silence_from_tier(const AnnotationTier& tier, const LanguageProfile& profile) {
  std::vector<Segment> out;
  for (const auto& iv : tier.intervals()) {
    const bool silent = profile.is_silence(iv.label);
    if (!out.empty() && out.back().silent == silent && std::abs(out.back().end - iv.start) < 1e-9) {
      out.back().end = iv.end;
    } else {
      out.push_back({iv.start, iv.end, silent});
    }
  }
  return out;
}

std::vector<Segment> silence_from_energy(const AudioClip& clip, double relative_db) {
  std::vector<Segment> out;
  const double duration = clip.duration();
  if (clip.empty()) return out;
  const auto contour = intensity_contour(clip);
  if (contour.frames.empty()) return {{0.0, duration, false}};

  std::vector<double> levels;
  levels.reserve(contour.frames.size());
  for (const auto& f : contour.frames) levels.push_back(f.db);
  std::sort(levels.begin(), levels.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(levels.size())));
  const double reference = levels[std::clamp<std::size_t>(rank, 1, levels.size()) - 1];
  const double threshold = reference - relative_db;
  const double half = 0.5 * contour.window_s;

  std::vector<std::pair<double, double>> silent;
  for (std::size_t k = 0; k < contour.frames.size();) {
    if (contour.frames[k].db >= threshold && reference > contour.floor_db) {
      ++k;
      continue;
    }
    std::size_t j = k;
    while (j + 1 < contour.frames.size() &&
           (contour.frames[j + 1].db < threshold || reference <= contour.floor_db)) {
      ++j;
    }
    double a = std::max(0.0, contour.frames[k].time - half);
    double b = std::min(duration, contour.frames[j].time + half);
    if (k == 0) a = 0.0;
    if (j + 1 == contour.frames.size()) b = duration;
    if (!silent.empty() && a <= silent.back().second) {
      silent.back().second = b;
    } else {
      silent.emplace_back(a, b);
    }
    k = j + 1;
  }

  double cursor = 0.0;
  for (const auto& [a, b] : silent) {
    if (a > cursor) out.push_back({cursor, a, false});
    out.push_back({a, b, true});
    cursor = b;
  }
  if (cursor < duration) out.push_back({cursor, duration, false});
  return out;
}

std::vector<Segment> segment_silence(const AudioClip& clip, const AnnotationTier* tier,
                                     const LanguageProfile& profile) {
  if (tier != nullptr) return silence_from_tier(*tier, profile);
  return silence_from_energy(clip);
}

std::string pitch_csv(const PitchContour& contour) {
  std::string out = "time,f0\n";
  for (const auto& f : contour.frames()) out += fmt::format("{:.4f},{:.4f}\n", f.time, f.f0.value_or(0.0));
  return out;
}

std::string intensity_csv(const IntensityContour& contour) {
  std::string out = "time,db\n";
  for (const auto& f : contour.frames) out += fmt::format("{:.4f},{:.4f}\n", f.time, f.db);
  return out;
}

}  // namespace dysarthria
