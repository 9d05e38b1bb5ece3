#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "dysarthria/audio.hpp"
#include "dysarthria/profile.hpp"

namespace testing {

inline std::filesystem::path profile_path(const std::string& language = "english") {
  return std::filesystem::path(DYSARTHRIA_DATA_DIR) / "profiles" / (language + ".json");
}

inline const dysarthria::LanguageProfile& english() {
  static const auto profile = dysarthria::load_profile(profile_path());
  return profile;
}

inline std::vector<double> sine(double hz, double seconds, int rate = 16000, double amplitude = 1.0) {
  std::vector<double> x(static_cast<std::size_t>(std::lround(seconds * rate)));
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate);
  }
  return x;
}

inline dysarthria::AudioClip sine_clip(double hz, double seconds, int rate = 16000, double amplitude = 1.0) {
  return {sine(hz, seconds, rate, amplitude), rate};
}

/// Two-pole resonator y[n] = x[n] + 2 r cos(w) y[n-1] - r^2 y[n-2].
inline std::vector<double> resonator(const std::vector<double>& x, double hz, double bandwidth, int rate) {
  const double r = std::exp(-std::numbers::pi * bandwidth / rate);
  const double a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * hz / rate);
  const double a2 = -r * r;
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    y[n] = x[n] + (n >= 1 ? a1 * y[n - 1] : 0.0) + (n >= 2 ? a2 * y[n - 2] : 0.0);
  }
  return y;
}

/// Unit impulses every 1/f0 seconds through a resonator cascade, peak-normalized to 0.8.
inline dysarthria::AudioClip impulse_vowel(double f0, const std::vector<std::pair<double, double>>& formants,
                                           double seconds = 0.5, int rate = 16000) {
  std::vector<double> x(static_cast<std::size_t>(seconds * rate), 0.0);
  for (double t = 0.0; t < seconds; t += 1.0 / f0) {
    const auto i = static_cast<std::size_t>(std::lround(t * rate));
    if (i < x.size()) x[i] = 1.0;
  }
  for (const auto& [hz, bw] : formants) x = resonator(x, hz, bw, rate);
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  for (double& v : x) v *= 0.8 / peak;
  return {x, rate};
}

/// Exactly periodic: harmonics of f0 up to 4 kHz weighted by the magnitude
/// response of the same resonator cascade.
inline dysarthria::AudioClip harmonic_vowel(double f0, const std::vector<std::pair<double, double>>& formants,
                                            double seconds = 0.5, int rate = 16000) {
  std::vector<double> x(static_cast<std::size_t>(seconds * rate), 0.0);
  for (int k = 1; k * f0 < 4000.0; ++k) {
    const double w = 2.0 * std::numbers::pi * k * f0 / rate;
    double gain = 1.0;
    for (const auto& [hz, bw] : formants) {
      const double r = std::exp(-std::numbers::pi * bw / rate);
      const double a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * hz / rate);
      const double re = 1.0 - a1 * std::cos(w) + r * r * std::cos(2.0 * w);
      const double im = a1 * std::sin(w) - r * r * std::sin(2.0 * w);
      gain /= std::hypot(re, im);
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += gain * std::cos(w * static_cast<double>(i));
  }
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  for (double& v : x) v *= 0.8 / peak;
  return {x, rate};
}

/// Directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("dysarthria_test_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace testing
