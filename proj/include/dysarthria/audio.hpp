#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace dysarthria {

/// Mono audio with samples normalized to [-1, 1].
class AudioClip {
 public:
  AudioClip() = default;
  /// Throws Error(InvalidArgument) when the rate is below 8 kHz or a sample is not finite.
  AudioClip(std::vector<double> samples, int sample_rate);

  std::span<const double> samples() const noexcept { return samples_; }
  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double duration() const noexcept {
    return sample_rate_ > 0 ? static_cast<double>(samples_.size()) / sample_rate_ : 0.0;
  }
  double operator[](std::size_t i) const noexcept { return samples_[i]; }

 private:
  std::vector<double> samples_;
  int sample_rate_ = 0;
};

enum class WavEncoding { Pcm16, Float32 };

/// Reads RIFF/WAVE files holding 16-bit PCM or 32-bit IEEE float samples.
/// Multichannel input is mean-downmixed; 16-bit values are divided by 32768.
AudioClip read_wav(const std::filesystem::path& path);

/// Multichannel variant used by tests and tools: frames interleaved.
void write_wav(const std::filesystem::path& path, std::span<const double> interleaved, int sample_rate,
               int channels, WavEncoding encoding);

inline void write_wav(const std::filesystem::path& path, const AudioClip& clip,
                      WavEncoding encoding = WavEncoding::Float32) {
  write_wav(path, clip.samples(), clip.sample_rate(), 1, encoding);
}

}  // namespace dysarthria
