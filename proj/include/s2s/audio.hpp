// Mono audio container, WAV file I/O and windowed-sinc resampling.
#pragma once

#include <filesystem>
#include <vector>

namespace s2s {

inline constexpr int kDefaultRateHz = 24000;

/// Mono sample sequence in [-1, 1] plus its sample rate. Treated as an
/// immutable value after construction; all operations return new buffers.
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = kDefaultRateHz;

  size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
  /// Sample at index i, zero outside the buffer.
  double at_or_zero(long long i) const {
    return (i >= 0 && i < static_cast<long long>(samples.size())) ? samples[i] : 0.0;
  }
};

enum class WavBitDepth { Pcm16, Float32 };

/// Reads a RIFF/WAVE file (PCM16 or IEEE float32, 1-2 channels) as a mono
/// buffer with samples scaled to [-1, 1]. Stereo is averaged.
AudioBuffer load_wav(const std::filesystem::path& path);

/// Writes a mono WAV file. Pcm16 round-trips within 1 LSB, Float32 exactly.
void save_wav(const AudioBuffer& buffer, const std::filesystem::path& path,
              WavBitDepth depth = WavBitDepth::Pcm16);

/// Band-limited rate conversion with a fixed 64-tap Kaiser-windowed sinc
/// kernel. Output length is round(n * target_rate / source_rate).
AudioBuffer resample(const AudioBuffer& buffer, int target_rate);

}  // namespace s2s
