#include "s2s/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace s2s {

namespace {

struct RiffChunk {
  char id[4];
  uint32_t size;
};

uint16_t read_u16(const uint8_t* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }
uint32_t read_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0] | (p[1] << 8) | (p[2] << 16) | (uint32_t(p[3]) << 24));
}

void write_u16(std::ostream& os, uint16_t v) {
  char b[2] = {char(v & 0xff), char(v >> 8)};
  os.write(b, 2);
}
void write_u32(std::ostream& os, uint32_t v) {
  char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff), char(v >> 24)};
  os.write(b, 4);
}

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatIeeeFloat = 3;

// Kaiser window parameters for the resampler: 64 taps, ~70 dB stopband.
constexpr int kResampleTaps = 64;
constexpr double kKaiserBeta = 6.755;
constexpr double kStopbandDb = 70.0;

double bessel_i0(double x) {
  // Power series; converges fast for the beta values used here.
  double sum = 1.0, term = 1.0;
  const double half_x = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half_x / k) * (half_x / k);
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

}  // namespace

AudioBuffer load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open WAV file: " + path.string());

  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error("malformed WAV header (not RIFF/WAVE): " + path.string());

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  const uint8_t* data_ptr = nullptr;
  size_t data_size = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    uint32_t size = read_u32(bytes.data() + pos + 4);
    pos += 8;
    if (pos + size > bytes.size())
      throw std::runtime_error("malformed WAV: truncated chunk in " + path.string());
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw std::runtime_error("malformed WAV: fmt chunk too small");
      format = read_u16(bytes.data() + pos);
      channels = read_u16(bytes.data() + pos + 2);
      rate = read_u32(bytes.data() + pos + 4);
      bits = read_u16(bytes.data() + pos + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_ptr = bytes.data() + pos;
      data_size = size;
    }
    pos += size + (size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data_ptr == nullptr)
    throw std::runtime_error("malformed WAV: missing fmt or data chunk in " + path.string());
  if (channels < 1 || channels > 2)
    throw std::runtime_error("unsupported WAV: " + std::to_string(channels) +
                             " channels (want mono or stereo)");
  if (rate == 0) throw std::runtime_error("malformed WAV: zero sample rate");

  const bool pcm16 = (format == kFormatPcm && bits == 16);
  const bool float32 = (format == kFormatIeeeFloat && bits == 32);
  if (!pcm16 && !float32)
    throw std::runtime_error("unsupported WAV encoding: format " + std::to_string(format) +
                             ", " + std::to_string(bits) + " bits (want PCM16 or float32)");

  const size_t bytes_per_sample = bits / 8;
  const size_t frame_bytes = bytes_per_sample * channels;
  const size_t n_frames = data_size / frame_bytes;

  AudioBuffer out;
  out.sample_rate = static_cast<int>(rate);
  out.samples.resize(n_frames);
  for (size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const uint8_t* sp = data_ptr + i * frame_bytes + c * bytes_per_sample;
      double v;
      if (pcm16) {
        int16_t s = static_cast<int16_t>(read_u16(sp));
        v = s / 32768.0;
      } else {
        uint32_t u = read_u32(sp);
        float f;
        std::memcpy(&f, &u, 4);
        v = f;
      }
      acc += v;
    }
    double s = acc / channels;
    if (!std::isfinite(s)) s = 0.0;
    out.samples[i] = std::clamp(s, -1.0, 1.0);
  }
  return out;
}

void save_wav(const AudioBuffer& buffer, const std::filesystem::path& path, WavBitDepth depth) {
  if (buffer.empty()) throw std::runtime_error("save_wav: empty buffer");
  if (buffer.sample_rate <= 0) throw std::runtime_error("save_wav: invalid sample rate");

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write WAV file: " + path.string());

  const bool pcm16 = (depth == WavBitDepth::Pcm16);
  const uint32_t bytes_per_sample = pcm16 ? 2 : 4;
  const uint32_t data_size = static_cast<uint32_t>(buffer.size() * bytes_per_sample);

  os.write("RIFF", 4);
  write_u32(os, 36 + data_size);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  write_u32(os, 16);
  write_u16(os, pcm16 ? kFormatPcm : kFormatIeeeFloat);
  write_u16(os, 1);  // mono
  write_u32(os, static_cast<uint32_t>(buffer.sample_rate));
  write_u32(os, static_cast<uint32_t>(buffer.sample_rate) * bytes_per_sample);
  write_u16(os, static_cast<uint16_t>(bytes_per_sample));
  write_u16(os, static_cast<uint16_t>(bytes_per_sample * 8));
  os.write("data", 4);
  write_u32(os, data_size);

  for (double s : buffer.samples) {
    s = std::clamp(s, -1.0, 1.0);
    if (pcm16) {
      long v = std::lround(s * 32768.0);
      v = std::clamp(v, -32768L, 32767L);
      write_u16(os, static_cast<uint16_t>(static_cast<int16_t>(v)));
    } else {
      float f = static_cast<float>(s);
      uint32_t u;
      std::memcpy(&u, &f, 4);
      write_u32(os, u);
    }
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

AudioBuffer resample(const AudioBuffer& buffer, int target_rate) {
  if (target_rate <= 0) throw std::runtime_error("resample: target rate must be positive");
  if (buffer.sample_rate <= 0) throw std::runtime_error("resample: invalid source rate");
  if (target_rate == buffer.sample_rate || buffer.empty()) {
    AudioBuffer out = buffer;
    out.sample_rate = target_rate;
    return out;
  }

  const double ratio = static_cast<double>(target_rate) / buffer.sample_rate;
  const size_t out_len =
      static_cast<size_t>(std::llround(static_cast<double>(buffer.size()) * ratio));

  // Ideal cutoff sits half a transition band below the lower Nyquist so the
  // stopband starts right at it. Normalized to the source rate.
  const int order = kResampleTaps - 1;
  const double transition = (kStopbandDb - 7.95) / (2.285 * 2.0 * M_PI * order);
  const double min_nyq = 0.5 * std::min(1.0, ratio);
  const double cutoff = std::max(min_nyq - transition / 2.0, min_nyq * 0.5);

  const double half_span = kResampleTaps / 2.0;
  const double i0_beta = bessel_i0(kKaiserBeta);

  AudioBuffer out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len);
  for (size_t n = 0; n < out_len; ++n) {
    const double t = static_cast<double>(n) / ratio;  // position in source samples
    const long long base = static_cast<long long>(std::floor(t));
    double acc = 0.0, wsum = 0.0;
    for (int k = -kResampleTaps / 2 + 1; k <= kResampleTaps / 2; ++k) {
      const long long idx = base + k;
      const double d = t - static_cast<double>(idx);
      const double r = d / half_span;
      if (r <= -1.0 || r >= 1.0) continue;
      const double w = bessel_i0(kKaiserBeta * std::sqrt(1.0 - r * r)) / i0_beta;
      const double h = 2.0 * cutoff * sinc(2.0 * cutoff * d) * w;
      acc += buffer.at_or_zero(idx) * h;
      wsum += h;
    }
    out.samples[n] = wsum != 0.0 ? std::clamp(acc / wsum, -1.0, 1.0) : 0.0;
  }
  return out;
}

}  // namespace s2s
