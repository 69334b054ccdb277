#include "s2s/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace s2s {

namespace {

// Analysis window spans this many periods of f_min.
constexpr double kWindowPeriods = 3.0;
// Frames whose peak is below this fraction of the global peak are unvoiced.
constexpr double kSilenceThreshold = 0.01;
// Candidate ranking bonus per octave toward higher frequencies; breaks the
// tie between a true period and its integer multiples.
constexpr double kOctaveCost = 0.012;

void check_config(const PitchConfig& c, int sample_rate) {
  if (!(c.f_min_hz > 0) || !(c.f_max_hz > c.f_min_hz) || c.f_max_hz >= sample_rate / 2.0)
    throw std::runtime_error("pitch config: need 0 < f_min < f_max < sample_rate/2");
  if (!(c.hop_s > 0)) throw std::runtime_error("pitch config: hop must be positive");
  if (!(c.voicing_threshold > 0) || !(c.voicing_threshold < 1))
    throw std::runtime_error("pitch config: voicing threshold must be in (0,1)");
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

bool F0Contour::fully_voiced() const {
  return std::all_of(frames.begin(), frames.end(), [](const F0Frame& f) { return f.voiced; });
}

size_t F0Contour::voiced_count() const {
  return static_cast<size_t>(
      std::count_if(frames.begin(), frames.end(), [](const F0Frame& f) { return f.voiced; }));
}

F0Contour extract_f0(const AudioBuffer& buffer, const PitchConfig& config) {
  check_config(config, buffer.sample_rate);
  const int sr = buffer.sample_rate;
  const int win = std::max(8, static_cast<int>(std::lround(kWindowPeriods / config.f_min_hz * sr)));
  if (buffer.size() < static_cast<size_t>(2 * win))
    throw std::runtime_error("extract_f0: buffer shorter than two analysis windows");

  const int lag_min = std::max(2, static_cast<int>(std::floor(sr / config.f_max_hz)));
  const int lag_max = std::min(win - 2, static_cast<int>(std::ceil(sr / config.f_min_hz)));
  if (lag_min + 2 >= lag_max) throw std::runtime_error("extract_f0: f range too narrow for window");

  std::vector<double> window(win);
  for (int j = 0; j < win; ++j)
    window[j] = 0.5 - 0.5 * std::cos(2.0 * M_PI * j / (win - 1));

  // Autocorrelation of the window itself, used to undo the taper bias.
  std::vector<double> win_ac(lag_max + 1, 0.0);
  for (int lag = 0; lag <= lag_max; ++lag) {
    double s = 0.0;
    for (int j = 0; j + lag < win; ++j) s += window[j] * window[j + lag];
    win_ac[lag] = s;
  }
  for (int lag = lag_max; lag >= 0; --lag) win_ac[lag] /= win_ac[0];

  double global_peak = 0.0;
  for (double s : buffer.samples) global_peak = std::max(global_peak, std::abs(s));

  const double hop_samples = config.hop_s * sr;
  const size_t n_frames =
      static_cast<size_t>(std::floor((buffer.size() - 1) / hop_samples)) + 1;

  F0Contour contour;
  contour.hop_s = config.hop_s;
  contour.frame_length_s = static_cast<double>(win) / sr;
  contour.frames.resize(n_frames);

  std::vector<double> frame(win), ac(lag_max + 1);
  for (size_t i = 0; i < n_frames; ++i) {
    const long long center = std::llround(static_cast<double>(i) * hop_samples);
    double mean = 0.0;
    for (int j = 0; j < win; ++j) {
      frame[j] = buffer.at_or_zero(center - win / 2 + j);
      mean += frame[j];
    }
    mean /= win;
    double local_peak = 0.0;
    for (int j = 0; j < win; ++j) {
      frame[j] = (frame[j] - mean) * window[j];
      local_peak = std::max(local_peak, std::abs(frame[j]));
    }
    if (global_peak <= 0.0 || local_peak < kSilenceThreshold * global_peak) continue;

    double e0 = 0.0;
    for (int j = 0; j < win; ++j) e0 += frame[j] * frame[j];
    if (e0 <= 0.0) continue;
    for (int lag = lag_min - 1; lag <= lag_max; ++lag) {
      double s = 0.0;
      for (int j = 0; j + lag < win; ++j) s += frame[j] * frame[j + lag];
      ac[lag] = (s / e0) / win_ac[lag];
    }

    // Best local maximum, parabolic refinement, octave-cost ranking.
    double best_score = -1e9, best_strength = 0.0, best_f = 0.0;
    for (int lag = lag_min; lag < lag_max; ++lag) {
      const double a = ac[lag - 1], b = ac[lag], c = ac[lag + 1];
      if (b < a || b <= c) continue;
      const double denom = a - 2.0 * b + c;
      const double p = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
      const double lag_ref = lag + std::clamp(p, -0.5, 0.5);
      const double strength = b - 0.25 * (a - c) * std::clamp(p, -0.5, 0.5);
      const double f = sr / lag_ref;
      if (f < config.f_min_hz || f > config.f_max_hz) continue;
      const double score = strength + kOctaveCost * std::log2(f / config.f_min_hz);
      if (score > best_score) {
        best_score = score;
        best_strength = strength;
        best_f = f;
      }
    }
    if (best_f > 0.0 && best_strength > config.voicing_threshold) {
      contour.frames[i].voiced = true;
      contour.frames[i].f0_hz = std::clamp(best_f, config.f_min_hz, config.f_max_hz);
    }
  }
  return contour;
}

F0Contour interpolate_unvoiced(const F0Contour& contour) {
  if (contour.voiced_count() == 0)
    throw std::runtime_error("interpolate_unvoiced: contour has no voiced frames");
  const size_t n = contour.size();
  std::vector<size_t> anchors;
  for (size_t i = 0; i < n; ++i)
    if (contour.frames[i].voiced) anchors.push_back(i);

  F0Contour out = contour;
  // Leading and trailing runs take the nearest anchor value.
  for (size_t i = 0; i < anchors.front(); ++i)
    out.frames[i] = {contour.frames[anchors.front()].f0_hz, true};
  for (size_t i = anchors.back() + 1; i < n; ++i)
    out.frames[i] = {contour.frames[anchors.back()].f0_hz, true};
  // Interior gaps: linear in log-frequency.
  for (size_t a = 0; a + 1 < anchors.size(); ++a) {
    const size_t lo = anchors[a], hi = anchors[a + 1];
    if (hi == lo + 1) continue;
    const double log_lo = std::log(contour.frames[lo].f0_hz);
    const double log_hi = std::log(contour.frames[hi].f0_hz);
    for (size_t i = lo + 1; i < hi; ++i) {
      const double t = static_cast<double>(i - lo) / static_cast<double>(hi - lo);
      out.frames[i] = {std::exp(log_lo + t * (log_hi - log_lo)), true};
    }
  }
  return out;
}

F0Contour smooth(const F0Contour& contour, int window_frames) {
  if (window_frames <= 0 || window_frames % 2 == 0)
    throw std::runtime_error("smooth: window must be an odd positive frame count");
  if (!contour.fully_voiced())
    throw std::runtime_error("smooth: contour must be fully voiced (interpolate first)");
  const int n = static_cast<int>(contour.size());
  const int half = window_frames / 2;
  F0Contour out = contour;
  std::vector<double> buf;
  for (int i = 0; i < n; ++i) {
    const int h = std::min({half, i, n - 1 - i});  // symmetric shrink keeps the window odd
    buf.clear();
    for (int j = i - h; j <= i + h; ++j) buf.push_back(std::log(contour.frames[j].f0_hz));
    std::nth_element(buf.begin(), buf.begin() + buf.size() / 2, buf.end());
    out.frames[i].f0_hz = std::exp(buf[buf.size() / 2]);
  }
  return out;
}

std::vector<std::optional<double>> phoneme_f0(const F0Contour& contour,
                                              const Alignment& alignment, PhonemeF0Stat stat) {
  if (contour.frames.empty()) throw std::runtime_error("phoneme_f0: empty contour");
  const double contour_end = contour.duration_s();
  std::vector<std::optional<double>> out(alignment.size());
  std::vector<double> values;
  for (size_t k = 0; k < alignment.size(); ++k) {
    const auto& iv = alignment.intervals[k];
    if (iv.is_silence) continue;
    if (iv.start_s < -1e-9 || iv.start_s >= contour_end + contour.hop_s)
      throw std::runtime_error("phoneme_f0: interval '" + iv.label + "' at " +
                               std::to_string(iv.start_s) + "s lies outside the contour");
    const size_t first = static_cast<size_t>(std::max(0.0, std::ceil(iv.start_s / contour.hop_s - 1e-9)));
    values.clear();
    for (size_t i = first; i < contour.size() && contour.time_of(i) < iv.end_s - 1e-9; ++i)
      if (contour.frames[i].voiced) values.push_back(contour.frames[i].f0_hz);
    if (values.empty()) continue;  // reported as nullopt for this phoneme
    if (stat == PhonemeF0Stat::Mean) {
      double s = 0.0;
      for (double v : values) s += v;
      out[k] = s / values.size();
    } else {
      out[k] = median_of(values);
    }
  }
  return out;
}

double speaker_median_f0(std::span<const F0Contour> contours) {
  std::vector<double> pool;
  for (const auto& c : contours)
    for (const auto& f : c.frames)
      if (f.voiced) pool.push_back(f.f0_hz);
  if (pool.empty()) throw std::runtime_error("speaker_median_f0: no voiced frames");
  return median_of(std::move(pool));
}

double speaker_median_f0(const F0Contour& contour) {
  return speaker_median_f0(std::span<const F0Contour>(&contour, 1));
}

void export_contour_csv(const F0Contour& contour, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write contour CSV: " + path.string());
  os << "time_s,f0_hz,voiced\n";
  char line[96];
  for (size_t i = 0; i < contour.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.6f,%.6f,%d\n", contour.time_of(i),
                  contour.frames[i].f0_hz, contour.frames[i].voiced ? 1 : 0);
    os << line;
  }
}

}  // namespace s2s
