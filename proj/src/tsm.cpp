#include "s2s/tsm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace s2s {

namespace {

constexpr double kUnvoicedMarkSpacingS = 0.010;
constexpr double kMinStretchRatio = 0.3;
constexpr double kMaxStretchRatio = 3.5;
constexpr double kMinPitchRatio = 0.25;
constexpr double kMaxPitchRatio = 4.0;

double lerp_segment(double x, double x0, double x1, double y0, double y1) {
  if (x1 == x0) return y0;
  return y0 + (x - x0) * (y1 - y0) / (x1 - x0);
}

// Piecewise-linear lookup over anchors, extrapolating the end segments.
double piecewise(const std::vector<TimeMap::Anchor>& a, double x, bool source_to_target) {
  auto key = [source_to_target](const TimeMap::Anchor& p) {
    return source_to_target ? p.source_s : p.target_s;
  };
  auto val = [source_to_target](const TimeMap::Anchor& p) {
    return source_to_target ? p.target_s : p.source_s;
  };
  size_t hi = 1;
  while (hi + 1 < a.size() && key(a[hi]) < x) ++hi;
  return lerp_segment(x, key(a[hi - 1]), key(a[hi]), val(a[hi - 1]), val(a[hi]));
}

}  // namespace

TimeMap TimeMap::uniform(double source_len_s, double ratio) {
  if (!(source_len_s > 0) || !(ratio > 0))
    throw std::runtime_error("TimeMap::uniform: length and ratio must be positive");
  TimeMap map;
  map.anchors = {{0.0, 0.0}, {source_len_s, source_len_s * ratio}};
  return map;
}

double TimeMap::source_at_target(double target_s) const {
  return piecewise(anchors, target_s, false);
}

double TimeMap::target_at_source(double source_s) const {
  return piecewise(anchors, source_s, true);
}

void TimeMap::validate() const {
  if (anchors.size() < 2) throw std::runtime_error("time map: need at least 2 anchors");
  if (std::abs(anchors.front().source_s) > 1e-9 || std::abs(anchors.front().target_s) > 1e-9)
    throw std::runtime_error("time map: must start at (0, 0)");
  for (size_t i = 1; i < anchors.size(); ++i) {
    if (!(anchors[i].source_s > anchors[i - 1].source_s) ||
        !(anchors[i].target_s > anchors[i - 1].target_s))
      throw std::runtime_error("time map: anchor " + std::to_string(i) +
                               " is not strictly increasing in both coordinates");
  }
}

AudioBuffer wsola_stretch(const AudioBuffer& buffer, const TimeMap& map,
                          const WsolaParams& params) {
  map.validate();
  const int sr = buffer.sample_rate;
  int frame_len = static_cast<int>(std::lround(params.frame_len_s * sr));
  frame_len -= frame_len % 2;  // even so the 50% hop is exact
  if (frame_len < 4) throw std::runtime_error("wsola: frame length too short");
  if (buffer.size() <= static_cast<size_t>(frame_len))
    throw std::runtime_error("wsola: buffer shorter than one frame");
  const long long tol = std::llround(params.tolerance_s * sr);
  if (tol < 1) throw std::runtime_error("wsola: tolerance below one sample");
  if (std::abs(map.source_len_s() - buffer.duration_s()) > std::max(0.05, params.frame_len_s))
    throw std::runtime_error("wsola: time map does not span the buffer (map source length " +
                             std::to_string(map.source_len_s()) + "s, buffer " +
                             std::to_string(buffer.duration_s()) + "s)");

  const int hop = frame_len / 2;
  const long long src_len = static_cast<long long>(buffer.size());
  const long long tgt_len = std::llround(map.target_len_s() * sr);

  // Periodic Hann: w[j] + w[j + hop] == 1, so steady-state OLA gain is 1.
  std::vector<double> window(frame_len);
  for (int j = 0; j < frame_len; ++j)
    window[j] = 0.5 - 0.5 * std::cos(2.0 * M_PI * j / frame_len);

  std::vector<double> acc(tgt_len + frame_len, 0.0);
  std::vector<double> wsum(tgt_len + frame_len, 0.0);

  const long long max_start = std::max<long long>(0, src_len - frame_len);
  // The reference for the similarity search is the natural (unwindowed)
  // continuation of the previously copied frame: the signal the output tail
  // would follow if the previous frame simply kept playing. At perfect
  // alignment the normalized cross-correlation is exactly 1.
  std::vector<double> tail(hop);
  long long prev = 0;
  for (long long pos = 0; pos <= tgt_len; pos += hop) {
    const double nominal_s = map.source_at_target(static_cast<double>(pos) / sr);
    const long long nominal = std::clamp(std::llround(nominal_s * sr), 0LL, max_start);
    long long chosen = nominal;
    if (pos > 0) {
      for (int j = 0; j < hop; ++j) tail[j] = buffer.at_or_zero(prev + hop + j);
      double best = -2.0;
      const long long lo = std::max<long long>(0, nominal - tol);
      const long long hi = std::min(max_start, nominal + tol);
      for (long long s = lo; s <= hi; ++s) {
        double dot = 0.0, e_cand = 0.0, e_tail = 0.0;
        for (int j = 0; j < hop; ++j) {
          const double c = buffer.samples[s + j];
          dot += c * tail[j];
          e_cand += c * c;
          e_tail += tail[j] * tail[j];
        }
        const double score = dot / (std::sqrt(e_cand * e_tail) + 1e-12);
        if (score > best) {
          best = score;
          chosen = s;
        }
      }
    }
    for (int j = 0; j < frame_len; ++j) {
      acc[pos + j] += buffer.samples[chosen + j] * window[j];
      wsum[pos + j] += window[j];
    }
    prev = chosen;
  }

  AudioBuffer out;
  out.sample_rate = sr;
  out.samples.resize(tgt_len);
  for (long long i = 0; i < tgt_len; ++i)
    out.samples[i] = wsum[i] > 1e-9 ? acc[i] / wsum[i] : 0.0;
  return out;
}

EpochTrack detect_epochs(const AudioBuffer& buffer, const F0Contour& contour) {
  if (buffer.empty()) throw std::runtime_error("detect_epochs: empty buffer");
  if (contour.frames.empty()) throw std::runtime_error("detect_epochs: empty contour");
  if (std::abs(contour.duration_s() - buffer.duration_s()) > 4.0 * contour.hop_s + 0.05)
    throw std::runtime_error("detect_epochs: contour is not aligned to the buffer");

  const int sr = buffer.sample_rate;
  const long long n = static_cast<long long>(buffer.size());
  const double hop_samples = contour.hop_s * sr;
  const long long uv_spacing = std::max<long long>(1, std::llround(kUnvoicedMarkSpacingS * sr));

  auto frame_at = [&](long long sample) {
    const long long i = std::llround(static_cast<double>(sample) / hop_samples);
    return std::clamp<long long>(i, 0, static_cast<long long>(contour.size()) - 1);
  };

  EpochTrack track;
  auto push = [&track](long long mark, double period) {
    if (!track.marks.empty() && mark <= track.marks.back()) mark = track.marks.back() + 1;
    track.marks.push_back(mark);
    track.periods.push_back(period);
  };

  // Walk maximal runs of voiced/unvoiced frames; runs tile the whole buffer.
  size_t f = 0;
  while (f < contour.size()) {
    size_t g = f;
    const bool voiced = contour.frames[f].voiced;
    while (g < contour.size() && contour.frames[g].voiced == voiced) ++g;
    const long long seg_begin = std::llround(f * hop_samples);
    const long long seg_end = g < contour.size() ? std::llround(g * hop_samples) : n;
    if (seg_end <= seg_begin) {
      f = g;
      continue;
    }
    if (!voiced) {
      for (long long t = seg_begin; t < seg_end; t += uv_spacing)
        push(t, static_cast<double>(uv_spacing));
      f = g;
      continue;
    }

    double period = sr / contour.frames[frame_at(seg_begin)].f0_hz;
    // First mark: strongest positive peak within one period of the region start.
    long long search_end = std::min(seg_end, seg_begin + std::llround(period));
    long long mark = seg_begin;
    double best = -1e30;
    for (long long t = seg_begin; t < search_end; ++t)
      if (buffer.samples[t] > best) {
        best = buffer.samples[t];
        mark = t;
      }
    push(mark, period);
    while (true) {
      period = sr / contour.frames[frame_at(mark)].f0_hz;
      const long long nominal = mark + std::llround(period);
      if (nominal >= seg_end) break;
      const long long lo = std::max(mark + 1, nominal - std::llround(period / 4.0));
      const long long hi = std::min(seg_end - 1, nominal + std::llround(period / 4.0));
      if (lo > hi) break;
      long long next = lo;
      best = -1e30;
      for (long long t = lo; t <= hi; ++t)
        if (buffer.samples[t] > best) {
          best = buffer.samples[t];
          next = t;
        }
      push(next, sr / contour.frames[frame_at(next)].f0_hz);
      mark = next;
    }
    f = g;
  }
  return track;
}

AudioBuffer psola_shift(const AudioBuffer& buffer, const EpochTrack& epochs,
                        std::span<const double> ratio_curve) {
  if (epochs.marks.empty()) throw std::runtime_error("psola: empty epoch track");
  if (ratio_curve.size() != buffer.size())
    throw std::runtime_error("psola: ratio curve must have one value per sample");
  for (double r : ratio_curve)
    if (!(r >= kMinPitchRatio) || !(r <= kMaxPitchRatio))
      throw std::runtime_error("psola: pitch ratio outside [" +
                               std::to_string(kMinPitchRatio) + ", " +
                               std::to_string(kMaxPitchRatio) + "]");

  const long long n = static_cast<long long>(buffer.size());
  std::vector<double> acc(buffer.size(), 0.0);
  std::vector<double> wsum(buffer.size(), 0.0);

  auto nearest_mark = [&epochs](double pos) {
    const auto it = std::lower_bound(epochs.marks.begin(), epochs.marks.end(),
                                     static_cast<long long>(std::llround(pos)));
    size_t j = static_cast<size_t>(it - epochs.marks.begin());
    if (j == epochs.marks.size()) return j - 1;
    if (j > 0 && pos - epochs.marks[j - 1] < epochs.marks[j] - pos) return j - 1;
    return j;
  };
  // Local period from the actual mark spacing; the contour-derived estimate
  // would drift against the integer mark grid.
  auto mark_spacing = [&epochs](size_t j) {
    if (j + 1 < epochs.marks.size())
      return static_cast<double>(epochs.marks[j + 1] - epochs.marks[j]);
    if (j > 0) return static_cast<double>(epochs.marks[j] - epochs.marks[j - 1]);
    return epochs.periods[j];
  };

  double pos = static_cast<double>(epochs.marks.front());
  while (pos < static_cast<double>(n)) {
    const size_t j = nearest_mark(pos);
    const long long center = epochs.marks[j];
    // Smooth window width (contour period) so consecutive grains share one
    // shape; integer mark spacing would flip the window every grain and leak
    // a subharmonic. Grains are placed at fractional positions via linear
    // interpolation for the same reason.
    const double half = std::max(2.0, epochs.periods[j]);

    const long long o_lo = std::max<long long>(0, static_cast<long long>(std::ceil(pos - half)));
    const long long o_hi =
        std::min<long long>(n - 1, static_cast<long long>(std::floor(pos + half)));
    for (long long o = o_lo; o <= o_hi; ++o) {
      const double d = static_cast<double>(o) - pos;
      const double w = 0.5 + 0.5 * std::cos(M_PI * d / half);
      const double src = static_cast<double>(center) + d;
      const long long s0 = static_cast<long long>(std::floor(src));
      const double fr = src - static_cast<double>(s0);
      acc[o] += ((1.0 - fr) * buffer.at_or_zero(s0) + fr * buffer.at_or_zero(s0 + 1)) * w;
      wsum[o] += w;
    }
    const long long ri = std::clamp<long long>(std::llround(pos), 0, n - 1);
    pos += mark_spacing(j) / ratio_curve[ri];
  }

  AudioBuffer out;
  out.sample_rate = buffer.sample_rate;
  out.samples.resize(buffer.size());
  for (long long i = 0; i < n; ++i)
    out.samples[i] = wsum[i] > 1e-9 ? acc[i] / wsum[i] : 0.0;
  return out;
}

AudioBuffer psola_shift(const AudioBuffer& buffer, const EpochTrack& epochs, double ratio) {
  std::vector<double> curve(buffer.size(), ratio);
  return psola_shift(buffer, epochs, curve);
}

StretchResult stretch_segments(const AudioBuffer& buffer, const Alignment& alignment,
                               std::span<const double> target_durations_s,
                               const WsolaParams& params) {
  if (alignment.intervals.empty()) throw std::runtime_error("stretch_segments: empty alignment");
  if (target_durations_s.size() != alignment.size())
    throw std::runtime_error("stretch_segments: need one target duration per interval");
  if (alignment.intervals.front().start_s > 0.01 ||
      std::abs(alignment.intervals.back().end_s - buffer.duration_s()) > 0.05)
    throw std::runtime_error("stretch_segments: alignment does not cover the buffer");

  TimeMap map;
  map.anchors.push_back({0.0, 0.0});
  double tgt = 0.0;
  for (size_t k = 0; k < alignment.size(); ++k) {
    const auto& iv = alignment.intervals[k];
    const double src_dur = iv.duration_s();
    const double tgt_dur = target_durations_s[k];
    if (!(tgt_dur > 0))
      throw std::runtime_error("stretch_segments: non-positive target for phoneme '" + iv.label +
                               "' (index " + std::to_string(k) + ")");
    const double ratio = tgt_dur / src_dur;
    if (ratio < kMinStretchRatio || ratio > kMaxStretchRatio)
      throw std::runtime_error("stretch_segments: phoneme '" + iv.label + "' (index " +
                               std::to_string(k) + ") needs ratio " + std::to_string(ratio) +
                               ", outside [" + std::to_string(kMinStretchRatio) + ", " +
                               std::to_string(kMaxStretchRatio) + "]");
    tgt += tgt_dur;
    map.anchors.push_back({iv.end_s, tgt});
  }
  // Audio past the last labeled interval (tail slack) passes through at 1:1.
  if (buffer.duration_s() > map.anchors.back().source_s) {
    const double slack = buffer.duration_s() - map.anchors.back().source_s;
    map.anchors.push_back({buffer.duration_s(), tgt + slack});
  }

  StretchResult result;
  result.audio = wsola_stretch(buffer, map, params);

  result.alignment.intervals.reserve(alignment.size());
  double t = 0.0;
  for (size_t k = 0; k < alignment.size(); ++k) {
    PhonemeInterval iv = alignment.intervals[k];
    iv.start_s = t;
    t += target_durations_s[k];
    iv.end_s = t;
    result.alignment.intervals.push_back(std::move(iv));
  }
  result.alignment.total_duration_s = result.audio.duration_s();
  return result;
}

}  // namespace s2s
