#include "s2s/retarget.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace s2s {

namespace {

constexpr double kBoundaryFadeS = 0.020;
constexpr double kMinPitchRatio = 0.25;
constexpr double kMaxPitchRatio = 4.0;

void check_request(const BackendRequest& request) {
  const auto src = request.source_alignment.nonsilence_labels();
  const auto tgt = request.score.nonsilence_phonemes();
  if (src.size() != tgt.size())
    throw std::runtime_error("synthesize: source has " + std::to_string(src.size()) +
                             " non-silence phonemes but the score has " +
                             std::to_string(tgt.size()));
  for (size_t i = 0; i < src.size(); ++i)
    if (src[i] != tgt[i])
      throw std::runtime_error("synthesize: phoneme sequence mismatch at position " +
                               std::to_string(i) + ": source '" + src[i] + "' vs score '" +
                               tgt[i] + "'");
}

/// Target duration per source interval. Non-silence intervals take the score
/// targets in order. Silences pair up with the score's silence entries when
/// the two sequences are structurally identical, otherwise they keep their
/// spoken duration.
std::vector<double> interval_targets(const Alignment& alignment, const Score& score) {
  const bool structurally_equal = [&] {
    if (alignment.size() != score.entries.size()) return false;
    for (size_t k = 0; k < alignment.size(); ++k)
      if (alignment.intervals[k].is_silence != score.entries[k].is_silence()) return false;
    return true;
  }();

  std::vector<double> targets(alignment.size());
  size_t j = 0;
  for (size_t k = 0; k < alignment.size(); ++k) {
    const auto& iv = alignment.intervals[k];
    if (iv.is_silence) {
      targets[k] = structurally_equal ? score.entries[k].target_duration_s : iv.duration_s();
    } else {
      while (j < score.entries.size() && score.entries[j].is_silence()) ++j;
      targets[k] = score.entries[j].target_duration_s;
      ++j;
    }
  }
  return targets;
}

/// Score entry index for the k-th non-silence interval.
std::vector<size_t> nonsilence_entry_indices(const Score& score) {
  std::vector<size_t> out;
  for (size_t j = 0; j < score.entries.size(); ++j)
    if (!score.entries[j].is_silence()) out.push_back(j);
  return out;
}

size_t frame_index(const F0Contour& contour, long long sample, int sample_rate) {
  const double hop_samples = contour.hop_s * sample_rate;
  const long long i = std::llround(static_cast<double>(sample) / hop_samples);
  return static_cast<size_t>(std::clamp<long long>(i, 0, static_cast<long long>(contour.size()) - 1));
}

}  // namespace

DspBackend::DspBackend(PitchConfig pitch_config, WsolaParams wsola_params)
    : pitch_(pitch_config), wsola_(wsola_params) {}

AudioBuffer DspBackend::synthesize(const BackendRequest& request) const {
  check_request(request);
  if (request.source.empty()) throw std::runtime_error("synthesize: empty source buffer");

  const auto targets = interval_targets(request.source_alignment, request.score);
  StretchResult stretched =
      stretch_segments(request.source, request.source_alignment, targets, wsola_);

  const F0Contour raw = extract_f0(stretched.audio, pitch_);
  const auto means = phoneme_f0(raw, stretched.alignment);
  const auto entry_of = nonsilence_entry_indices(request.score);

  // Per-interval log pitch ratio: note frequency over measured mean F0.
  // Unvoiced phonemes and silences stay at ratio 1.
  const size_t n_intervals = stretched.alignment.size();
  std::vector<double> log_ratio(n_intervals, 0.0);
  size_t nonsil = 0;
  for (size_t k = 0; k < n_intervals; ++k) {
    const auto& iv = stretched.alignment.intervals[k];
    if (iv.is_silence) continue;
    const size_t entry = entry_of[nonsil++];
    if (!means[k]) continue;  // no voiced frames in this phoneme
    const double target_hz = note_to_hz(*request.score.entries[entry].note);
    const double ratio = target_hz / *means[k];
    if (ratio < kMinPitchRatio || ratio > kMaxPitchRatio)
      throw std::runtime_error("synthesize: phoneme '" + iv.label + "' (index " +
                               std::to_string(k) + ") needs pitch ratio " +
                               std::to_string(ratio) + ", outside [" +
                               std::to_string(kMinPitchRatio) + ", " +
                               std::to_string(kMaxPitchRatio) + "]");
    log_ratio[k] = std::log(ratio);
  }

  const int sr = stretched.audio.sample_rate;
  const long long n = static_cast<long long>(stretched.audio.size());
  std::vector<double> curve(n, 0.0);
  for (size_t k = 0; k < n_intervals; ++k) {
    const auto& iv = stretched.alignment.intervals[k];
    const long long lo = std::clamp<long long>(std::llround(iv.start_s * sr), 0, n);
    const long long hi = std::clamp<long long>(std::llround(iv.end_s * sr), 0, n);
    std::fill(curve.begin() + lo, curve.begin() + hi, log_ratio[k]);
  }
  if (n_intervals > 0) {
    const auto& last = stretched.alignment.intervals.back();
    const long long hi = std::clamp<long long>(std::llround(last.end_s * sr), 0, n);
    std::fill(curve.begin() + hi, curve.end(), log_ratio[n_intervals - 1]);
  }
  // Linear cross-fade of the log ratio across each interior boundary.
  for (size_t k = 0; k + 1 < n_intervals; ++k) {
    const auto& a = stretched.alignment.intervals[k];
    const auto& b = stretched.alignment.intervals[k + 1];
    const double half_s =
        std::min({kBoundaryFadeS / 2.0, a.duration_s() / 2.0, b.duration_s() / 2.0});
    const long long half = std::llround(half_s * sr);
    if (half < 1) continue;
    const long long center = std::llround(a.end_s * sr);
    for (long long d = -half; d < half; ++d) {
      const long long i = center + d;
      if (i < 0 || i >= n) continue;
      const double t = (static_cast<double>(d) + half) / (2.0 * half);
      curve[i] = log_ratio[k] + t * (log_ratio[k + 1] - log_ratio[k]);
    }
  }
  for (auto& v : curve) v = std::exp(v);

  const EpochTrack epochs = detect_epochs(stretched.audio, raw);
  return psola_shift(stretched.audio, epochs, curve);
}

AudioBuffer synthesize(const BackendRequest& request) { return DspBackend().synthesize(request); }

AudioBuffer augment(const AudioBuffer& buffer, const F0Contour& contour, int semitones,
                    double rate) {
  if (semitones < -6 || semitones > 6)
    throw std::runtime_error("augment: semitones must lie in [-6, 6]");
  if (!(rate >= 0.7) || !(rate <= 1.3))
    throw std::runtime_error("augment: rate must lie in [0.7, 1.3]");

  AudioBuffer work = buffer;
  F0Contour cont = contour;
  if (rate != 1.0) {
    work = wsola_stretch(buffer, TimeMap::uniform(buffer.duration_s(), 1.0 / rate));
    // WSOLA preserves pitch, so the contour just rescales in time.
    const size_t n_frames = static_cast<size_t>(std::floor(
                                (work.size() - 1) / (contour.hop_s * work.sample_rate))) +
                            1;
    cont.frames.resize(n_frames);
    for (size_t i = 0; i < n_frames; ++i) {
      const double src_time = contour.time_of(i) * rate;
      const size_t j = std::min(contour.size() - 1,
                                static_cast<size_t>(std::llround(src_time / contour.hop_s)));
      cont.frames[i] = contour.frames[j];
    }
  }
  if (semitones == 0) return work;

  const double shift = std::exp2(semitones / 12.0);
  std::vector<double> curve(work.size());
  for (size_t i = 0; i < work.size(); ++i) {
    const size_t f = frame_index(cont, static_cast<long long>(i), work.sample_rate);
    curve[i] = cont.frames[f].voiced ? shift : 1.0;
  }
  const EpochTrack epochs = detect_epochs(work, cont);
  return psola_shift(work, epochs, curve);
}

}  // namespace s2s
