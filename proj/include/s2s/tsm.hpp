// Time-scale and pitch modification: WSOLA stretching over a piecewise-linear
// time map, pitch-mark detection and TD-PSOLA pitch shifting.
#pragma once

#include <span>
#include <vector>

#include "s2s/alignment.hpp"
#include "s2s/audio.hpp"
#include "s2s/pitch.hpp"

namespace s2s {

/// Piecewise-linear source<->target time correspondence. Anchors start at
/// (0,0) and both coordinates are strictly increasing.
struct TimeMap {
  struct Anchor {
    double source_s = 0.0;
    double target_s = 0.0;
  };
  std::vector<Anchor> anchors;

  static TimeMap uniform(double source_len_s, double ratio);

  double source_len_s() const { return anchors.empty() ? 0.0 : anchors.back().source_s; }
  double target_len_s() const { return anchors.empty() ? 0.0 : anchors.back().target_s; }
  double source_at_target(double target_s) const;
  double target_at_source(double source_s) const;
  void validate() const;  // throws on degenerate maps
};

struct WsolaParams {
  double frame_len_s = 0.025;
  double tolerance_s = 0.010;
};

/// Duration change without pitch change. Hann-windowed frames at 50% overlap;
/// each analysis frame is picked within +-tolerance of the map-inverse
/// position by maximizing normalized cross-correlation with the already
/// synthesized output tail. Output has exactly round(target_len * sr) samples.
AudioBuffer wsola_stretch(const AudioBuffer& buffer, const TimeMap& map,
                          const WsolaParams& params = {});

/// Pitch-mark positions (ascending sample indices) with local period
/// estimates in samples.
struct EpochTrack {
  std::vector<long long> marks;
  std::vector<double> periods;

  size_t size() const { return marks.size(); }
};

/// One mark per period at local waveform maxima in voiced regions (positions
/// predicted by 1/f0 spacing); uniform 10 ms marks in unvoiced regions.
EpochTrack detect_epochs(const AudioBuffer& buffer, const F0Contour& contour);

/// TD-PSOLA: local F0 multiplied by ratio_curve (one value per input sample,
/// all within [0.25, 4]); duration preserved. Grains are two-period Hann
/// windows centered on the nearest analysis mark.
AudioBuffer psola_shift(const AudioBuffer& buffer, const EpochTrack& epochs,
                        std::span<const double> ratio_curve);
AudioBuffer psola_shift(const AudioBuffer& buffer, const EpochTrack& epochs, double ratio);

struct StretchResult {
  AudioBuffer audio;
  Alignment alignment;  // boundaries moved to the target positions
};

/// Per-phoneme duration matching: builds a TimeMap with one anchor per
/// phoneme boundary and runs a single WSOLA pass over it. Per-phoneme ratios
/// outside [0.3, 3.5] are rejected with the phoneme named.
StretchResult stretch_segments(const AudioBuffer& buffer, const Alignment& alignment,
                               std::span<const double> target_durations_s,
                               const WsolaParams& params = {});

}  // namespace s2s
