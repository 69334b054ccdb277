// F0 extraction (normalized-autocorrelation tracker), unvoiced-gap
// interpolation, log-domain median smoothing and pitch statistics.
#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "s2s/alignment.hpp"
#include "s2s/audio.hpp"

namespace s2s {

struct PitchConfig {
  double f_min_hz = 60.0;
  double f_max_hz = 600.0;
  double hop_s = 0.010;
  double voicing_threshold = 0.45;  // normalized autocorrelation peak, in (0,1)
};

struct F0Frame {
  double f0_hz = 0.0;  // 0 when unvoiced
  bool voiced = false;
};

/// Frame-indexed pitch track. Frame i is centered at time i * hop_s.
struct F0Contour {
  std::vector<F0Frame> frames;
  double hop_s = 0.010;
  double frame_length_s = 0.050;

  size_t size() const { return frames.size(); }
  double time_of(size_t i) const { return static_cast<double>(i) * hop_s; }
  double duration_s() const { return frames.empty() ? 0.0 : time_of(frames.size() - 1) + hop_s; }
  bool fully_voiced() const;
  size_t voiced_count() const;
};

/// One F0 estimate per hop. Voiced decisions come from the normalized
/// autocorrelation peak (window-autocorrelation compensated) against
/// config.voicing_threshold; the peak lag is refined parabolically.
F0Contour extract_f0(const AudioBuffer& buffer, const PitchConfig& config = {});

/// Fills unvoiced gaps by linear interpolation in log-frequency between the
/// nearest voiced anchors; leading/trailing runs copy the nearest anchor.
F0Contour interpolate_unvoiced(const F0Contour& contour);

/// Median filter in log-frequency with the given odd window; edge windows
/// shrink symmetrically. Requires a fully voiced contour.
F0Contour smooth(const F0Contour& contour, int window_frames);

enum class PhonemeF0Stat { Mean, Median };

/// Per-interval F0 statistic over the voiced frames whose centers fall in
/// [start, end). Silence intervals and intervals with no covered voiced frame
/// yield nullopt.
std::vector<std::optional<double>> phoneme_f0(const F0Contour& contour,
                                              const Alignment& alignment,
                                              PhonemeF0Stat stat = PhonemeF0Stat::Mean);

/// Median over the pooled voiced F0 values of all contours. Even-sized pools
/// take the mean of the middle pair.
double speaker_median_f0(std::span<const F0Contour> contours);
double speaker_median_f0(const F0Contour& contour);

/// CSV export, one `time_s,f0_hz,voiced` row per frame.
void export_contour_csv(const F0Contour& contour, const std::filesystem::path& path);

}  // namespace s2s
