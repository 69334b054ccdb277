// Objective evaluation: per-phoneme pitch error in semitones and duration
// error in milliseconds, plus plot-friendly contour exports.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "s2s/alignment.hpp"
#include "s2s/pitch.hpp"

namespace s2s {

struct PhonemeErrorRow {
  std::string phoneme;
  double ref_f0_hz = 0.0;        // after transposition into the target range
  double syn_f0_hz = 0.0;
  double err_semitones = 0.0;
  double ref_duration_s = 0.0;
  double syn_duration_s = 0.0;
  double err_ms = 0.0;
};

/// Mean and population standard deviation of the per-phoneme errors.
struct EvalReport {
  double pitch_error_mean = 0.0;   // semitones
  double pitch_error_std = 0.0;
  double duration_error_mean = 0.0;  // ms
  double duration_error_std = 0.0;
  std::vector<PhonemeErrorRow> rows;
};

struct PitchErrorStats {
  double mean_semitones = 0.0;
  double std_semitones = 0.0;
};
struct DurationErrorStats {
  double mean_ms = 0.0;
  double std_ms = 0.0;
};

/// Reference per-phoneme F0 is transposed by speaker_median/ref_median first;
/// the error per phoneme is |12*log2(syn/ref)|. Phonemes with no voiced
/// frames on either side are skipped.
PitchErrorStats pitch_error(const F0Contour& ref_contour, const Alignment& ref_align,
                            const F0Contour& syn_contour, const Alignment& syn_align,
                            double ref_median_hz, double speaker_median_hz,
                            PhonemeF0Stat stat = PhonemeF0Stat::Mean);

DurationErrorStats duration_error(const Alignment& ref_align, const Alignment& syn_align);

/// Full report with one row per evaluated non-silence phoneme.
EvalReport evaluate(const F0Contour& ref_contour, const Alignment& ref_align,
                    const F0Contour& syn_contour, const Alignment& syn_align,
                    double ref_median_hz, double speaker_median_hz,
                    PhonemeF0Stat stat = PhonemeF0Stat::Mean);

void save_eval_report(const EvalReport& report, const std::filesystem::path& path);

/// CSV `time_s,ref_f0,syn_f0`, frame-aligned by time; frames missing from one
/// contour (or unvoiced) leave that column blank.
void export_plot_data(const F0Contour& ref_contour, const F0Contour& syn_contour,
                      const std::filesystem::path& path);

}  // namespace s2s
