// Pitch transposition into the target range, note/octave labeling,
// equal-frequency duration quantization and Score assembly/serialization.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "s2s/alignment.hpp"
#include "s2s/pitch.hpp"

namespace s2s {

/// Pitch class (0..11, C=0) and octave, anchored at C0 ~ 16.35 Hz.
struct NoteLabel {
  int note = 0;
  int octave = 0;

  bool operator==(const NoteLabel&) const = default;
};

/// Multiplies every F0 by speaker_median/ref_median (one global ratio).
F0Contour transpose_contour(const F0Contour& contour, double ref_median_hz,
                            double speaker_median_hz);

/// Semitone distance from C0: round-half-to-even(12*log2(f/440)) + 57.
int hz_to_semitone_index(double f_hz);

/// octave = floor(h/12), note = h mod 12. Throws for h < 0 (below C0).
NoteLabel semitone_to_note_octave(int h);

double note_to_hz(const NoteLabel& label);

/// MIDI note number with C0 = 12 (A4 = 69).
int note_to_midi(const NoteLabel& label);

/// Equal-frequency duration bins fitted on training durations. Bin
/// representatives are the per-bin training medians.
struct DurationQuantizer {
  std::vector<double> boundaries_s;       // strictly ascending, size n_classes-1
  std::vector<double> representatives_s;  // size n_classes

  int n_classes() const { return static_cast<int>(representatives_s.size()); }
};

/// Sorts the durations and splits them into n_classes bins of (near-)equal
/// population; ties spanning a boundary go to the lower bin, which can
/// collapse bins on heavily tied data (a warning is emitted).
DurationQuantizer fit_duration_quantizer(std::vector<double> durations_s, int n_classes);

/// Number of boundaries strictly below d; exact boundary values stay in the
/// lower bin and out-of-range values clamp to the first/last class.
int quantize_duration(const DurationQuantizer& q, double duration_s);
double dequantize_duration(const DurationQuantizer& q, int class_index);

void save_quantizer(const DurationQuantizer& q, const std::filesystem::path& path);
DurationQuantizer load_quantizer(const std::filesystem::path& path);

struct ScoreEntry {
  std::string phoneme;
  std::optional<NoteLabel> note;  // empty for silence
  int duration_class = -1;        // -1 for silence
  double target_duration_s = 0.0;
  double start_s = 0.0;

  bool is_silence() const { return !note.has_value(); }
};

/// Per-phoneme prosody targets plus the medians used for transposition.
struct Score {
  std::vector<ScoreEntry> entries;
  double ref_median_f0 = 0.0;
  double speaker_median_f0 = 0.0;

  std::vector<std::string> nonsilence_phonemes() const;
};

/// For each non-silence phoneme: mean F0 over the (processed) contour,
/// transposed by the median ratio, converted to a note label; duration
/// quantized and replaced by its bin representative. Silence entries keep
/// their raw duration and carry no note.
Score build_score(const Alignment& alignment, const F0Contour& contour, double ref_median_hz,
                  double speaker_median_hz, const DurationQuantizer& q);

/// Alternative transposition policy: the reference median is recomputed per
/// verse (each run of consecutive non-silence phonemes) from the raw
/// contour's voiced frames. The global policy is the default; this one tends
/// to produce octave discontinuities between verses.
Score build_score_per_verse(const Alignment& alignment, const F0Contour& contour,
                            const F0Contour& raw_contour, double global_ref_median_hz,
                            double speaker_median_hz, const DurationQuantizer& q);

/// CSV rows `start_s,end_s,phoneme,midi`; silence rows leave midi blank.
void export_midi_csv(const Score& score, const std::filesystem::path& path);

void save_score(const Score& score, const std::filesystem::path& path);
Score load_score(const std::filesystem::path& path);

}  // namespace s2s
