// Synthesis backend: renders a spoken utterance into the notes/durations of a
// Score (stretch, then pitch-shift onto the note grid), plus the pitch/rate
// augmentation transforms.
#pragma once

#include <memory>

#include "s2s/alignment.hpp"
#include "s2s/audio.hpp"
#include "s2s/pitch.hpp"
#include "s2s/score.hpp"
#include "s2s/tsm.hpp"

namespace s2s {

struct BackendRequest {
  AudioBuffer source;
  Alignment source_alignment;
  Score score;
};

/// Contract every synthesis backend must satisfy: output duration equals the
/// sum of the score target durations (+-50 ms) and per-phoneme F0 lands
/// within one semitone of the score notes. Backends are stateless and
/// deterministic.
class SynthesisBackend {
 public:
  virtual ~SynthesisBackend() = default;
  virtual AudioBuffer synthesize(const BackendRequest& request) const = 0;
};

/// DSP implementation: WSOLA duration matching per phoneme, then TD-PSOLA
/// onto a flat per-phoneme note frequency with 20 ms ratio cross-fades at
/// boundaries. Unvoiced phonemes are stretched but never pitch-shifted.
class DspBackend final : public SynthesisBackend {
 public:
  explicit DspBackend(PitchConfig pitch_config = {}, WsolaParams wsola_params = {});
  AudioBuffer synthesize(const BackendRequest& request) const override;

 private:
  PitchConfig pitch_;
  WsolaParams wsola_;
};

/// Convenience wrapper over DspBackend with default parameters.
AudioBuffer synthesize(const BackendRequest& request);

/// Training-data augmentation: duration multiplied by 1/rate (WSOLA), then F0
/// multiplied by 2^(semitones/12) (PSOLA, voiced regions only).
/// semitones in [-6, 6], rate in [0.7, 1.3].
AudioBuffer augment(const AudioBuffer& buffer, const F0Contour& contour, int semitones,
                    double rate);

}  // namespace s2s
