// Song-timeline assembly of synthesized utterances and vocal/instrumental
// mixing with normalize-on-clip.
#pragma once

#include <vector>

#include "s2s/audio.hpp"

namespace s2s {

struct TimelinePlacement {
  AudioBuffer utterance;
  double onset_s = 0.0;
};

/// Places each utterance at its onset on a silent timeline of the given
/// length; overlaps are summed. Material running more than 10 ms past the end
/// is clipped with a warning. Deterministic under permutation of placements.
AudioBuffer assemble(const std::vector<TimelinePlacement>& placements, double total_s,
                     int sample_rate = kDefaultRateHz);

/// out = g_v * vocal + g_i * instrumental (gains in dB); if the peak exceeds
/// 1.0 the whole mix is rescaled to peak 1.0 and a warning is emitted.
/// The shorter input is zero-padded.
AudioBuffer mix(const AudioBuffer& vocal, const AudioBuffer& instrumental, double vocal_gain_db,
                double instrumental_gain_db);

}  // namespace s2s
