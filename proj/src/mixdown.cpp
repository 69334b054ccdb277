#include "s2s/mixdown.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace s2s {

AudioBuffer assemble(const std::vector<TimelinePlacement>& placements, double total_s,
                     int sample_rate) {
  if (!(total_s >= 0)) throw std::runtime_error("assemble: negative total length");
  AudioBuffer out;
  out.sample_rate = sample_rate;
  out.samples.assign(static_cast<size_t>(std::llround(total_s * sample_rate)), 0.0);

  // Canonical summation order makes the result invariant under permutation
  // of the placements (floating-point addition is not associative).
  std::vector<size_t> order(placements.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const auto& pa = placements[a];
    const auto& pb = placements[b];
    if (pa.onset_s != pb.onset_s) return pa.onset_s < pb.onset_s;
    if (pa.utterance.size() != pb.utterance.size()) return pa.utterance.size() < pb.utterance.size();
    return std::lexicographical_compare(pa.utterance.samples.begin(), pa.utterance.samples.end(),
                                        pb.utterance.samples.begin(), pb.utterance.samples.end());
  });

  for (size_t idx : order) {
    const auto& p = placements[idx];
    if (p.onset_s < 0) throw std::runtime_error("assemble: negative onset");
    if (p.utterance.sample_rate != sample_rate)
      throw std::runtime_error("assemble: utterance sample rate " +
                               std::to_string(p.utterance.sample_rate) + " != timeline rate " +
                               std::to_string(sample_rate));
    const long long start = std::llround(p.onset_s * sample_rate);
    const double overrun_s = p.onset_s + p.utterance.duration_s() - total_s;
    if (overrun_s > 0.010)
      std::fprintf(stderr, "warning: utterance at %.3fs overruns the timeline by %.3fs, clipped\n",
                   p.onset_s, overrun_s);
    for (size_t j = 0; j < p.utterance.size(); ++j) {
      const long long o = start + static_cast<long long>(j);
      if (o < 0 || o >= static_cast<long long>(out.size())) continue;
      out.samples[o] += p.utterance.samples[j];
    }
  }
  return out;
}

AudioBuffer mix(const AudioBuffer& vocal, const AudioBuffer& instrumental, double vocal_gain_db,
                double instrumental_gain_db) {
  if (!vocal.empty() && !instrumental.empty() && vocal.sample_rate != instrumental.sample_rate)
    throw std::runtime_error("mix: sample rate mismatch (" + std::to_string(vocal.sample_rate) +
                             " vs " + std::to_string(instrumental.sample_rate) + ")");
  const double gv = std::pow(10.0, vocal_gain_db / 20.0);
  const double gi = std::pow(10.0, instrumental_gain_db / 20.0);

  AudioBuffer out;
  out.sample_rate = !vocal.empty() ? vocal.sample_rate : instrumental.sample_rate;
  out.samples.assign(std::max(vocal.size(), instrumental.size()), 0.0);
  for (size_t i = 0; i < out.size(); ++i)
    out.samples[i] = gv * vocal.at_or_zero(i) + gi * instrumental.at_or_zero(i);

  double peak = 0.0;
  for (double s : out.samples) peak = std::max(peak, std::abs(s));
  if (peak > 1.0) {
    for (auto& s : out.samples) s /= peak;
    std::fprintf(stderr, "warning: mix peak %.3f exceeded full scale, normalized to 1.0\n", peak);
  }
  return out;
}

}  // namespace s2s
