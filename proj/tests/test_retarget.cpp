#include <cmath>
#include <random>

#include "doctest.h"
#include "s2s/retarget.hpp"
#include "test_signals.hpp"

using namespace s2s;
using namespace s2s::testing;

namespace {

Score manual_score(const std::vector<std::tuple<std::string, NoteLabel, double>>& entries) {
  Score s;
  s.ref_median_f0 = 220.0;
  s.speaker_median_f0 = 220.0;
  double t = 0.0;
  for (const auto& [phoneme, note, dur] : entries) {
    ScoreEntry e;
    e.phoneme = phoneme;
    e.note = note;
    e.duration_class = 0;
    e.target_duration_s = dur;
    e.start_s = t;
    t += dur;
    s.entries.push_back(std::move(e));
  }
  return s;
}

double window_median_f0(const AudioBuffer& b, double t0, double t1) {
  AudioBuffer cut;
  cut.sample_rate = b.sample_rate;
  cut.samples.assign(b.samples.begin() + static_cast<size_t>(t0 * b.sample_rate),
                     b.samples.begin() + static_cast<size_t>(t1 * b.sample_rate));
  return measured_f0(cut);
}

}  // namespace

TEST_CASE("synthesize fixpoint: a score matching the source reproduces it") {
  const AudioBuffer source = make_sawtooth(220.0, 1.0);
  BackendRequest request;
  request.source = source;
  request.source_alignment = make_alignment({{"AA", 0.0, 1.0, false}}, 1.0);
  request.score = manual_score({{"AA", NoteLabel{9, 3}, 1.0}});  // A3 = 220 Hz

  const AudioBuffer out = synthesize(request);
  CHECK(std::abs(out.duration_s() - 1.0) <= 0.0125);  // one WSOLA hop
  const double f = measured_f0(out);
  CHECK(std::abs(semitones_between(220.0, f)) < 0.5);
}

TEST_CASE("synthesize retunes and stretches a monotone vowel") {
  // 150 Hz spoken vowel, 0.5 s; the score demands A3 (220 Hz) for 1.0 s.
  const AudioBuffer source = make_sawtooth(150.0, 0.5);
  BackendRequest request;
  request.source = source;
  request.source_alignment = make_alignment({{"AA", 0.0, 0.5, false}}, 0.5);
  request.score = manual_score({{"AA", NoteLabel{9, 3}, 1.0}});

  const AudioBuffer out = synthesize(request);
  CHECK(std::abs(out.duration_s() - 1.0) <= 0.010);
  CHECK(std::abs(semitones_between(220.0, measured_f0(out))) <= 0.5);
}

TEST_CASE("synthesize: notes an octave apart give a 2.0 F0 ratio") {
  AudioBuffer source = make_sawtooth(150.0, 1.0);
  BackendRequest request;
  request.source = source;
  request.source_alignment =
      make_alignment({{"AA", 0.0, 0.5, false}, {"IY", 0.5, 1.0, false}}, 1.0);
  request.score =
      manual_score({{"AA", NoteLabel{9, 3}, 0.5}, {"IY", NoteLabel{9, 4}, 0.5}});

  const AudioBuffer out = synthesize(request);
  const double f_low = window_median_f0(out, 0.08, 0.42);
  const double f_high = window_median_f0(out, 0.58, 0.92);
  CHECK(f_high / f_low == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("synthesize pairs score silences when the structure matches") {
  AudioBuffer source = make_sawtooth(200.0, 1.0);
  // quiet middle: spoken pause
  for (size_t i = source.size() * 2 / 5; i < source.size() * 3 / 5; ++i)
    source.samples[i] = 0.0;
  BackendRequest request;
  request.source = source;
  request.source_alignment = make_alignment(
      {{"AA", 0.0, 0.4, false}, {"sp", 0.4, 0.6, true}, {"IY", 0.6, 1.0, false}}, 1.0);
  Score score = manual_score({{"AA", NoteLabel{9, 3}, 0.5}});
  {
    ScoreEntry sil;
    sil.phoneme = "sil";
    sil.target_duration_s = 0.4;  // silence stretched 0.2 -> 0.4
    sil.start_s = 0.5;
    score.entries.push_back(sil);
    ScoreEntry e;
    e.phoneme = "IY";
    e.note = NoteLabel{9, 3};
    e.duration_class = 0;
    e.target_duration_s = 0.5;
    e.start_s = 0.9;
    score.entries.push_back(e);
  }
  request.score = score;
  const AudioBuffer out = synthesize(request);
  CHECK(std::abs(out.duration_s() - 1.4) <= 0.0125);
}

TEST_CASE("synthesize rejects mismatched phoneme sequences") {
  BackendRequest request;
  request.source = make_sawtooth(150.0, 0.5);
  request.source_alignment = make_alignment({{"AA", 0.0, 0.5, false}}, 0.5);
  request.score = manual_score({{"IY", NoteLabel{9, 3}, 0.5}});
  CHECK_THROWS_WITH_AS(synthesize(request), doctest::Contains("mismatch"),
                       std::runtime_error);

  request.score = manual_score({{"AA", NoteLabel{9, 3}, 0.5}, {"AA", NoteLabel{9, 3}, 0.5}});
  CHECK_THROWS_AS(synthesize(request), std::runtime_error);
}

TEST_CASE("synthesize is deterministic") {
  BackendRequest request;
  request.source = make_sawtooth(180.0, 0.6);
  request.source_alignment =
      make_alignment({{"AA", 0.0, 0.3, false}, {"IY", 0.3, 0.6, false}}, 0.6);
  request.score =
      manual_score({{"AA", NoteLabel{7, 3}, 0.4}, {"IY", NoteLabel{0, 4}, 0.25}});
  const AudioBuffer a = synthesize(request);
  const AudioBuffer b = synthesize(request);
  REQUIRE(a.size() == b.size());
  CHECK(a.samples == b.samples);  // bit-identical
}

TEST_CASE("backend duration contract over a varied score") {
  BackendRequest request;
  request.source = make_sawtooth(140.0, 0.9);
  request.source_alignment = make_alignment(
      {{"AA", 0.0, 0.3, false}, {"EH", 0.3, 0.6, false}, {"OW", 0.6, 0.9, false}}, 0.9);
  request.score = manual_score(
      {{"AA", NoteLabel{9, 2}, 0.5}, {"EH", NoteLabel{2, 3}, 0.2}, {"OW", NoteLabel{9, 3}, 0.4}});
  const AudioBuffer out = synthesize(request);
  CHECK(std::abs(out.duration_s() - 1.1) <= 0.050);

  // per-phoneme F0 within one semitone of the score
  const double f0 = window_median_f0(out, 0.1, 0.45);
  const double f1 = window_median_f0(out, 0.55, 0.65);
  const double f2 = window_median_f0(out, 0.75, 1.05);
  CHECK(std::abs(semitones_between(note_to_hz({9, 2}), f0)) <= 1.0);
  CHECK(std::abs(semitones_between(note_to_hz({2, 3}), f1)) <= 1.0);
  CHECK(std::abs(semitones_between(note_to_hz({9, 3}), f2)) <= 1.0);
}

TEST_CASE("augment identity and parameter validation") {
  const AudioBuffer x = make_sawtooth(220.0, 0.8);
  const F0Contour c = extract_f0(x);
  const AudioBuffer same = augment(x, c, 0, 1.0);
  CHECK(same.samples == x.samples);

  CHECK_THROWS_AS(augment(x, c, 7, 1.0), std::runtime_error);
  CHECK_THROWS_AS(augment(x, c, -7, 1.0), std::runtime_error);
  CHECK_THROWS_AS(augment(x, c, 0, 0.5), std::runtime_error);
  CHECK_THROWS_AS(augment(x, c, 0, 1.5), std::runtime_error);
}

TEST_CASE("augment rate 0.7 lengthens by 1/0.7") {
  const AudioBuffer x = make_sawtooth(220.0, 1.0);
  const AudioBuffer y = augment(x, extract_f0(x), 0, 0.7);
  CHECK(std::abs(y.duration_s() - 1.0 / 0.7) <= 0.0125);
  CHECK(std::abs(measured_f0(y) - 220.0) <= 1.0);  // rate change leaves pitch alone
}

TEST_CASE("augment +2 semitones hits 246.94 Hz") {
  const AudioBuffer x = make_sawtooth(220.0, 1.0);
  const AudioBuffer y = augment(x, extract_f0(x), 2, 1.0);
  CHECK(std::abs(measured_f0(y) - 246.94) <= 0.3);
  CHECK(y.size() == x.size());
}

TEST_CASE("augment combines rate and pitch") {
  const AudioBuffer x = make_sawtooth(220.0, 1.0);
  const AudioBuffer y = augment(x, extract_f0(x), -4, 1.3);
  CHECK(std::abs(y.duration_s() - 1.0 / 1.3) <= 0.0125);
  CHECK(std::abs(semitones_between(220.0 * std::exp2(-4.0 / 12.0), measured_f0(y))) <= 0.15);
}

TEST_CASE("synthesize handles an unvoiced fricative between vowels") {
  // AA (voiced) | S (noise) | OW (voiced); S must stretch but keep ratio 1.
  std::mt19937 rng(31);
  std::normal_distribution<double> noise(0.0, 0.15);
  AudioBuffer source = make_sawtooth(140.0, 0.75);
  for (size_t i = static_cast<size_t>(0.3 * 24000); i < static_cast<size_t>(0.45 * 24000); ++i)
    source.samples[i] = noise(rng);
  BackendRequest request;
  request.source = source;
  request.source_alignment = make_alignment(
      {{"AA", 0.0, 0.3, false}, {"S", 0.3, 0.45, false}, {"OW", 0.45, 0.75, false}}, 0.75);
  request.score = manual_score(
      {{"AA", NoteLabel{9, 2}, 0.3}, {"S", NoteLabel{9, 2}, 0.2}, {"OW", NoteLabel{4, 3}, 0.3}});

  const AudioBuffer out = synthesize(request);
  CHECK(std::abs(out.duration_s() - 0.8) <= 0.050);
  CHECK(std::abs(semitones_between(note_to_hz({9, 2}), window_median_f0(out, 0.05, 0.25))) <= 1.0);
  CHECK(std::abs(semitones_between(note_to_hz({4, 3}), window_median_f0(out, 0.55, 0.75))) <= 1.0);
}

TEST_CASE("augmentation grid: 7 pitch values x 3 rates all meet the contracts") {
  const AudioBuffer x = make_sawtooth(220.0, 0.8);
  const F0Contour contour = extract_f0(x);
  for (int st : {-6, -4, -2, 0, 2, 4, 6}) {
    for (double rate : {0.7, 1.0, 1.3}) {
      const AudioBuffer y = augment(x, contour, st, rate);
      CHECK(std::abs(y.duration_s() - 0.8 / rate) <= 0.0125);
      const double target = 220.0 * std::exp2(st / 12.0);
      CHECK(std::abs(semitones_between(target, measured_f0(y))) <= 0.15);
    }
  }
}
