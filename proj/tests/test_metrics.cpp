#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "s2s/metrics.hpp"
#include "test_signals.hpp"

using namespace s2s;
using namespace s2s::testing;

namespace {

F0Contour flat(double f0, size_t n) {
  F0Contour c;
  c.frames.assign(n, {f0, true});
  return c;
}

F0Contour steps(const std::vector<double>& plateau, size_t frames_each) {
  F0Contour c;
  for (double f : plateau)
    for (size_t i = 0; i < frames_each; ++i) c.frames.push_back({f, true});
  return c;
}

Alignment three_phonemes(double shift = 0.0, double stretch_last = 0.0) {
  return make_alignment({{"AA", shift + 0.0, shift + 0.2, false},
                         {"EH", shift + 0.2, shift + 0.4, false},
                         {"OW", shift + 0.4, shift + 0.6 + stretch_last, false}},
                        shift + 0.6 + stretch_last);
}

}  // namespace

TEST_CASE("pitch_error is zero for a transposed copy") {
  const F0Contour ref = steps({200.0, 250.0, 300.0}, 20);
  const F0Contour syn = steps({100.0, 125.0, 150.0}, 20);  // exactly ref/2
  const auto stats = pitch_error(ref, three_phonemes(), syn, three_phonemes(), 220.0, 110.0);
  CHECK(stats.mean_semitones == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(stats.std_semitones == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("uniform +1 semitone offset gives mean 1.0, std 0.0") {
  const F0Contour ref = steps({200.0, 250.0, 300.0}, 20);
  F0Contour syn = ref;
  for (auto& f : syn.frames) f.f0_hz *= std::exp2(1.0 / 12.0);
  const auto stats = pitch_error(ref, three_phonemes(), syn, three_phonemes(), 150.0, 150.0);
  CHECK(stats.mean_semitones == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(stats.std_semitones == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("pitch_error is symmetric when the medians are equal") {
  const F0Contour a = steps({220.0, 180.0, 260.0}, 20);
  const F0Contour b = steps({230.0, 174.0, 255.0}, 20);
  const auto ab = pitch_error(a, three_phonemes(), b, three_phonemes(), 200.0, 200.0);
  const auto ba = pitch_error(b, three_phonemes(), a, three_phonemes(), 200.0, 200.0);
  CHECK(ab.mean_semitones == doctest::Approx(ba.mean_semitones));
  CHECK(ab.std_semitones == doctest::Approx(ba.std_semitones));
}

TEST_CASE("pitch_error sees only F0, not gain") {
  // Same waveform at different gains -> same contours -> zero change of error.
  const AudioBuffer loud = make_sawtooth(180.0, 0.8, kDefaultRateHz, 0.9);
  AudioBuffer quiet = loud;
  for (auto& s : quiet.samples) s *= 0.2;
  const Alignment a = make_alignment({{"AA", 0.0, 0.8, false}}, 0.8);
  const auto loud_stats =
      pitch_error(extract_f0(loud), a, extract_f0(loud), a, 180.0, 180.0);
  const auto quiet_stats =
      pitch_error(extract_f0(loud), a, extract_f0(quiet), a, 180.0, 180.0);
  CHECK(std::abs(quiet_stats.mean_semitones - loud_stats.mean_semitones) < 0.01);
}

TEST_CASE("duration_error basics and shift invariance") {
  const auto zero = duration_error(three_phonemes(), three_phonemes());
  CHECK(zero.mean_ms == doctest::Approx(0.0));
  CHECK(zero.std_ms == doctest::Approx(0.0));

  // every phoneme longer by 10 ms
  const Alignment longer = make_alignment({{"AA", 0.0, 0.21, false},
                                           {"EH", 0.21, 0.42, false},
                                           {"OW", 0.42, 0.63, false}},
                                          0.63);
  const auto ten = duration_error(three_phonemes(), longer);
  CHECK(ten.mean_ms == doctest::Approx(10.0));
  CHECK(ten.std_ms == doctest::Approx(0.0).epsilon(1e-6));

  // uniform time shift of both alignments changes nothing
  const auto shifted = duration_error(three_phonemes(1.5), three_phonemes(1.5));
  CHECK(shifted.mean_ms == doctest::Approx(zero.mean_ms));

  const auto mixed = duration_error(three_phonemes(), three_phonemes(0.0, 0.03));
  CHECK(mixed.mean_ms == doctest::Approx(10.0));
  CHECK(mixed.std_ms > 0.0);
}

TEST_CASE("sequence mismatch is rejected") {
  const Alignment other =
      make_alignment({{"AA", 0.0, 0.2, false}, {"ZZ", 0.2, 0.4, false}}, 0.4);
  CHECK_THROWS_WITH_AS(duration_error(three_phonemes(), other), doctest::Contains("disagree"),
                       std::runtime_error);
  const F0Contour c = flat(200.0, 60);
  CHECK_THROWS_AS(pitch_error(c, three_phonemes(), c, other, 200.0, 200.0),
                  std::runtime_error);
}

TEST_CASE("evaluate report rows cover the evaluated phonemes") {
  const F0Contour ref = steps({200.0, 250.0, 300.0}, 20);
  const F0Contour syn = steps({201.0, 248.0, 305.0}, 20);
  const EvalReport r =
      evaluate(ref, three_phonemes(), syn, three_phonemes(), 200.0, 200.0);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].phoneme == "AA");
  CHECK(r.rows[2].err_ms == doctest::Approx(0.0));
  CHECK(r.pitch_error_mean > 0.0);

  const auto path = test_dir("metrics") / "eval.json";
  save_eval_report(r, path);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str().find("pitch_error_mean_semitones") != std::string::npos);
  CHECK(ss.str().find("population std") != std::string::npos);
}

TEST_CASE("export_plot_data: equal contours give equal columns") {
  const F0Contour c = steps({220.0, 260.0}, 3);
  const auto path = test_dir("metrics") / "plot_equal.csv";
  export_plot_data(c, c, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "time_s,ref_f0,syn_f0");
  int rows = 0;
  while (std::getline(in, line)) {
    const auto c1 = line.find(','), c2 = line.rfind(',');
    CHECK(line.substr(c1 + 1, c2 - c1 - 1) == line.substr(c2 + 1));
    ++rows;
  }
  CHECK(rows == 6);
}

TEST_CASE("export_plot_data: octave-up synthesized column doubles") {
  const F0Contour ref = flat(220.0, 4);
  F0Contour syn = ref;
  for (auto& f : syn.frames) f.f0_hz *= 2.0;
  const auto path = test_dir("metrics") / "plot_octave.csv";
  export_plot_data(ref, syn, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    double t, r, s;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &r, &s) == 3);
    CHECK(s == doctest::Approx(2.0 * r));
  }
}

TEST_CASE("export_plot_data golden fixture") {
  F0Contour ref = flat(220.0, 3);
  ref.frames[1].voiced = false;  // unvoiced frames leave a blank cell
  ref.frames[1].f0_hz = 0.0;
  const F0Contour syn = flat(440.0, 2);
  const auto path = test_dir("metrics") / "plot_golden.csv";
  export_plot_data(ref, syn, path);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() ==
        "time_s,ref_f0,syn_f0\n"
        "0.000000,220.000000,440.000000\n"
        "0.010000,,440.000000\n"
        "0.020000,220.000000,\n");
}
