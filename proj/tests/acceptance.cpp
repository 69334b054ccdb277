// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in code next to each check.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pipeline_fixture.hpp"
#include "s2s/metrics.hpp"
#include "s2s/mixdown.hpp"
#include "s2s/pipeline.hpp"
#include "s2s/retarget.hpp"
#include "s2s/score.hpp"
#include "s2s/tsm.hpp"
#include "test_signals.hpp"

using namespace s2s;
using namespace s2s::testing;

namespace {

int g_failures = 0;

void report(int number, const char* title, bool ok, const std::string& detail) {
  std::printf("%s  %d. %s (%s)\n", ok ? "PASS" : "FAIL", number, title, detail.c_str());
  if (!ok) ++g_failures;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 1. Note math exactness over h in [0, 120]; A4 -> (9,4) -> 440 Hz.
void criterion_note_math() {
  bool ok = true;
  std::string detail = "h in [0,120] exact";
  for (int h = 0; h <= 120; ++h) {
    const NoteLabel label = semitone_to_note_octave(h);
    if (hz_to_semitone_index(note_to_hz(label)) != h) {
      ok = false;
      detail = "round trip broke at h=" + std::to_string(h);
      break;
    }
  }
  const NoteLabel a4 = semitone_to_note_octave(hz_to_semitone_index(440.0));
  if (!(a4 == NoteLabel{9, 4}) || std::abs(note_to_hz(a4) - 440.0) > 1e-9) {
    ok = false;
    detail = "A4 anchor broken";
  }
  report(1, "note math round trip", ok, detail);
}

// 2. Median-ratio transposition: medians 220/110 drop every note by 12
//    semitones; equal medians leave the contour bit-identical.
void criterion_transposition() {
  F0Contour contour;
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> logf(std::log(140.0), std::log(450.0));
  std::vector<PhonemeInterval> intervals;
  for (int k = 0; k < 40; ++k) {
    const double f = std::exp(logf(rng));
    for (int i = 0; i < 10; ++i) contour.frames.push_back({f, true});
    intervals.push_back({"P" + std::to_string(k), k * 0.1, (k + 1) * 0.1, false});
  }
  const Alignment align = make_alignment(intervals, 4.0);
  std::vector<double> durations;
  for (int i = 1; i <= 40; ++i) durations.push_back(0.05 + i * 0.01);
  const DurationQuantizer q = fit_duration_quantizer(durations, 15);

  const Score base = build_score(align, contour, 220.0, 220.0, q);
  const Score dropped = build_score(align, contour, 220.0, 110.0, q);
  bool ok = true;
  std::string detail = "40 phonemes, all -12 semitones";
  for (size_t i = 0; i < base.entries.size(); ++i) {
    const int h0 = 12 * base.entries[i].note->octave + base.entries[i].note->note;
    const int h1 = 12 * dropped.entries[i].note->octave + dropped.entries[i].note->note;
    if (h1 != h0 - 12) {
      ok = false;
      detail = "phoneme " + std::to_string(i) + ": h " + std::to_string(h0) + " -> " +
               std::to_string(h1);
      break;
    }
  }
  const F0Contour same = transpose_contour(contour, 220.0, 220.0);
  for (size_t i = 0; i < contour.size(); ++i)
    if (same.frames[i].f0_hz != contour.frames[i].f0_hz) {
      ok = false;
      detail = "equal medians changed the contour";
      break;
    }
  report(2, "median-ratio transposition", ok, detail);
}

// 3. Equal-frequency quantizer vs brute-force oracle; monotone, idempotent.
void criterion_quantizer() {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> dur(0.01, 1.2);
  std::vector<double> durations;
  for (int i = 0; i < 10000; ++i) durations.push_back(dur(rng));
  std::vector<double> sorted = durations;
  std::sort(sorted.begin(), sorted.end());

  bool ok = true;
  std::string detail = "n=10000, classes 15 and 30";
  for (int k : {15, 30}) {
    const DurationQuantizer q = fit_duration_quantizer(durations, k);
    // oracle: deal sorted values into k bins, first n%k bins one larger
    std::vector<int> counts(k, 0);
    size_t idx = 0;
    const size_t base = sorted.size() / k, rem = sorted.size() % k;
    for (int b = 0; b < k && ok; ++b) {
      const size_t count = base + (static_cast<size_t>(b) < rem ? 1 : 0);
      for (size_t j = 0; j < count; ++j, ++idx) {
        const int cls = quantize_duration(q, sorted[idx]);
        if (cls != b) {
          ok = false;
          detail = "class mismatch vs oracle at sorted index " + std::to_string(idx);
          break;
        }
        ++counts[cls];
      }
    }
    const auto [mn, mx] = std::minmax_element(counts.begin(), counts.end());
    if (ok && *mx - *mn > 1) {
      ok = false;
      detail = "bin populations differ by " + std::to_string(*mx - *mn);
    }
    for (int c = 0; c < q.n_classes() && ok; ++c)
      if (quantize_duration(q, dequantize_duration(q, c)) != c) {
        ok = false;
        detail = "quantize(dequantize) not idempotent at class " + std::to_string(c);
      }
    double prev = -1.0;
    int prev_cls = 0;
    for (int i = 0; i < 500 && ok; ++i) {
      const double d = i * 0.0025;
      const int cls = quantize_duration(q, d);
      if (d > prev && cls < prev_cls) {
        ok = false;
        detail = "quantize not monotone";
      }
      prev = d;
      prev_cls = cls;
    }
  }
  report(3, "equal-frequency quantizer", ok, detail);
}

// 4. Pitch tracker: 20-tone sweep within 1%; no octave errors on sawtooths.
void criterion_pitch_tracker() {
  bool ok = true;
  std::string detail = "sweep max err ";
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double f = 80.0 + k * (500.0 - 80.0) / 19.0;
    const double est = measured_f0(make_sine(f, 0.6));
    worst = std::max(worst, std::abs(est - f) / f);
    if (std::abs(est - f) / f > 0.01) {
      ok = false;
      detail = "tone " + std::to_string(f) + " Hz off by " + std::to_string(est - f);
    }
  }
  if (ok) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "sweep max err %.3f%%", worst * 100.0);
    detail = buf;
  }
  for (double f : {100.0, 150.0, 220.0}) {
    const F0Contour c = extract_f0(make_sawtooth(f, 1.0));
    for (const auto& fr : c.frames)
      if (fr.voiced && std::abs(fr.f0_hz - f) / f > 0.2) {
        ok = false;
        detail = "octave error on " + std::to_string(f) + " Hz sawtooth: frame at " +
                 std::to_string(fr.f0_hz);
        break;
      }
  }
  report(4, "pitch tracker sweep and octave safety", ok, detail);
}

// 5. WSOLA ratios {0.5, 0.75, 1.0, 1.5, 2.0} on a 440 Hz sine.
void criterion_wsola() {
  const AudioBuffer x = make_sine(440.0, 1.0);
  const double hop_s = 0.0125;
  bool ok = true;
  std::string detail = "all ratios within 1 hop and 1% F0";
  for (double r : {0.5, 0.75, 1.0, 1.5, 2.0}) {
    const AudioBuffer y = wsola_stretch(x, TimeMap::uniform(1.0, r));
    if (std::abs(y.duration_s() - r) > hop_s) {
      ok = false;
      detail = "ratio " + std::to_string(r) + " length " + std::to_string(y.duration_s());
      break;
    }
    const double f = measured_f0(y);
    if (std::abs(f - 440.0) / 440.0 > 0.01) {
      ok = false;
      detail = "ratio " + std::to_string(r) + " F0 " + std::to_string(f);
      break;
    }
  }
  report(5, "WSOLA length and pitch preservation", ok, detail);
}

// 6. PSOLA over the augmentation grid of semitone shifts.
void criterion_psola() {
  const AudioBuffer x = make_sawtooth(220.0, 1.0);
  const EpochTrack track = detect_epochs(x, extract_f0(x));
  bool ok = true;
  double worst = 0.0;
  std::string detail;
  for (int st : {-6, -4, -2, 2, 4, 6}) {
    const AudioBuffer y = psola_shift(x, track, std::exp2(st / 12.0));
    if (y.size() != x.size()) {
      ok = false;
      detail = "length changed at " + std::to_string(st) + " st";
      break;
    }
    const double target = 220.0 * std::exp2(st / 12.0);
    const double err = std::abs(semitones_between(target, measured_f0(y)));
    worst = std::max(worst, err);
    if (err > 0.15) {
      ok = false;
      detail = std::to_string(st) + " st off by " + std::to_string(err) + " st";
      break;
    }
  }
  if (ok) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "worst F0 error %.4f st", worst);
    detail = buf;
  }
  report(6, "PSOLA semitone grid", ok, detail);
}

// 7. End-to-end synthetic pipeline against the objective error bounds.
void criterion_pipeline() {
  const auto dir = test_dir("acceptance_e2e");
  const auto cfg = write_pipeline_fixture(dir, true);
  bool ok = true;
  std::string detail;
  try {
    const PipelineArtifacts art = run_pipeline(load_project_config(cfg));
    const nlohmann::json eval = nlohmann::json::parse(slurp(art.eval_json));
    const double pitch = eval.at("pitch_error_mean_semitones").get<double>();
    const double dur = eval.at("duration_error_mean_ms").get<double>();
    char buf[96];
    std::snprintf(buf, sizeof(buf), "pitch %.3f st (bound 0.5), duration %.2f ms (bound 10)",
                  pitch, dur);
    detail = buf;
    ok = pitch <= 0.5 && dur <= 10.0 && pitch < 0.85 && dur < 27.0;
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(7, "end-to-end synthetic pipeline", ok, detail);
}

// 8. Mixdown safety and --no-instrumental bit-exactness.
void criterion_mixdown() {
  bool ok = true;
  std::string detail = "peak <= 1, vocal-only mix bit-exact";
  AudioBuffer a = make_silence(0.2);
  AudioBuffer b = make_silence(0.3);
  for (size_t i = 0; i < a.size(); ++i) a.samples[i] = (i % 2 == 0) ? 1.0 : -1.0;
  for (size_t i = 0; i < b.size(); ++i) b.samples[i] = 1.0;
  const AudioBuffer clipped = mix(a, b, 6.0, 6.0);
  for (double s : clipped.samples)
    if (std::abs(s) > 1.0) {
      ok = false;
      detail = "mix peak exceeded 1.0";
      break;
    }

  const AudioBuffer vocal = assemble({{make_sine(220.0, 0.5, kDefaultRateHz, 0.5), 0.1},
                                      {make_sawtooth(147.0, 0.4, kDefaultRateHz, 0.4), 0.7}},
                                     1.2);
  const AudioBuffer vocal_only = mix(vocal, AudioBuffer{}, 0.0, -1e9);
  if (vocal_only.samples != vocal.samples) {
    ok = false;
    detail = "no-instrumental mix is not bit-identical to the vocal";
  }
  report(8, "mixdown clipping guard and vocal-only path", ok, detail);
}

// 9. Determinism: the full pipeline twice, artifacts byte-identical.
void criterion_determinism() {
  const auto dir = test_dir("acceptance_determinism");
  const auto cfg_path = write_pipeline_fixture(dir, true);
  bool ok = true;
  std::string detail = "score/acapella/song/eval/csv byte-identical";
  try {
    ProjectConfig cfg = load_project_config(cfg_path);
    cfg.output_dir = dir / "run1";
    const PipelineArtifacts r1 = run_pipeline(cfg);
    cfg.output_dir = dir / "run2";
    const PipelineArtifacts r2 = run_pipeline(cfg);
    const std::vector<std::pair<std::filesystem::path, std::filesystem::path>> pairs = {
        {r1.score_json, r2.score_json},   {r1.quantizer_json, r2.quantizer_json},
        {r1.acapella_wav, r2.acapella_wav}, {r1.song_wav, r2.song_wav},
        {r1.eval_json, r2.eval_json},     {r1.contour_csv, r2.contour_csv},
        {r1.midi_csv, r2.midi_csv}};
    for (const auto& [p1, p2] : pairs)
      if (slurp(p1) != slurp(p2)) {
        ok = false;
        detail = "differs: " + p1.filename().string();
        break;
      }
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(9, "pipeline determinism", ok, detail);
}

}  // namespace

int main() {
  criterion_note_math();
  criterion_transposition();
  criterion_quantizer();
  criterion_pitch_tracker();
  criterion_wsola();
  criterion_psola();
  criterion_pipeline();
  criterion_mixdown();
  criterion_determinism();
  if (g_failures == 0)
    std::printf("acceptance: all 9 criteria passed\n");
  else
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return g_failures;
}
