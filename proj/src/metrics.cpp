#include "s2s/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace s2s {

namespace {

void check_sequences(const Alignment& ref, const Alignment& syn) {
  const auto a = ref.nonsilence_labels();
  const auto b = syn.nonsilence_labels();
  if (a != b)
    throw std::runtime_error(
        "eval: reference and synthesized alignments disagree on the non-silence "
        "phoneme sequence (" +
        std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " phonemes)");
}

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

MeanStd mean_std(const std::vector<double>& v) {
  if (v.empty()) throw std::runtime_error("eval: no phonemes could be evaluated");
  MeanStd m;
  for (double x : v) m.mean += x;
  m.mean /= v.size();
  double var = 0.0;
  for (double x : v) var += (x - m.mean) * (x - m.mean);
  m.stddev = std::sqrt(var / v.size());
  return m;
}

}  // namespace

EvalReport evaluate(const F0Contour& ref_contour, const Alignment& ref_align,
                    const F0Contour& syn_contour, const Alignment& syn_align,
                    double ref_median_hz, double speaker_median_hz, PhonemeF0Stat stat) {
  check_sequences(ref_align, syn_align);
  if (!(ref_median_hz > 0) || !(speaker_median_hz > 0))
    throw std::runtime_error("eval: medians must be positive");

  const auto ref_f0 = phoneme_f0(ref_contour, ref_align, stat);
  const auto syn_f0 = phoneme_f0(syn_contour, syn_align, stat);
  const double transpose = speaker_median_hz / ref_median_hz;

  // Pair the k-th non-silence phoneme of each side.
  std::vector<size_t> ref_idx, syn_idx;
  for (size_t i = 0; i < ref_align.size(); ++i)
    if (!ref_align.intervals[i].is_silence) ref_idx.push_back(i);
  for (size_t i = 0; i < syn_align.size(); ++i)
    if (!syn_align.intervals[i].is_silence) syn_idx.push_back(i);

  EvalReport report;
  std::vector<double> pitch_errs, dur_errs;
  for (size_t k = 0; k < ref_idx.size(); ++k) {
    const auto& ri = ref_align.intervals[ref_idx[k]];
    const auto& si = syn_align.intervals[syn_idx[k]];
    const auto rf = ref_f0[ref_idx[k]];
    const auto sf = syn_f0[syn_idx[k]];
    if (!rf || !sf) continue;  // unvoiced on one side; not evaluable
    PhonemeErrorRow row;
    row.phoneme = ri.label;
    row.ref_f0_hz = *rf * transpose;
    row.syn_f0_hz = *sf;
    row.err_semitones = std::abs(12.0 * std::log2(row.syn_f0_hz / row.ref_f0_hz));
    row.ref_duration_s = ri.duration_s();
    row.syn_duration_s = si.duration_s();
    row.err_ms = std::abs(row.syn_duration_s - row.ref_duration_s) * 1000.0;
    pitch_errs.push_back(row.err_semitones);
    dur_errs.push_back(row.err_ms);
    report.rows.push_back(std::move(row));
  }

  const MeanStd p = mean_std(pitch_errs);
  const MeanStd d = mean_std(dur_errs);
  report.pitch_error_mean = p.mean;
  report.pitch_error_std = p.stddev;
  report.duration_error_mean = d.mean;
  report.duration_error_std = d.stddev;
  return report;
}

PitchErrorStats pitch_error(const F0Contour& ref_contour, const Alignment& ref_align,
                            const F0Contour& syn_contour, const Alignment& syn_align,
                            double ref_median_hz, double speaker_median_hz, PhonemeF0Stat stat) {
  const EvalReport r = evaluate(ref_contour, ref_align, syn_contour, syn_align, ref_median_hz,
                                speaker_median_hz, stat);
  return {r.pitch_error_mean, r.pitch_error_std};
}

DurationErrorStats duration_error(const Alignment& ref_align, const Alignment& syn_align) {
  check_sequences(ref_align, syn_align);
  std::vector<double> errs;
  size_t j = 0;
  for (size_t i = 0; i < ref_align.size(); ++i) {
    if (ref_align.intervals[i].is_silence) continue;
    while (j < syn_align.size() && syn_align.intervals[j].is_silence) ++j;
    errs.push_back(std::abs(syn_align.intervals[j].duration_s() -
                            ref_align.intervals[i].duration_s()) *
                   1000.0);
    ++j;
  }
  const MeanStd m = mean_std(errs);
  return {m.mean, m.stddev};
}

void save_eval_report(const EvalReport& report, const std::filesystem::path& path) {
  nlohmann::json j;
  j["pitch_error_mean_semitones"] = report.pitch_error_mean;
  j["pitch_error_std_semitones"] = report.pitch_error_std;
  j["duration_error_mean_ms"] = report.duration_error_mean;
  j["duration_error_std_ms"] = report.duration_error_std;
  j["spread"] = "population std over evaluated non-silence phonemes";
  j["phonemes"] = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json jr;
    jr["phoneme"] = r.phoneme;
    jr["ref_f0_hz"] = r.ref_f0_hz;
    jr["syn_f0_hz"] = r.syn_f0_hz;
    jr["err_semitones"] = r.err_semitones;
    jr["ref_duration_s"] = r.ref_duration_s;
    jr["syn_duration_s"] = r.syn_duration_s;
    jr["err_ms"] = r.err_ms;
    j["phonemes"].push_back(std::move(jr));
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write eval report: " + path.string());
  os << j.dump(2) << "\n";
}

void export_plot_data(const F0Contour& ref_contour, const F0Contour& syn_contour,
                      const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write plot CSV: " + path.string());
  os << "time_s,ref_f0,syn_f0\n";

  auto cell = [](const F0Contour& c, double time_s) -> std::string {
    const long long i = std::llround(time_s / c.hop_s);
    if (i < 0 || i >= static_cast<long long>(c.size())) return "";
    if (std::abs(c.time_of(i) - time_s) > c.hop_s / 2.0 + 1e-9) return "";
    if (!c.frames[i].voiced) return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", c.frames[i].f0_hz);
    return buf;
  };

  // Row times: union of both frame grids.
  std::vector<double> times;
  for (size_t i = 0; i < ref_contour.size(); ++i) times.push_back(ref_contour.time_of(i));
  for (size_t i = 0; i < syn_contour.size(); ++i) times.push_back(syn_contour.time_of(i));
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-9; }),
              times.end());

  char buf[96];
  for (double t : times) {
    std::snprintf(buf, sizeof(buf), "%.6f,", t);
    os << buf << cell(ref_contour, t) << "," << cell(syn_contour, t) << "\n";
  }
}

}  // namespace s2s
