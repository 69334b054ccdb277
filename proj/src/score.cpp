#include "s2s/score.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <stdexcept>

#include "json.hpp"

namespace s2s {

namespace {

using nlohmann::json;

int round_half_even(double x) {
  const double f = std::floor(x);
  const double frac = x - f;
  if (frac > 0.5) return static_cast<int>(f) + 1;
  if (frac < 0.5) return static_cast<int>(f);
  const long long fi = static_cast<long long>(f);
  return static_cast<int>(fi % 2 == 0 ? fi : fi + 1);
}

double median_sorted(const std::vector<double>& v, size_t lo, size_t hi) {
  const size_t n = hi - lo;
  return n % 2 == 1 ? v[lo + n / 2] : 0.5 * (v[lo + n / 2 - 1] + v[lo + n / 2]);
}

json read_json_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(std::string("cannot open ") + what + ": " + path.string());
  json j;
  in >> j;
  return j;
}

void write_json_file(const json& j, const std::filesystem::path& path, const char* what) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error(std::string("cannot write ") + what + ": " + path.string());
  os << j.dump(2) << "\n";
}

}  // namespace

F0Contour transpose_contour(const F0Contour& contour, double ref_median_hz,
                            double speaker_median_hz) {
  if (!(ref_median_hz > 0) || !(speaker_median_hz > 0))
    throw std::runtime_error("transpose_contour: medians must be positive");
  const double ratio = speaker_median_hz / ref_median_hz;
  F0Contour out = contour;
  for (auto& f : out.frames)
    if (f.voiced) f.f0_hz *= ratio;
  return out;
}

int hz_to_semitone_index(double f_hz) {
  if (!(f_hz > 0)) throw std::runtime_error("hz_to_semitone_index: frequency must be positive");
  return round_half_even(12.0 * std::log2(f_hz / 440.0)) + 57;
}

NoteLabel semitone_to_note_octave(int h) {
  if (h < 0)
    throw std::runtime_error("semitone index " + std::to_string(h) +
                             " is below C0; re-transpose the contour upward");
  return NoteLabel{h % 12, h / 12};
}

double note_to_hz(const NoteLabel& label) {
  if (label.note < 0 || label.note > 11 || label.octave < 0)
    throw std::runtime_error("note_to_hz: invalid note label");
  return 440.0 * std::exp2((12.0 * label.octave + label.note - 57.0) / 12.0);
}

int note_to_midi(const NoteLabel& label) { return 12 * label.octave + label.note + 12; }

DurationQuantizer fit_duration_quantizer(std::vector<double> durations_s, int n_classes) {
  if (n_classes < 2) throw std::runtime_error("fit_duration_quantizer: need at least 2 classes");
  if (static_cast<int>(durations_s.size()) < n_classes)
    throw std::runtime_error("fit_duration_quantizer: fewer samples (" +
                             std::to_string(durations_s.size()) + ") than classes (" +
                             std::to_string(n_classes) + ")");
  std::sort(durations_s.begin(), durations_s.end());

  const size_t n = durations_s.size();
  const size_t base = n / n_classes;
  const size_t rem = n % n_classes;

  // Nominal equal-population cuts; the first `rem` bins take one extra value.
  // A run of ties straddling a cut is pulled whole into the lower bin.
  std::vector<size_t> cuts;  // index of the first value of each following bin
  size_t cursor = 0;
  for (int b = 0; b < n_classes - 1; ++b) {
    cursor += base + (static_cast<size_t>(b) < rem ? 1 : 0);
    size_t cut = std::max(cursor, cuts.empty() ? size_t{0} : cuts.back());
    while (cut > 0 && cut < n && durations_s[cut] == durations_s[cut - 1]) ++cut;
    cut = std::min(cut, n);
    cuts.push_back(cut);
  }

  DurationQuantizer q;
  size_t lo = 0;
  for (size_t b = 0; b <= cuts.size(); ++b) {
    const size_t hi = b < cuts.size() ? cuts[b] : n;
    if (hi <= lo) continue;  // bin emptied by the tie rule
    q.representatives_s.push_back(median_sorted(durations_s, lo, hi));
    if (hi < n) q.boundaries_s.push_back(durations_s[hi - 1]);
    lo = hi;
  }
  // Collapsed trailing bins can leave a dangling boundary.
  while (q.boundaries_s.size() + 1 > q.representatives_s.size()) q.boundaries_s.pop_back();

  if (q.n_classes() < n_classes)
    std::fprintf(stderr,
                 "warning: duration quantizer collapsed to %d effective classes "
                 "(ties in the training durations)\n",
                 q.n_classes());
  return q;
}

int quantize_duration(const DurationQuantizer& q, double duration_s) {
  if (q.representatives_s.empty()) throw std::runtime_error("quantize_duration: unfitted quantizer");
  const auto it = std::lower_bound(q.boundaries_s.begin(), q.boundaries_s.end(), duration_s);
  return static_cast<int>(it - q.boundaries_s.begin());
}

double dequantize_duration(const DurationQuantizer& q, int class_index) {
  if (class_index < 0 || class_index >= q.n_classes())
    throw std::runtime_error("dequantize_duration: class index out of range");
  return q.representatives_s[class_index];
}

void save_quantizer(const DurationQuantizer& q, const std::filesystem::path& path) {
  json j;
  j["n_classes"] = q.n_classes();
  j["boundaries_s"] = q.boundaries_s;
  j["representatives_s"] = q.representatives_s;
  write_json_file(j, path, "quantizer JSON");
}

DurationQuantizer load_quantizer(const std::filesystem::path& path) {
  const json j = read_json_file(path, "quantizer JSON");
  DurationQuantizer q;
  q.boundaries_s = j.at("boundaries_s").get<std::vector<double>>();
  q.representatives_s = j.at("representatives_s").get<std::vector<double>>();
  if (q.representatives_s.empty() ||
      q.boundaries_s.size() + 1 != q.representatives_s.size() ||
      !std::is_sorted(q.boundaries_s.begin(), q.boundaries_s.end()))
    throw std::runtime_error("quantizer JSON is inconsistent: " + path.string());
  return q;
}

std::vector<std::string> Score::nonsilence_phonemes() const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (!e.is_silence()) out.push_back(e.phoneme);
  return out;
}

namespace {

Score build_score_impl(const Alignment& alignment, const F0Contour& contour,
                       std::span<const double> ref_median_per_interval,
                       double global_ref_median_hz, double speaker_median_hz,
                       const DurationQuantizer& q) {
  const auto means = phoneme_f0(contour, alignment);

  Score score;
  score.ref_median_f0 = global_ref_median_hz;
  score.speaker_median_f0 = speaker_median_hz;
  score.entries.reserve(alignment.size());
  for (size_t k = 0; k < alignment.size(); ++k) {
    const auto& iv = alignment.intervals[k];
    ScoreEntry e;
    e.phoneme = iv.label;
    e.start_s = iv.start_s;
    if (iv.is_silence) {
      e.target_duration_s = iv.duration_s();
    } else {
      if (!means[k])
        throw std::runtime_error("build_score: phoneme '" + iv.label + "' at " +
                                 std::to_string(iv.start_s) +
                                 "s covers no F0 frame (interval shorter than one hop?)");
      const int h =
          hz_to_semitone_index(*means[k] * speaker_median_hz / ref_median_per_interval[k]);
      e.note = semitone_to_note_octave(h);
      e.duration_class = quantize_duration(q, iv.duration_s());
      e.target_duration_s = dequantize_duration(q, e.duration_class);
    }
    score.entries.push_back(std::move(e));
  }
  return score;
}

}  // namespace

Score build_score(const Alignment& alignment, const F0Contour& contour, double ref_median_hz,
                  double speaker_median_hz, const DurationQuantizer& q) {
  if (alignment.intervals.empty()) throw std::runtime_error("build_score: empty alignment");
  if (!(ref_median_hz > 0) || !(speaker_median_hz > 0))
    throw std::runtime_error("build_score: medians must be positive");
  const std::vector<double> medians(alignment.size(), ref_median_hz);
  return build_score_impl(alignment, contour, medians, ref_median_hz, speaker_median_hz, q);
}

Score build_score_per_verse(const Alignment& alignment, const F0Contour& contour,
                            const F0Contour& raw_contour, double global_ref_median_hz,
                            double speaker_median_hz, const DurationQuantizer& q) {
  if (alignment.intervals.empty()) throw std::runtime_error("build_score: empty alignment");
  if (!(global_ref_median_hz > 0) || !(speaker_median_hz > 0))
    throw std::runtime_error("build_score: medians must be positive");

  std::vector<double> medians(alignment.size(), global_ref_median_hz);
  size_t k = 0;
  while (k < alignment.size()) {
    if (alignment.intervals[k].is_silence) {
      ++k;
      continue;
    }
    size_t end = k;
    while (end < alignment.size() && !alignment.intervals[end].is_silence) ++end;
    const double t0 = alignment.intervals[k].start_s;
    const double t1 = alignment.intervals[end - 1].end_s;
    std::vector<double> voiced;
    for (size_t i = 0; i < raw_contour.size(); ++i) {
      const double t = raw_contour.time_of(i);
      if (t >= t0 && t < t1 && raw_contour.frames[i].voiced)
        voiced.push_back(raw_contour.frames[i].f0_hz);
    }
    if (!voiced.empty()) {
      std::sort(voiced.begin(), voiced.end());
      const size_t n = voiced.size();
      const double med = n % 2 == 1 ? voiced[n / 2] : 0.5 * (voiced[n / 2 - 1] + voiced[n / 2]);
      for (size_t i = k; i < end; ++i) medians[i] = med;
    }
    k = end;
  }
  return build_score_impl(alignment, contour, medians, global_ref_median_hz, speaker_median_hz,
                          q);
}

void export_midi_csv(const Score& score, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write MIDI CSV: " + path.string());
  os << "start_s,end_s,phoneme,midi\n";
  char line[160];
  for (const auto& e : score.entries) {
    if (e.is_silence())
      std::snprintf(line, sizeof(line), "%.6f,%.6f,%s,\n", e.start_s,
                    e.start_s + e.target_duration_s, e.phoneme.c_str());
    else
      std::snprintf(line, sizeof(line), "%.6f,%.6f,%s,%d\n", e.start_s,
                    e.start_s + e.target_duration_s, e.phoneme.c_str(), note_to_midi(*e.note));
    os << line;
  }
}

void save_score(const Score& score, const std::filesystem::path& path) {
  json j;
  j["ref_median_f0"] = score.ref_median_f0;
  j["speaker_median_f0"] = score.speaker_median_f0;
  j["entries"] = json::array();
  for (const auto& e : score.entries) {
    json je;
    je["phoneme"] = e.phoneme;
    je["start_s"] = e.start_s;
    je["duration_s"] = e.target_duration_s;
    if (e.is_silence()) {
      je["note"] = nullptr;
      je["octave"] = nullptr;
      je["duration_class"] = nullptr;
    } else {
      je["note"] = e.note->note;
      je["octave"] = e.note->octave;
      je["duration_class"] = e.duration_class;
    }
    j["entries"].push_back(std::move(je));
  }
  write_json_file(j, path, "score JSON");
}

Score load_score(const std::filesystem::path& path) {
  const json j = read_json_file(path, "score JSON");
  Score score;
  score.ref_median_f0 = j.at("ref_median_f0").get<double>();
  score.speaker_median_f0 = j.at("speaker_median_f0").get<double>();
  for (const auto& je : j.at("entries")) {
    ScoreEntry e;
    e.phoneme = je.at("phoneme").get<std::string>();
    e.start_s = je.at("start_s").get<double>();
    e.target_duration_s = je.at("duration_s").get<double>();
    if (!je.at("note").is_null()) {
      e.note = NoteLabel{je.at("note").get<int>(), je.at("octave").get<int>()};
      e.duration_class = je.at("duration_class").get<int>();
      if (e.note->note < 0 || e.note->note > 11 || e.note->octave < 0)
        throw std::runtime_error("score JSON has an invalid note label: " + path.string());
    }
    score.entries.push_back(std::move(e));
  }
  return score;
}

}  // namespace s2s
