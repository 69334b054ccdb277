// Phoneme alignment container and parsers (TSV and Praat TextGrid subset).
#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace s2s {

struct PhonemeInterval {
  std::string label;
  double start_s = 0.0;
  double end_s = 0.0;
  bool is_silence = false;

  double duration_s() const { return end_s - start_s; }
};

/// Ordered, non-overlapping phoneme intervals over one utterance. Gaps in the
/// input are materialized as explicit silence intervals so the sequence tiles
/// [first start, last end] completely.
struct Alignment {
  std::vector<PhonemeInterval> intervals;
  double total_duration_s = 0.0;

  size_t size() const { return intervals.size(); }
  std::vector<std::string> nonsilence_labels() const;
};

struct AlignmentParseOptions {
  std::set<std::string> silence_labels = {"sil", "sp", ""};
  /// For TextGrids: tier to read. Empty picks the first interval tier.
  std::string tier_name;
};

/// Validates ordering/overlap, fills gaps >= 1 ms with explicit silence
/// intervals and snaps sub-millisecond gaps. Throws on overlap or end <= start.
Alignment make_alignment(std::vector<PhonemeInterval> intervals, double total_duration_s);

/// Reads `label<TAB>start_s<TAB>end_s` lines or a Praat TextGrid interval
/// tier. Format is sniffed from the file content. Errors carry line numbers.
Alignment parse_alignment(const std::filesystem::path& path,
                          const AlignmentParseOptions& options = {});

}  // namespace s2s
