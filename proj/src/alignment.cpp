#include "s2s/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace s2s {

namespace {

constexpr double kGapSnap = 1e-3;  // gaps below this are float noise, snapped shut

std::string strip(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double* out) {
  try {
    size_t idx = 0;
    *out = std::stod(s, &idx);
    return idx == s.size();
  } catch (...) {
    return false;
  }
}

Alignment parse_tsv(std::istream& in, const AlignmentParseOptions& options,
                    const std::string& name) {
  std::vector<PhonemeInterval> intervals;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (strip(line).empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() != 3)
      throw std::runtime_error(name + ":" + std::to_string(line_no) +
                               ": expected `label<TAB>start<TAB>end`, got " +
                               std::to_string(fields.size()) + " fields");
    double start, end;
    if (!parse_double(strip(fields[1]), &start) || !parse_double(strip(fields[2]), &end))
      throw std::runtime_error(name + ":" + std::to_string(line_no) +
                               ": cannot parse start/end times");
    if (end <= start)
      throw std::runtime_error(name + ":" + std::to_string(line_no) +
                               ": end <= start (" + fields[2] + " <= " + fields[1] + ")");
    PhonemeInterval iv;
    iv.label = strip(fields[0]);
    iv.start_s = start;
    iv.end_s = end;
    iv.is_silence = options.silence_labels.count(iv.label) > 0;
    intervals.push_back(std::move(iv));
  }
  if (intervals.empty()) throw std::runtime_error(name + ": no intervals");
  double total = 0.0;
  for (const auto& iv : intervals) total = std::max(total, iv.end_s);
  return make_alignment(std::move(intervals), total);
}

// Minimal long-format TextGrid reader: enough for Praat interval tiers.
struct TextGridScanner {
  std::vector<std::string> lines;
  size_t pos = 0;
  std::string name;

  bool next_line(std::string* out) {
    while (pos < lines.size()) {
      std::string s = strip(lines[pos++]);
      if (!s.empty()) {
        *out = s;
        return true;
      }
    }
    return false;
  }
};

// Extracts the value after `key =` on a line like `xmin = 1.25`.
bool key_value(const std::string& line, const std::string& key, std::string* value) {
  size_t k = line.find(key);
  if (k == std::string::npos) return false;
  size_t eq = line.find('=', k + key.size());
  if (eq == std::string::npos) return false;
  *value = strip(line.substr(eq + 1));
  return true;
}

std::string unquote(const std::string& s) {
  std::string t = strip(s);
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"') {
    t = t.substr(1, t.size() - 2);
    // Praat escapes a quote as ""
    std::string out;
    for (size_t i = 0; i < t.size(); ++i) {
      out.push_back(t[i]);
      if (t[i] == '"' && i + 1 < t.size() && t[i + 1] == '"') ++i;
    }
    return out;
  }
  return t;
}

Alignment parse_textgrid(const std::string& content, const AlignmentParseOptions& options,
                         const std::string& name) {
  TextGridScanner sc;
  sc.name = name;
  std::stringstream ss(content);
  std::string line;
  while (std::getline(ss, line)) sc.lines.push_back(line);

  double grid_xmax = 0.0;
  std::vector<PhonemeInterval> intervals;
  bool in_wanted_tier = false;
  bool seen_tier = false;
  std::string tier_class, tier_name;
  PhonemeInterval current;
  int field_state = 0;  // bitmask: 1=xmin 2=xmax 4=text

  std::string value;
  for (size_t i = 0; i < sc.lines.size(); ++i) {
    const std::string l = strip(sc.lines[i]);
    if (l.empty()) continue;
    if (key_value(l, "class", &value)) {
      tier_class = unquote(value);
      in_wanted_tier = false;
      continue;
    }
    if (key_value(l, "name", &value)) {
      tier_name = unquote(value);
      if (tier_class == "IntervalTier" &&
          (options.tier_name.empty() ? !seen_tier : tier_name == options.tier_name)) {
        in_wanted_tier = true;
        seen_tier = true;
      }
      continue;
    }
    if (!in_wanted_tier) {
      if (grid_xmax == 0.0 && key_value(l, "xmax", &value)) {
        double v;
        if (parse_double(value, &v)) grid_xmax = v;
      }
      continue;
    }
    if (key_value(l, "xmin", &value)) {
      double v;
      if (!parse_double(value, &v))
        throw std::runtime_error(name + ":" + std::to_string(i + 1) + ": bad xmin");
      current.start_s = v;
      field_state |= 1;
    } else if (key_value(l, "xmax", &value)) {
      double v;
      if (!parse_double(value, &v))
        throw std::runtime_error(name + ":" + std::to_string(i + 1) + ": bad xmax");
      current.end_s = v;
      field_state |= 2;
    } else if (key_value(l, "text", &value)) {
      current.label = unquote(value);
      field_state |= 4;
    }
    if (field_state == 7) {
      if (current.end_s <= current.start_s)
        throw std::runtime_error(name + ":" + std::to_string(i + 1) + ": end <= start");
      current.is_silence = options.silence_labels.count(current.label) > 0;
      intervals.push_back(current);
      current = PhonemeInterval{};
      field_state = 0;
    }
  }
  if (intervals.empty())
    throw std::runtime_error(name + ": no interval tier" +
                             (options.tier_name.empty() ? "" : " named '" + options.tier_name + "'"));
  double total = grid_xmax;
  for (const auto& iv : intervals) total = std::max(total, iv.end_s);
  return make_alignment(std::move(intervals), total);
}

}  // namespace

std::vector<std::string> Alignment::nonsilence_labels() const {
  std::vector<std::string> out;
  for (const auto& iv : intervals)
    if (!iv.is_silence) out.push_back(iv.label);
  return out;
}

Alignment make_alignment(std::vector<PhonemeInterval> intervals, double total_duration_s) {
  if (intervals.empty()) throw std::runtime_error("alignment: no intervals");
  std::stable_sort(intervals.begin(), intervals.end(),
                   [](const PhonemeInterval& a, const PhonemeInterval& b) {
                     return a.start_s < b.start_s;
                   });
  std::vector<PhonemeInterval> out;
  out.reserve(intervals.size());
  for (size_t i = 0; i < intervals.size(); ++i) {
    PhonemeInterval iv = intervals[i];
    if (iv.end_s <= iv.start_s)
      throw std::runtime_error("alignment: interval " + std::to_string(i) + " ('" + iv.label +
                               "') has end <= start");
    if (iv.label.empty()) {
      if (!iv.is_silence)
        throw std::runtime_error("alignment: interval " + std::to_string(i) +
                                 " has an empty non-silence label");
      iv.label = "sil";
    }
    if (!out.empty()) {
      const double prev_end = out.back().end_s;
      const double gap = iv.start_s - prev_end;
      if (gap < -1e-9)
        throw std::runtime_error("alignment: interval " + std::to_string(i) + " ('" + iv.label +
                                 "' at " + std::to_string(iv.start_s) +
                                 "s) overlaps the previous interval");
      if (gap > kGapSnap) {
        PhonemeInterval sil;
        sil.label = "sil";
        sil.start_s = prev_end;
        sil.end_s = iv.start_s;
        sil.is_silence = true;
        out.push_back(sil);
      } else if (gap > 0) {
        iv.start_s = prev_end;
      }
    }
    out.push_back(std::move(iv));
  }
  Alignment a;
  a.intervals = std::move(out);
  a.total_duration_s = std::max(total_duration_s, a.intervals.back().end_s);
  return a;
}

Alignment parse_alignment(const std::filesystem::path& path,
                          const AlignmentParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open alignment file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();
  if (content.find("ooTextFile") != std::string::npos ||
      content.find("\"TextGrid\"") != std::string::npos)
    return parse_textgrid(content, options, path.filename().string());
  std::stringstream ss(content);
  return parse_tsv(ss, options, path.filename().string());
}

}  // namespace s2s
