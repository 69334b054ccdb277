#include "s2s/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "s2s/metrics.hpp"
#include "s2s/mixdown.hpp"
#include "s2s/retarget.hpp"
#include "s2s/score.hpp"

namespace s2s {

namespace {

using nlohmann::json;

[[noreturn]] void stage_fail(const char* stage, const std::exception& e) {
  throw std::runtime_error(std::string("stage ") + stage + ": " + e.what());
}

AudioBuffer load_at_rate(const std::filesystem::path& path, int rate_hz) {
  return resample(load_wav(path), rate_hz);
}

/// A maximal run of consecutive non-silence score entries: one sung utterance.
struct ScoreSegment {
  size_t first_entry = 0;
  size_t last_entry = 0;  // inclusive
  double onset_s = 0.0;
};

std::vector<ScoreSegment> split_score(const Score& score) {
  std::vector<ScoreSegment> segments;
  size_t i = 0;
  while (i < score.entries.size()) {
    if (score.entries[i].is_silence()) {
      ++i;
      continue;
    }
    ScoreSegment seg;
    seg.first_entry = i;
    seg.onset_s = score.entries[i].start_s;
    while (i < score.entries.size() && !score.entries[i].is_silence()) ++i;
    seg.last_entry = i - 1;
    segments.push_back(seg);
  }
  return segments;
}

Score segment_score(const Score& score, const ScoreSegment& seg) {
  Score out;
  out.ref_median_f0 = score.ref_median_f0;
  out.speaker_median_f0 = score.speaker_median_f0;
  out.entries.assign(score.entries.begin() + seg.first_entry,
                     score.entries.begin() + seg.last_entry + 1);
  return out;
}

/// Drops leading/trailing silence from a spoken utterance so that synthesis
/// output starts on the first phoneme and assembly onsets stay exact.
void trim_edge_silence(AudioBuffer* buffer, Alignment* alignment) {
  size_t first = 0, last = alignment->size();
  while (first < alignment->size() && alignment->intervals[first].is_silence) ++first;
  while (last > first && alignment->intervals[last - 1].is_silence) --last;
  if (first >= last) throw std::runtime_error("utterance alignment is all silence");

  const double t0 = alignment->intervals[first].start_s;
  const double t1 = alignment->intervals[last - 1].end_s;
  const int sr = buffer->sample_rate;
  const long long a = std::max<long long>(0, std::llround(t0 * sr));
  const long long b =
      std::min<long long>(static_cast<long long>(buffer->size()), std::llround(t1 * sr));
  buffer->samples.assign(buffer->samples.begin() + a, buffer->samples.begin() + b);

  std::vector<PhonemeInterval> kept(alignment->intervals.begin() + first,
                                    alignment->intervals.begin() + last);
  for (auto& iv : kept) {
    iv.start_s -= t0;
    iv.end_s -= t0;
  }
  alignment->intervals = std::move(kept);
  alignment->total_duration_s = buffer->duration_s();
}

}  // namespace

ProjectConfig load_project_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open project config: " + path.string());
  json j;
  in >> j;

  const auto base = std::filesystem::absolute(path).parent_path();
  auto resolve = [&base](const std::string& p) { return base / p; };

  ProjectConfig c;
  c.reference_wav = resolve(j.at("reference").at("wav").get<std::string>());
  c.reference_alignment = resolve(j.at("reference").at("alignment").get<std::string>());
  for (const auto& ju : j.at("speaker").at("utterances"))
    c.speaker_utterances.push_back({resolve(ju.at("wav").get<std::string>()),
                                    resolve(ju.at("alignment").get<std::string>())});
  if (j.contains("instrumental") && !j["instrumental"].is_null())
    c.instrumental_wav = resolve(j["instrumental"].get<std::string>());
  if (j.contains("pitch")) {
    const auto& jp = j["pitch"];
    if (jp.contains("f_min_hz")) c.pitch.f_min_hz = jp["f_min_hz"].get<double>();
    if (jp.contains("f_max_hz")) c.pitch.f_max_hz = jp["f_max_hz"].get<double>();
    if (jp.contains("hop_s")) c.pitch.hop_s = jp["hop_s"].get<double>();
    if (jp.contains("voicing_threshold"))
      c.pitch.voicing_threshold = jp["voicing_threshold"].get<double>();
  }
  if (j.contains("n_duration_classes")) c.n_duration_classes = j["n_duration_classes"].get<int>();
  if (c.n_duration_classes < 2)
    throw std::runtime_error("project config: n_duration_classes must be >= 2");
  if (j.contains("vocal_gain_db")) c.vocal_gain_db = j["vocal_gain_db"].get<double>();
  if (j.contains("instrumental_gain_db"))
    c.instrumental_gain_db = j["instrumental_gain_db"].get<double>();
  if (j.contains("rate_hz")) c.rate_hz = j["rate_hz"].get<int>();
  if (j.contains("smooth_window_frames"))
    c.smooth_window_frames = j["smooth_window_frames"].get<int>();
  if (j.contains("per_verse_median")) c.per_verse_median = j["per_verse_median"].get<bool>();
  if (j.contains("quantizer_include_silence"))
    c.quantizer_include_silence = j["quantizer_include_silence"].get<bool>();
  c.output_dir = resolve(j.value("output_dir", "out"));
  return c;
}

PipelineArtifacts run_pipeline(const ProjectConfig& config) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  PipelineArtifacts art;
  art.score_json = config.output_dir / "score.json";
  art.quantizer_json = config.output_dir / "quantizer.json";
  art.acapella_wav = config.output_dir / "acapella.wav";
  art.song_wav = config.output_dir / "song.wav";
  art.eval_json = config.output_dir / "eval.json";
  art.contour_csv = config.output_dir / "contours.csv";
  art.midi_csv = config.output_dir / "midi.csv";

  // --- extract: load audio, alignments, F0 contours, medians -------------
  AudioBuffer ref_audio;
  Alignment ref_align;
  F0Contour ref_raw, ref_processed;
  std::vector<AudioBuffer> spk_audio;
  std::vector<Alignment> spk_align;
  double ref_median = 0.0, speaker_median = 0.0;
  try {
    ref_audio = load_at_rate(config.reference_wav, config.rate_hz);
    ref_align = parse_alignment(config.reference_alignment);
    ref_raw = extract_f0(ref_audio, config.pitch);
    ref_median = speaker_median_f0(ref_raw);
    ref_processed = smooth(interpolate_unvoiced(ref_raw), config.smooth_window_frames);

    std::vector<F0Contour> spk_contours;
    for (const auto& utt : config.speaker_utterances) {
      spk_audio.push_back(load_at_rate(utt.wav, config.rate_hz));
      spk_align.push_back(parse_alignment(utt.alignment));
      spk_contours.push_back(extract_f0(spk_audio.back(), config.pitch));
      trim_edge_silence(&spk_audio.back(), &spk_align.back());
    }
    if (spk_contours.empty()) throw std::runtime_error("no speaker utterances in config");
    speaker_median = speaker_median_f0(spk_contours);
  } catch (const std::exception& e) {
    stage_fail("extract", e);
  }

  // --- score: duration quantizer + note/duration targets -----------------
  Score score;
  try {
    std::vector<double> durations;
    auto pool = [&](const Alignment& a) {
      for (const auto& iv : a.intervals)
        if (!iv.is_silence || config.quantizer_include_silence)
          durations.push_back(iv.duration_s());
    };
    pool(ref_align);
    for (const auto& a : spk_align) pool(a);
    const DurationQuantizer q = fit_duration_quantizer(durations, config.n_duration_classes);
    save_quantizer(q, art.quantizer_json);
    score = config.per_verse_median
                ? build_score_per_verse(ref_align, ref_processed, ref_raw, ref_median,
                                        speaker_median, q)
                : build_score(ref_align, ref_processed, ref_median, speaker_median, q);
    save_score(score, art.score_json);
    export_midi_csv(score, art.midi_csv);
  } catch (const std::exception& e) {
    stage_fail("score", e);
  }

  // --- retarget: synthesize each utterance against its score segment -----
  std::vector<AudioBuffer> rendered;
  std::vector<Alignment> rendered_align;
  std::vector<ScoreSegment> segments = split_score(score);
  try {
    if (segments.size() != config.speaker_utterances.size())
      throw std::runtime_error("reference song has " + std::to_string(segments.size()) +
                               " sung utterances but the config lists " +
                               std::to_string(config.speaker_utterances.size()) +
                               " speaker utterances");
    const DspBackend backend(config.pitch);
    for (size_t u = 0; u < segments.size(); ++u) {
      BackendRequest request;
      request.source = spk_audio[u];
      request.source_alignment = spk_align[u];
      request.score = segment_score(score, segments[u]);
      AudioBuffer out = backend.synthesize(request);

      Alignment out_align;
      double t = 0.0;
      for (const auto& e : request.score.entries) {
        PhonemeInterval iv;
        iv.label = e.phoneme;
        iv.is_silence = e.is_silence();
        iv.start_s = t;
        t += e.target_duration_s;
        iv.end_s = t;
        out_align.intervals.push_back(std::move(iv));
      }
      out_align.total_duration_s = out.duration_s();

      const auto path = config.output_dir / ("utterance_" + std::to_string(u) + ".wav");
      save_wav(out, path, WavBitDepth::Float32);
      art.utterance_wavs.push_back(path);
      rendered.push_back(std::move(out));
      rendered_align.push_back(std::move(out_align));
    }
  } catch (const std::exception& e) {
    stage_fail("retarget", e);
  }

  // --- assemble + mix -----------------------------------------------------
  AudioBuffer acapella, song;
  try {
    std::vector<TimelinePlacement> placements;
    for (size_t u = 0; u < rendered.size(); ++u)
      placements.push_back({rendered[u], segments[u].onset_s});
    const double total = std::max(ref_audio.duration_s(), ref_align.total_duration_s);
    acapella = assemble(placements, total, config.rate_hz);
    save_wav(acapella, art.acapella_wav, WavBitDepth::Float32);

    if (config.instrumental_wav) {
      const AudioBuffer inst = load_at_rate(*config.instrumental_wav, config.rate_hz);
      song = mix(acapella, inst, config.vocal_gain_db, config.instrumental_gain_db);
    } else {
      song = acapella;
    }
    save_wav(song, art.song_wav, WavBitDepth::Float32);
  } catch (const std::exception& e) {
    stage_fail("mix", e);
  }

  // --- eval: objective pitch/duration metrics on the assembled a capella --
  try {
    // Built directly (not via make_alignment): a quantized utterance can run
    // a hair past the next onset, which is fine for metric windows.
    Alignment syn_align;
    for (size_t u = 0; u < rendered_align.size(); ++u) {
      for (const auto& iv : rendered_align[u].intervals) {
        PhonemeInterval shifted = iv;
        shifted.start_s += segments[u].onset_s;
        shifted.end_s += segments[u].onset_s;
        syn_align.intervals.push_back(std::move(shifted));
      }
    }
    syn_align.total_duration_s = acapella.duration_s();

    const F0Contour syn_raw = extract_f0(acapella, config.pitch);
    const EvalReport report =
        evaluate(ref_raw, ref_align, syn_raw, syn_align, ref_median, speaker_median);
    save_eval_report(report, art.eval_json);
    export_plot_data(transpose_contour(ref_raw, ref_median, speaker_median), syn_raw,
                     art.contour_csv);
  } catch (const std::exception& e) {
    stage_fail("eval", e);
  }

  return art;
}

}  // namespace s2s
