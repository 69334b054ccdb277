// s2s: speech-to-song prosody retargeting CLI.
//
// Pipeline stages are exposed as standalone subcommands (extract-f0,
// build-score, retarget, stretch, pitchshift, assemble, mix, eval, ...) and
// as one `run` command driven by a JSON project config.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "s2s/metrics.hpp"
#include "s2s/mixdown.hpp"
#include "s2s/pipeline.hpp"
#include "s2s/retarget.hpp"
#include "s2s/score.hpp"
#include "s2s/tsm.hpp"

namespace {

using namespace s2s;

AudioBuffer load_input(const std::string& path, int rate_hz) {
  return resample(load_wav(path), rate_hz);
}

TimeMap load_time_map_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open time map: " + path);
  TimeMap map;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || !(std::isdigit(line[0]) || line[0] == '.' || line[0] == '-')) continue;
    double src, tgt;
    if (std::sscanf(line.c_str(), "%lf,%lf", &src, &tgt) != 2)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected `source_s,target_s`");
    map.anchors.push_back({src, tgt});
  }
  map.validate();
  return map;
}

void add_pitch_options(CLI::App* cmd, PitchConfig* pc) {
  cmd->add_option("--f-min", pc->f_min_hz, "Pitch floor in Hz");
  cmd->add_option("--f-max", pc->f_max_hz, "Pitch ceiling in Hz");
  cmd->add_option("--hop", pc->hop_s, "Analysis hop in seconds");
  cmd->add_option("--voicing-threshold", pc->voicing_threshold,
                  "Autocorrelation peak needed to call a frame voiced");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speech-to-song prosody retargeting toolkit"};
  app.require_subcommand(1);
  int rate_hz = kDefaultRateHz;
  app.add_option("--rate", rate_hz, "Internal sample rate in Hz")->capture_default_str();

  // --- extract-f0 ---------------------------------------------------------
  auto* c_extract = app.add_subcommand("extract-f0", "Extract an F0 contour to CSV");
  std::string ex_in, ex_out;
  PitchConfig ex_pitch;
  bool ex_interpolate = false;
  int ex_smooth = 0;
  c_extract->add_option("--in", ex_in, "Input WAV")->required();
  c_extract->add_option("--out", ex_out, "Output CSV (time_s,f0_hz,voiced)")->required();
  add_pitch_options(c_extract, &ex_pitch);
  c_extract->add_flag("--interpolate", ex_interpolate, "Fill unvoiced gaps");
  c_extract->add_option("--smooth", ex_smooth, "Median-smooth with this odd window");
  c_extract->callback([&] {
    F0Contour c = extract_f0(load_input(ex_in, rate_hz), ex_pitch);
    if (ex_interpolate || ex_smooth > 0) c = interpolate_unvoiced(c);
    if (ex_smooth > 0) c = smooth(c, ex_smooth);
    export_contour_csv(c, ex_out);
  });

  // --- align-check --------------------------------------------------------
  auto* c_align = app.add_subcommand("align-check", "Validate an alignment file");
  std::string al_in;
  c_align->add_option("--in", al_in, "TSV or TextGrid alignment")->required();
  c_align->callback([&] {
    const Alignment a = parse_alignment(al_in);
    std::printf("%zu intervals (%zu non-silence), %.3f s\n", a.size(),
                a.nonsilence_labels().size(), a.total_duration_s);
  });

  // --- fit-quantizer ------------------------------------------------------
  auto* c_fitq = app.add_subcommand("fit-quantizer", "Fit the equal-frequency duration bins");
  std::vector<std::string> fq_aligns;
  std::string fq_out;
  int fq_classes = 15;
  bool fq_include_silence = false;
  c_fitq->add_option("--alignments", fq_aligns, "Alignment files to pool durations from")
      ->required()
      ->expected(-1);
  c_fitq->add_option("--classes", fq_classes, "Number of duration classes")
      ->capture_default_str();
  c_fitq->add_flag("--include-silence", fq_include_silence,
                   "Pool silence durations too (excluded by default)");
  c_fitq->add_option("--out", fq_out, "Output quantizer JSON")->required();
  c_fitq->callback([&] {
    std::vector<double> durations;
    for (const auto& path : fq_aligns)
      for (const auto& iv : parse_alignment(path).intervals)
        if (!iv.is_silence || fq_include_silence) durations.push_back(iv.duration_s());
    save_quantizer(fit_duration_quantizer(durations, fq_classes), fq_out);
  });

  // --- build-score --------------------------------------------------------
  auto* c_score = app.add_subcommand("build-score", "Build the per-phoneme prosody score");
  std::string bs_wav, bs_align, bs_quant, bs_out, bs_midi;
  std::vector<std::string> bs_speaker_wavs;
  double bs_speaker_median = 0.0;
  int bs_smooth = 5;
  bool bs_per_verse = false;
  PitchConfig bs_pitch;
  c_score->add_option("--ref-wav", bs_wav, "Reference a capella WAV")->required();
  c_score->add_option("--ref-align", bs_align, "Reference alignment")->required();
  c_score->add_option("--quantizer", bs_quant, "Fitted quantizer JSON")->required();
  c_score->add_option("--speaker-wav", bs_speaker_wavs,
                      "Target speaker WAVs used for the median F0")
      ->expected(-1);
  c_score->add_option("--speaker-median", bs_speaker_median,
                      "Target speaker median F0 in Hz (overrides --speaker-wav)");
  c_score->add_option("--smooth", bs_smooth, "Contour smoothing window")->capture_default_str();
  c_score->add_flag("--per-verse", bs_per_verse,
                    "Recompute the reference median per verse instead of globally");
  add_pitch_options(c_score, &bs_pitch);
  c_score->add_option("--out", bs_out, "Output score JSON")->required();
  c_score->add_option("--midi-csv", bs_midi, "Optional per-phoneme MIDI CSV");
  c_score->callback([&] {
    const AudioBuffer ref = load_input(bs_wav, rate_hz);
    const Alignment align = parse_alignment(bs_align);
    const F0Contour raw = extract_f0(ref, bs_pitch);
    const double ref_median = speaker_median_f0(raw);
    double spk_median = bs_speaker_median;
    if (spk_median <= 0) {
      std::vector<F0Contour> contours;
      for (const auto& w : bs_speaker_wavs)
        contours.push_back(extract_f0(load_input(w, rate_hz), bs_pitch));
      if (contours.empty())
        throw std::runtime_error("build-score: give --speaker-median or --speaker-wav");
      spk_median = speaker_median_f0(contours);
    }
    const F0Contour processed = smooth(interpolate_unvoiced(raw), bs_smooth);
    const DurationQuantizer q = load_quantizer(bs_quant);
    const Score score =
        bs_per_verse
            ? build_score_per_verse(align, processed, raw, ref_median, spk_median, q)
            : build_score(align, processed, ref_median, spk_median, q);
    save_score(score, bs_out);
    if (!bs_midi.empty()) export_midi_csv(score, bs_midi);
  });

  // --- retarget -----------------------------------------------------------
  auto* c_ret = app.add_subcommand("retarget", "Render a spoken utterance onto a score");
  std::string rt_src, rt_align, rt_score, rt_out;
  PitchConfig rt_pitch;
  c_ret->add_option("--source", rt_src, "Spoken source WAV")->required();
  c_ret->add_option("--align", rt_align, "Source alignment")->required();
  c_ret->add_option("--score", rt_score, "Score JSON")->required();
  c_ret->add_option("--out", rt_out, "Output WAV")->required();
  add_pitch_options(c_ret, &rt_pitch);
  c_ret->callback([&] {
    BackendRequest request;
    request.source = load_input(rt_src, rate_hz);
    request.source_alignment = parse_alignment(rt_align);
    request.score = load_score(rt_score);
    save_wav(DspBackend(rt_pitch).synthesize(request), rt_out, WavBitDepth::Float32);
  });

  // --- augment ------------------------------------------------------------
  auto* c_aug = app.add_subcommand("augment", "Pitch/rate augmentation of an utterance");
  std::string ag_in, ag_out;
  int ag_semitones = 0;
  double ag_rate = 1.0;
  PitchConfig ag_pitch;
  c_aug->add_option("--in", ag_in, "Input WAV")->required();
  c_aug->add_option("--semitones", ag_semitones, "Pitch shift in semitones, [-6, 6]")
      ->capture_default_str();
  c_aug->add_option("--rate", ag_rate, "Speaking rate factor, [0.7, 1.3]")
      ->capture_default_str();
  add_pitch_options(c_aug, &ag_pitch);
  c_aug->add_option("--out", ag_out, "Output WAV")->required();
  c_aug->callback([&] {
    const AudioBuffer in = load_input(ag_in, rate_hz);
    save_wav(augment(in, extract_f0(in, ag_pitch), ag_semitones, ag_rate), ag_out,
             WavBitDepth::Float32);
  });

  // --- stretch ------------------------------------------------------------
  auto* c_str = app.add_subcommand("stretch", "WSOLA time stretch");
  std::string st_in, st_out, st_map;
  double st_ratio = 0.0;
  WsolaParams st_params;
  c_str->add_option("--in", st_in, "Input WAV")->required();
  c_str->add_option("--ratio", st_ratio, "Uniform stretch ratio (output/input length)");
  c_str->add_option("--map", st_map, "Time map CSV `source_s,target_s`");
  c_str->add_option("--frame-len", st_params.frame_len_s, "Frame length in seconds");
  c_str->add_option("--tolerance", st_params.tolerance_s, "Search tolerance in seconds");
  c_str->add_option("--out", st_out, "Output WAV")->required();
  c_str->callback([&] {
    const AudioBuffer in = load_input(st_in, rate_hz);
    TimeMap map;
    if (!st_map.empty())
      map = load_time_map_csv(st_map);
    else if (st_ratio > 0)
      map = TimeMap::uniform(in.duration_s(), st_ratio);
    else
      throw std::runtime_error("stretch: give --ratio or --map");
    save_wav(wsola_stretch(in, map, st_params), st_out, WavBitDepth::Float32);
  });

  // --- pitchshift ---------------------------------------------------------
  auto* c_ps = app.add_subcommand("pitchshift", "TD-PSOLA pitch shift (duration preserved)");
  std::string ps_in, ps_out;
  double ps_semitones = 0.0, ps_ratio = 0.0;
  PitchConfig ps_pitch;
  c_ps->add_option("--in", ps_in, "Input WAV")->required();
  c_ps->add_option("--semitones", ps_semitones, "Shift in semitones");
  c_ps->add_option("--ratio", ps_ratio, "Multiplicative pitch ratio (overrides --semitones)");
  add_pitch_options(c_ps, &ps_pitch);
  c_ps->add_option("--out", ps_out, "Output WAV")->required();
  c_ps->callback([&] {
    const AudioBuffer in = load_input(ps_in, rate_hz);
    const double ratio = ps_ratio > 0 ? ps_ratio : std::exp2(ps_semitones / 12.0);
    const F0Contour contour = extract_f0(in, ps_pitch);
    std::vector<double> curve(in.size());
    for (size_t i = 0; i < in.size(); ++i) {
      const size_t f = std::min(contour.size() - 1,
                                static_cast<size_t>(std::llround(
                                    i / (contour.hop_s * in.sample_rate))));
      curve[i] = contour.frames[f].voiced ? ratio : 1.0;
    }
    save_wav(psola_shift(in, detect_epochs(in, contour), curve), ps_out, WavBitDepth::Float32);
  });

  // --- assemble -----------------------------------------------------------
  auto* c_asm = app.add_subcommand("assemble", "Place utterances on the song timeline");
  std::string as_manifest, as_out;
  double as_total = 0.0;
  c_asm->add_option("--manifest", as_manifest, "JSON [{\"wav\": ..., \"onset_s\": ...}]")
      ->required();
  c_asm->add_option("--total", as_total, "Timeline length in seconds")->required();
  c_asm->add_option("--out", as_out, "Output WAV")->required();
  c_asm->callback([&] {
    std::ifstream in(as_manifest);
    if (!in) throw std::runtime_error("cannot open manifest: " + as_manifest);
    nlohmann::json j;
    in >> j;
    const auto base = std::filesystem::absolute(as_manifest).parent_path();
    std::vector<TimelinePlacement> placements;
    for (const auto& jp : j)
      placements.push_back({load_input((base / jp.at("wav").get<std::string>()).string(), rate_hz),
                            jp.at("onset_s").get<double>()});
    save_wav(assemble(placements, as_total, rate_hz), as_out, WavBitDepth::Float32);
  });

  // --- mix ----------------------------------------------------------------
  auto* c_mix = app.add_subcommand("mix", "Mix the a capella with an instrumental");
  std::string mx_vocal, mx_inst, mx_out;
  double mx_vg = 0.0, mx_ig = 0.0;
  bool mx_no_inst = false;
  c_mix->add_option("--vocal", mx_vocal, "Vocal WAV")->required();
  c_mix->add_option("--instrumental", mx_inst, "Instrumental WAV");
  c_mix->add_flag("--no-instrumental", mx_no_inst, "Vocal only (instrumental gain -inf)");
  c_mix->add_option("--vocal-gain-db", mx_vg, "Vocal gain in dB")->capture_default_str();
  c_mix->add_option("--instrumental-gain-db", mx_ig, "Instrumental gain in dB")
      ->capture_default_str();
  c_mix->add_option("--out", mx_out, "Output WAV")->required();
  c_mix->callback([&] {
    const AudioBuffer vocal = load_input(mx_vocal, rate_hz);
    AudioBuffer inst;
    if (!mx_no_inst) {
      if (mx_inst.empty()) throw std::runtime_error("mix: give --instrumental or --no-instrumental");
      inst = load_input(mx_inst, rate_hz);
    }
    save_wav(mix(vocal, inst, mx_vg, mx_no_inst ? -1e9 : mx_ig), mx_out, WavBitDepth::Float32);
  });

  // --- eval ---------------------------------------------------------------
  auto* c_eval = app.add_subcommand("eval", "Per-phoneme pitch/duration error report");
  std::string ev_ref_wav, ev_ref_align, ev_syn_wav, ev_syn_align, ev_out, ev_plot;
  double ev_ref_median = 0.0, ev_spk_median = 0.0;
  PitchConfig ev_pitch;
  c_eval->add_option("--ref-wav", ev_ref_wav, "Reference a capella WAV")->required();
  c_eval->add_option("--ref-align", ev_ref_align, "Reference alignment")->required();
  c_eval->add_option("--syn-wav", ev_syn_wav, "Synthesized WAV")->required();
  c_eval->add_option("--syn-align", ev_syn_align, "Synthesized alignment")->required();
  c_eval->add_option("--ref-median", ev_ref_median, "Reference median F0 (default: measured)");
  c_eval->add_option("--speaker-median", ev_spk_median,
                     "Target speaker median F0 (default: measured from --syn-wav)");
  add_pitch_options(c_eval, &ev_pitch);
  c_eval->add_option("--out", ev_out, "Output report JSON")->required();
  c_eval->add_option("--plot-csv", ev_plot, "Optional contour CSV (time_s,ref_f0,syn_f0)");
  c_eval->callback([&] {
    const F0Contour ref = extract_f0(load_input(ev_ref_wav, rate_hz), ev_pitch);
    const F0Contour syn = extract_f0(load_input(ev_syn_wav, rate_hz), ev_pitch);
    const double rm = ev_ref_median > 0 ? ev_ref_median : speaker_median_f0(ref);
    const double sm = ev_spk_median > 0 ? ev_spk_median : speaker_median_f0(syn);
    const EvalReport report = evaluate(ref, parse_alignment(ev_ref_align), syn,
                                       parse_alignment(ev_syn_align), rm, sm);
    save_eval_report(report, ev_out);
    if (!ev_plot.empty()) export_plot_data(transpose_contour(ref, rm, sm), syn, ev_plot);
    std::printf("pitch error: %.3f +- %.3f semitones\nduration error: %.1f +- %.1f ms\n",
                report.pitch_error_mean, report.pitch_error_std, report.duration_error_mean,
                report.duration_error_std);
  });

  // --- run ----------------------------------------------------------------
  auto* c_run = app.add_subcommand("run", "Run the full pipeline from a project config");
  std::string rn_config;
  c_run->add_option("--config", rn_config, "Project config JSON")->required();
  c_run->callback([&] {
    const PipelineArtifacts art = run_pipeline(load_project_config(rn_config));
    std::printf("score:    %s\nacapella: %s\nsong:     %s\neval:     %s\n",
                art.score_json.string().c_str(), art.acapella_wav.string().c_str(),
                art.song_wav.string().c_str(), art.eval_json.string().c_str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
