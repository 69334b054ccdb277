// End-to-end pipeline: feature extraction -> score -> synthesis -> assembly/
// mix -> evaluation, driven by a JSON project config.
#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "s2s/pitch.hpp"

namespace s2s {

struct UtterancePaths {
  std::filesystem::path wav;
  std::filesystem::path alignment;
};

struct ProjectConfig {
  std::filesystem::path reference_wav;
  std::filesystem::path reference_alignment;
  std::vector<UtterancePaths> speaker_utterances;  // one per sung utterance, in order
  std::optional<std::filesystem::path> instrumental_wav;
  PitchConfig pitch;
  int n_duration_classes = 15;
  double vocal_gain_db = 0.0;
  double instrumental_gain_db = 0.0;
  int rate_hz = kDefaultRateHz;
  int smooth_window_frames = 5;
  bool per_verse_median = false;         // recompute the reference median per verse
  bool quantizer_include_silence = false;  // pool silence durations when fitting
  std::filesystem::path output_dir = "out";
};

/// Parses the JSON config; relative paths resolve against the config file's
/// directory.
ProjectConfig load_project_config(const std::filesystem::path& path);

struct PipelineArtifacts {
  std::filesystem::path score_json;
  std::filesystem::path quantizer_json;
  std::filesystem::path acapella_wav;
  std::filesystem::path song_wav;
  std::filesystem::path eval_json;
  std::filesystem::path contour_csv;   // time_s,ref_f0,syn_f0
  std::filesystem::path midi_csv;
  std::vector<std::filesystem::path> utterance_wavs;
};

/// Runs every stage and writes each intermediate artifact under
/// config.output_dir. Deterministic: identical inputs give bit-identical
/// artifacts. Stage failures abort with the stage name in the message.
PipelineArtifacts run_pipeline(const ProjectConfig& config);

}  // namespace s2s
