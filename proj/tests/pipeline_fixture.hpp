// Synthetic end-to-end fixture: a sawtooth "reference song" with three notes
// at known times plus a monotone sawtooth "speaker" at a different median.
#pragma once

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "s2s/audio.hpp"
#include "test_signals.hpp"

namespace s2s::testing {

/// Writes song/speaker wavs, alignments and a project config into dir;
/// returns the config path.
inline std::filesystem::path write_pipeline_fixture(const std::filesystem::path& dir,
                                                    bool with_instrumental) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  // Song: sil .2 | AA 220 Hz .4 | EH 261.63 .3 | sil .4 | OW 329.63 .5 | sil .4
  AudioBuffer song = make_silence(2.2);
  auto paste = [&song](const AudioBuffer& seg, double at) {
    for (size_t i = 0; i < seg.size(); ++i)
      song.samples[static_cast<size_t>(at * 24000) + i] = seg.samples[i];
  };
  paste(make_sawtooth(220.0, 0.4), 0.2);
  paste(make_sawtooth(261.626, 0.3), 0.6);
  paste(make_sawtooth(329.628, 0.5), 1.3);
  save_wav(song, dir / "song.wav", WavBitDepth::Float32);
  std::ofstream(dir / "song.tsv") << "sil\t0.0\t0.2\nAA\t0.2\t0.6\nEH\t0.6\t0.9\n"
                                  << "sil\t0.9\t1.3\nOW\t1.3\t1.8\nsil\t1.8\t2.2\n";

  // Speaker utterance 1: silence-padded AA+EH at 130 Hz.
  AudioBuffer utt1 = make_silence(0.9);
  const AudioBuffer talk1 = make_sawtooth(130.0, 0.7);
  for (size_t i = 0; i < talk1.size(); ++i)
    utt1.samples[static_cast<size_t>(0.1 * 24000) + i] = talk1.samples[i];
  save_wav(utt1, dir / "utt1.wav", WavBitDepth::Float32);
  std::ofstream(dir / "utt1.tsv")
      << "sil\t0.0\t0.1\nAA\t0.1\t0.46\nEH\t0.46\t0.8\nsil\t0.8\t0.9\n";

  // Speaker utterance 2: OW at 130 Hz.
  save_wav(make_sawtooth(130.0, 0.44), dir / "utt2.wav", WavBitDepth::Float32);
  std::ofstream(dir / "utt2.tsv") << "OW\t0.0\t0.44\n";

  if (with_instrumental)
    save_wav(make_sine(98.0, 2.2, kDefaultRateHz, 0.3), dir / "inst.wav", WavBitDepth::Float32);

  nlohmann::json j;
  j["reference"] = {{"wav", "song.wav"}, {"alignment", "song.tsv"}};
  j["speaker"]["utterances"] = {{{"wav", "utt1.wav"}, {"alignment", "utt1.tsv"}},
                                {{"wav", "utt2.wav"}, {"alignment", "utt2.tsv"}}};
  if (with_instrumental) j["instrumental"] = "inst.wav";
  j["n_duration_classes"] = 6;
  j["output_dir"] = "out";
  std::ofstream(dir / "project.json") << j.dump(2);
  return dir / "project.json";
}

}  // namespace s2s::testing
