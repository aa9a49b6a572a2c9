#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "wordrec/errors.hpp"

namespace wordrec {

// Mono sample buffer, amplitudes in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

enum class WavFormat { Pcm16, Float32 };

// Decodes a RIFF/WAVE file. PCM 16-bit or IEEE-float 32-bit, 1 or 2 channels.
// Stereo is downmixed by channel mean; 16-bit samples are scaled by 1/32768.
AudioClip load_wav(const std::filesystem::path& path);

// Writes interleaved samples. Values are clamped to [-1, 1]; PCM16 quantizes
// by round(x * 32768) clamped to the int16 range.
void write_wav(const std::filesystem::path& path, const std::vector<double>& interleaved,
               int channels, int sample_rate, WavFormat format);

inline void write_wav_pcm16(const std::filesystem::path& path, const AudioClip& clip) {
  write_wav(path, clip.samples, 1, clip.sample_rate, WavFormat::Pcm16);
}

// Linear-interpolation resample to target_rate (when rates differ), then
// zero-pad or truncate to exactly round(target_rate * target_seconds) samples.
AudioClip normalize_clip(const AudioClip& clip, int target_rate, double target_seconds);

}  // namespace wordrec
