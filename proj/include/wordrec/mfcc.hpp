#pragma once

#include <vector>

#include "wordrec/audio.hpp"
#include "wordrec/tensor.hpp"

namespace wordrec {

// Front-end parameters. Defaults mirror a stock librosa 0.8 mfcc() call at
// 22050 Hz so the numbers are comparable with the usual Python toolchain.
struct MfccConfig {
  int sample_rate = 22050;
  int fft_size = 2048;    // radix-2 FFT, must be a power of two
  int hop_length = 512;
  int mel_bands = 128;
  int n_coefficients = 40;
  int target_frames = 174;
  double fmin = 0.0;
  double fmax = 11025.0;     // sample_rate / 2
  double log_floor = 1e-10;  // power clamp before the dB log

  void validate() const;  // throws InvalidConfig
};

// HTK mel scale.
double mel_scale(double hz);
double mel_to_hz(double mel);

// Triangular filters evaluated at FFT-bin frequencies.
// weights: (mel_bands, fft_size/2 + 1); center_hz: one per band.
struct MelFilterbank {
  Tensor weights;
  std::vector<double> center_hz;
};
MelFilterbank build_mel_filterbank(const MfccConfig& cfg);

// Power spectrogram, shape (fft_size/2 + 1, frames) with
// frames = 1 + floor(len/hop). Signal is reflect-padded by fft_size/2 on both
// ends and each frame is weighted by a periodic Hann window.
Tensor stft_power(const std::vector<double>& samples, const MfccConfig& cfg);

// Orthonormal DCT-II matrix, shape (n_out, n_in).
Tensor dct_matrix(int n_out, int n_in);

// Cepstral coefficients at the clip's natural frame count, shape
// (n_coefficients, 1 + floor(len/hop)).
Tensor mfcc_raw(const AudioClip& clip, const MfccConfig& cfg);

// mfcc_raw followed by fix_frames to (n_coefficients, target_frames).
Tensor mfcc(const AudioClip& clip, const MfccConfig& cfg);

// Zero-pad or truncate trailing frames (columns) to exactly target_frames.
Tensor fix_frames(const Tensor& m, int target_frames);

// Per-coefficient mean over the true (pre-padding) frames.
std::vector<double> summarize_mean(const Tensor& m);

}  // namespace wordrec
