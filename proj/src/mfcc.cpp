#include "wordrec/mfcc.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "wordrec/errors.hpp"
#include "wordrec/fft.hpp"
#include "wordrec/gemm.hpp"

namespace wordrec {

void MfccConfig::validate() const {
  if (sample_rate <= 0) throw InvalidConfig("sample_rate must be positive");
  if (hop_length <= 0) throw InvalidConfig("hop_length must be positive");
  if (fft_size < hop_length) throw InvalidConfig("fft_size must be >= hop_length");
  if (!Fft::is_power_of_two(fft_size)) throw InvalidConfig("fft_size must be a power of two");
  if (mel_bands <= 0) throw InvalidConfig("mel_bands must be positive");
  if (n_coefficients <= 0 || n_coefficients > mel_bands)
    throw InvalidConfig("n_coefficients must be in [1, mel_bands]");
  if (target_frames <= 0) throw InvalidConfig("target_frames must be positive");
  if (fmin < 0.0) throw InvalidConfig("fmin must be >= 0");
  if (fmax <= fmin) throw InvalidConfig("fmax must exceed fmin");
  if (fmax > sample_rate / 2.0 + 1e-9) throw InvalidConfig("fmax must be <= sample_rate/2");
  if (!(log_floor > 0.0)) throw InvalidConfig("log_floor must be positive");
}

double mel_scale(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank build_mel_filterbank(const MfccConfig& cfg) {
  cfg.validate();
  const int bins = cfg.fft_size / 2 + 1;
  const double mel_lo = mel_scale(cfg.fmin);
  const double mel_hi = mel_scale(cfg.fmax);

  // mel_bands + 2 break frequencies, equally spaced in mel.
  std::vector<double> breaks_hz(cfg.mel_bands + 2);
  for (int i = 0; i < cfg.mel_bands + 2; ++i) {
    const double m = mel_lo + (mel_hi - mel_lo) * i / (cfg.mel_bands + 1);
    breaks_hz[i] = mel_to_hz(m);
  }

  MelFilterbank fb;
  fb.weights = Tensor({cfg.mel_bands, bins});
  fb.center_hz.resize(cfg.mel_bands);
  const double bin_hz = static_cast<double>(cfg.sample_rate) / cfg.fft_size;

  for (int b = 0; b < cfg.mel_bands; ++b) {
    const double left = breaks_hz[b];
    const double center = breaks_hz[b + 1];
    const double right = breaks_hz[b + 2];
    fb.center_hz[b] = center;
    bool any = false;
    for (int k = 0; k < bins; ++k) {
      const double f = k * bin_hz;
      const double up = (center > left) ? (f - left) / (center - left) : -1.0;
      const double down = (right > center) ? (right - f) / (right - center) : -1.0;
      const double w = std::max(0.0, std::min(up, down));
      fb.weights.at(b, k) = w;
      any = any || w > 0.0;
    }
    if (!any)
      throw DegenerateBand("mel band " + std::to_string(b) +
                           " covers no FFT bin; reduce mel_bands or raise fft_size");
  }
  return fb;
}

namespace {

// numpy-style reflect indexing (edge sample not repeated), valid for any
// offset; a length-1 signal reflects onto itself.
inline int reflect_index(long long q, int len) {
  if (len == 1) return 0;
  const long long period = 2LL * (len - 1);
  long long r = q % period;
  if (r < 0) r += period;
  if (r >= len) r = period - r;
  return static_cast<int>(r);
}

}  // namespace

Tensor stft_power(const std::vector<double>& samples, const MfccConfig& cfg) {
  cfg.validate();
  const int len = static_cast<int>(samples.size());
  if (len < 1) throw EmptyAudio("stft_power: empty signal");

  const int n = cfg.fft_size;
  const int pad = n / 2;
  const int frames = 1 + len / cfg.hop_length;
  const int bins = n / 2 + 1;

  std::vector<double> window(n);
  for (int i = 0; i < n; ++i) window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);

  Tensor power({bins, frames});
  Fft fft(n);
  std::vector<std::complex<double>> buf(n);

  for (int t = 0; t < frames; ++t) {
    const long long start = static_cast<long long>(t) * cfg.hop_length - pad;
    for (int i = 0; i < n; ++i)
      buf[i] = samples[reflect_index(start + i, len)] * window[i];
    fft.forward(buf.data());
    for (int k = 0; k < bins; ++k) power.at(k, t) = std::norm(buf[k]);
  }
  return power;
}

Tensor dct_matrix(int n_out, int n_in) {
  if (n_out <= 0 || n_in <= 0 || n_out > n_in) throw InvalidConfig("bad DCT matrix size");
  Tensor d({n_out, n_in});
  const double s0 = std::sqrt(1.0 / n_in);
  const double s = std::sqrt(2.0 / n_in);
  for (int k = 0; k < n_out; ++k)
    for (int i = 0; i < n_in; ++i)
      d.at(k, i) = (k == 0 ? s0 : s) * std::cos(M_PI * (2 * i + 1) * k / (2.0 * n_in));
  return d;
}

Tensor mfcc_raw(const AudioClip& clip, const MfccConfig& cfg) {
  const Tensor power = stft_power(clip.samples, cfg);
  const int frames = power.dim(1);
  const int bins = power.dim(0);

  const MelFilterbank fb = build_mel_filterbank(cfg);
  Tensor mel({cfg.mel_bands, frames});
  gemm_nn(cfg.mel_bands, frames, bins, fb.weights.data(), power.data(), mel.data());

  for (double& p : mel.v) p = 10.0 * std::log10(std::max(p, cfg.log_floor));

  const Tensor d = dct_matrix(cfg.n_coefficients, cfg.mel_bands);
  Tensor out({cfg.n_coefficients, frames});
  gemm_nn(cfg.n_coefficients, frames, cfg.mel_bands, d.data(), mel.data(), out.data());
  return out;
}

Tensor mfcc(const AudioClip& clip, const MfccConfig& cfg) {
  return fix_frames(mfcc_raw(clip, cfg), cfg.target_frames);
}

Tensor fix_frames(const Tensor& m, int target_frames) {
  check_shape(m.rank() == 2, "fix_frames expects a 2-D matrix");
  if (target_frames <= 0) throw InvalidConfig("target_frames must be positive");
  const int rows = m.dim(0);
  const int frames = m.dim(1);
  if (frames == target_frames) return m;
  Tensor out({rows, target_frames});
  const int keep = std::min(frames, target_frames);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < keep; ++c) out.at(r, c) = m.at(r, c);
  return out;
}

std::vector<double> summarize_mean(const Tensor& m) {
  check_shape(m.rank() == 2 && m.dim(1) >= 1, "summarize_mean expects a non-empty matrix");
  const int rows = m.dim(0);
  const int frames = m.dim(1);
  std::vector<double> mean(rows);
  for (int r = 0; r < rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < frames; ++c) s += m.at(r, c);
    mean[r] = s / frames;
  }
  return mean;
}

}  // namespace wordrec
