#pragma once

#include <complex>
#include <vector>

namespace wordrec {

// Iterative radix-2 Cooley-Tukey with precomputed twiddles, for reuse
// across STFT frames. Size must be a power of two.
class Fft {
 public:
  explicit Fft(int n);

  int size() const { return n_; }

  // Forward transform in place, no normalization.
  void forward(std::complex<double>* a) const;
  void forward(std::vector<std::complex<double>>& a) const { forward(a.data()); }

  static bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

 private:
  int n_;
  std::vector<int> reversed_;
  std::vector<std::complex<double>> twiddle_;  // per stage, len/2 roots each
};

}  // namespace wordrec
