#include "wordrec/fft.hpp"

#include <numbers>

#include "wordrec/errors.hpp"

namespace wordrec {

Fft::Fft(int n) : n_(n) {
  if (!is_power_of_two(n)) throw InvalidConfig("fft size must be a power of two");
  reversed_.resize(static_cast<size_t>(n));
  int log2n = 0;
  while ((1 << log2n) < n) ++log2n;
  for (int i = 0; i < n; ++i) {
    int r = 0;
    for (int b = 0; b < log2n; ++b)
      if (i & (1 << b)) r |= 1 << (log2n - 1 - b);
    reversed_[static_cast<size_t>(i)] = r;
  }
  twiddle_.reserve(static_cast<size_t>(n));
  for (int len = 2; len <= n; len <<= 1) {
    for (int k = 0; k < len / 2; ++k) {
      double ang = -2.0 * std::numbers::pi * k / len;
      twiddle_.emplace_back(std::cos(ang), std::sin(ang));
    }
  }
}

void Fft::forward(std::complex<double>* a) const {
  const int n = n_;
  for (int i = 0; i < n; ++i) {
    int r = reversed_[static_cast<size_t>(i)];
    if (i < r) std::swap(a[i], a[r]);
  }
  size_t tw_base = 0;
  for (int len = 2; len <= n; len <<= 1) {
    const int half = len / 2;
    for (int start = 0; start < n; start += len) {
      for (int k = 0; k < half; ++k) {
        std::complex<double> u = a[start + k];
        std::complex<double> t = a[start + k + half] * twiddle_[tw_base + static_cast<size_t>(k)];
        a[start + k] = u + t;
        a[start + k + half] = u - t;
      }
    }
    tw_base += static_cast<size_t>(half);
  }
}

}  // namespace wordrec
