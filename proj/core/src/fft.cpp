#include "ganshm/fft.hpp"

#include <cmath>
#include <cstddef>

namespace ganshm {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Iterative radix-2 Cooley-Tukey; n must be a power of two.
void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv_n;
  }
}

// Bluestein chirp-z transform for arbitrary n, built on the power-of-two FFT.
// The chirp phase uses k^2 mod 2n to keep the angle argument small; plain
// k^2/n loses precision once k^2 overflows the double mantissa.
void fft_bluestein(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  const std::size_t m = next_power_of_two(2 * n - 1);

  std::vector<std::complex<double>> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t k2 = (k * k) % (2 * n);
    const double ang = -kPi * static_cast<double>(k2) / static_cast<double>(n);
    chirp[k] = std::complex<double>(std::cos(ang), std::sin(ang));
  }

  std::vector<std::complex<double>> u(m, {0.0, 0.0});
  std::vector<std::complex<double>> v(m, {0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) u[k] = a[k] * chirp[k];
  v[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) {
    v[k] = std::conj(chirp[k]);
    v[m - k] = std::conj(chirp[k]);
  }

  fft_pow2(u, false);
  fft_pow2(v, false);
  for (std::size_t k = 0; k < m; ++k) u[k] *= v[k];
  fft_pow2(u, true);

  for (std::size_t k = 0; k < n; ++k) a[k] = u[k] * chirp[k];
}

}  // namespace

void fft_inplace(std::vector<std::complex<double>>& data) {
  const std::size_t n = data.size();
  if (n <= 1) return;
  if (is_power_of_two(n)) {
    fft_pow2(data, false);
  } else {
    fft_bluestein(data);
  }
}

std::vector<std::complex<double>> fft_real(const std::vector<double>& signal) {
  std::vector<std::complex<double>> data(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) data[i] = {signal[i], 0.0};
  fft_inplace(data);
  return data;
}

}  // namespace ganshm
