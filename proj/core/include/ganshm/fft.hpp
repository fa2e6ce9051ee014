#pragma once

#include <complex>
#include <vector>

namespace ganshm {

// In-place forward DFT, X[k] = sum_t x[t] exp(-2*pi*i*k*t/n), no scaling.
// Radix-2 Cooley-Tukey for powers of two, Bluestein's chirp-z otherwise, so
// any length >= 1 is supported. Fully deterministic.
void fft_inplace(std::vector<std::complex<double>>& data);

// Forward DFT of a real signal; returns all n complex bins.
std::vector<std::complex<double>> fft_real(const std::vector<double>& signal);

}  // namespace ganshm
