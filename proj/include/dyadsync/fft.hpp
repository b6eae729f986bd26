#pragma once

#include <complex>
#include <span>
#include <vector>

namespace dyadsync {

/// Unnormalized forward DFT of any length (FFTW backed).
std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x);

/// Inverse DFT including the 1/n normalization.
std::vector<std::complex<double>> ifft(std::span<const std::complex<double>> x);

}  // namespace dyadsync
