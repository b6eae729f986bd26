#pragma once

#include <complex>
#include <span>
#include <vector>

#include "dyadsync/types.hpp"

namespace dyadsync {

/// Second-order section in transposed direct form II, a0 normalized to 1.
struct Biquad {
  double b0, b1, b2;
  double a1, a2;
};

/// A cascade of biquads. `order()` is the order of the overall transfer function.
struct FilterCoefficients {
  std::vector<Biquad> sections;

  int order() const { return static_cast<int>(2 * sections.size()); }
  /// H(e^{j 2 pi f / fs}).
  std::complex<double> response(double freq_hz, double fs) const;
  /// Poles of every section lie strictly inside the unit circle.
  bool is_stable() const;
};

/// Butterworth bandpass from an analog prototype of `prototype_order` poles,
/// bilinear transform with prewarped edges. Unity gain at the geometric center.
/// Throws Errc::invalid_band when the upper edge is at or above Nyquist.
FilterCoefficients design_bandpass(const FrequencyBand& band, double fs, int prototype_order = 4);

/// Butterworth lowpass with unity DC gain.
FilterCoefficients design_lowpass(double cutoff_hz, double fs, int order = 8);

/// Second-order IIR notch with the given quality factor.
FilterCoefficients design_notch(double freq_hz, double fs, double quality = 30.0);

/// Causal single pass with zero initial state.
std::vector<double> apply_filter(const FilterCoefficients& coeffs, std::span<const double> x);

/// Forward-backward filtering with odd-extension padding of 3 * order samples
/// and steady-state initial conditions. Net phase is zero; magnitude response
/// is squared. Throws Errc::insufficient_samples when len(x) <= 3 * order.
std::vector<double> apply_filter_zero_phase(const FilterCoefficients& coeffs, std::span<const double> x);

/// Zero-phase 50 Hz notch. Throws Errc::invalid_rate when fs <= 100.
std::vector<double> notch_50hz(std::span<const double> x, double fs);

/// Anti-alias lowpass (0.4 * to_fs, zero phase) followed by decimation.
/// Output length is floor(len * to_fs / from_fs). Throws
/// Errc::unsupported_ratio when from_fs is not an integer multiple of to_fs.
std::vector<double> downsample(std::span<const double> x, int from_fs, int to_fs);

/// Cutoff of the anti-alias lowpass used by downsample().
constexpr double anti_alias_cutoff(int to_fs) { return 0.4 * to_fs; }

}  // namespace dyadsync
