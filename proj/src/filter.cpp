#include "dyadsync/filter.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dyadsync/error.hpp"

namespace dyadsync {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

/// Analog Butterworth prototype poles with unit cutoff (left half plane).
std::vector<cplx> butterworth_prototype(int order) {
  std::vector<cplx> poles;
  poles.reserve(order);
  for (int k = 0; k < order; ++k) {
    const double theta = kPi * (2.0 * k + order + 1) / (2.0 * order);
    poles.push_back(std::polar(1.0, theta));
  }
  return poles;
}

cplx bilinear(cplx s, double fs) { return (2.0 * fs + s) / (2.0 * fs - s); }

double prewarp(double freq_hz, double fs) { return 2.0 * fs * std::tan(kPi * freq_hz / fs); }

/// Group digital poles into conjugate pairs (or pairs of real poles) and
/// build denominators. Numerators are filled in by the caller.
std::vector<Biquad> pole_sections(std::vector<cplx> poles) {
  std::vector<Biquad> out;
  std::vector<double> reals;
  constexpr double kImagTol = 1e-12;
  for (const auto& p : poles) {
    if (p.imag() > kImagTol) {
      out.push_back({0, 0, 0, -2.0 * p.real(), std::norm(p)});
    } else if (std::abs(p.imag()) <= kImagTol) {
      reals.push_back(p.real());
    }
  }
  std::sort(reals.begin(), reals.end());
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2) {
    out.push_back({0, 0, 0, -(reals[i] + reals[i + 1]), reals[i] * reals[i + 1]});
  }
  if (reals.size() % 2 == 1) out.push_back({0, 0, 0, -reals.back(), 0.0});
  return out;
}

void scale_gain(FilterCoefficients& f, double freq_hz, double fs) {
  const double gain = std::abs(f.response(freq_hz, fs));
  const double per_section = std::pow(gain, 1.0 / static_cast<double>(f.sections.size()));
  for (auto& s : f.sections) {
    s.b0 /= per_section;
    s.b1 /= per_section;
    s.b2 /= per_section;
  }
}

/// Steady-state state vector of one section for a unit step input.
std::pair<double, double> step_state(const Biquad& s) {
  const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
  return {dc - s.b0, s.b2 - s.a2 * dc};
}

double dc_gain(const Biquad& s) { return (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2); }

/// In-place cascade with initial states scaled by x0 (sosfilt_zi convention).
void run_cascade(const FilterCoefficients& f, std::vector<double>& x, bool steady_state_init) {
  double scale = 1.0;
  const double x0 = x.empty() ? 0.0 : x.front();
  for (const auto& s : f.sections) {
    double z1 = 0.0;
    double z2 = 0.0;
    if (steady_state_init) {
      const auto [u1, u2] = step_state(s);
      z1 = u1 * scale * x0;
      z2 = u2 * scale * x0;
      scale *= dc_gain(s);
    }
    for (double& v : x) {
      const double in = v;
      const double y = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * y + z2;
      z2 = s.b2 * in - s.a2 * y;
      v = y;
    }
  }
}

}  // namespace

std::complex<double> FilterCoefficients::response(double freq_hz, double fs) const {
  const cplx zinv = std::polar(1.0, -2.0 * kPi * freq_hz / fs);
  cplx h{1.0, 0.0};
  for (const auto& s : sections) {
    const cplx num = s.b0 + s.b1 * zinv + s.b2 * zinv * zinv;
    const cplx den = 1.0 + s.a1 * zinv + s.a2 * zinv * zinv;
    h *= num / den;
  }
  return h;
}

bool FilterCoefficients::is_stable() const {
  for (const auto& s : sections) {
    // Roots of z^2 + a1 z + a2.
    const cplx disc = std::sqrt(cplx(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    const cplx r1 = (-s.a1 + disc) / 2.0;
    const cplx r2 = (-s.a1 - disc) / 2.0;
    if (std::abs(r1) >= 1.0 || std::abs(r2) >= 1.0) return false;
  }
  return true;
}

FilterCoefficients design_bandpass(const FrequencyBand& band, double fs, int prototype_order) {
  if (fs <= 0.0) throw Error(Errc::invalid_rate, "sample rate must be positive");
  if (band.high() >= fs / 2.0) {
    throw Error(Errc::invalid_band, fmt::format("band {} upper edge {} Hz is at or above Nyquist {} Hz",
                                                to_string(band.name()), band.high(), fs / 2.0));
  }
  if (prototype_order < 1) throw Error(Errc::invalid_argument, "filter order must be positive");

  const double wl = prewarp(band.low(), fs);
  const double wh = prewarp(band.high(), fs);
  const double bw = wh - wl;
  const double w0sq = wl * wh;

  std::vector<cplx> digital;
  for (const auto& p : butterworth_prototype(prototype_order)) {
    // s^2 - p*bw*s + w0^2 = 0
    const cplx pb = p * bw;
    const cplx root = std::sqrt(pb * pb - 4.0 * w0sq);
    digital.push_back(bilinear((pb + root) / 2.0, fs));
    digital.push_back(bilinear((pb - root) / 2.0, fs));
  }

  FilterCoefficients f;
  f.sections = pole_sections(std::move(digital));
  // Zeros: one at z = +1 and one at z = -1 per section.
  for (auto& s : f.sections) {
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
  }
  const double center = fs / kPi * std::atan(std::sqrt(w0sq) / (2.0 * fs));
  scale_gain(f, center, fs);
  return f;
}

FilterCoefficients design_lowpass(double cutoff_hz, double fs, int order) {
  if (fs <= 0.0) throw Error(Errc::invalid_rate, "sample rate must be positive");
  if (cutoff_hz <= 0.0 || cutoff_hz >= fs / 2.0) {
    throw Error(Errc::invalid_band, fmt::format("lowpass cutoff {} Hz outside (0, {}) Hz", cutoff_hz, fs / 2.0));
  }
  if (order < 1) throw Error(Errc::invalid_argument, "filter order must be positive");
  const double wc = prewarp(cutoff_hz, fs);
  std::vector<cplx> digital;
  for (const auto& p : butterworth_prototype(order)) digital.push_back(bilinear(p * wc, fs));

  FilterCoefficients f;
  f.sections = pole_sections(std::move(digital));
  for (auto& s : f.sections) {
    if (s.a2 == 0.0) {  // first-order section
      s.b0 = 1.0;
      s.b1 = 1.0;
      s.b2 = 0.0;
    } else {
      s.b0 = 1.0;
      s.b1 = 2.0;
      s.b2 = 1.0;
    }
  }
  scale_gain(f, 0.0, fs);
  return f;
}

FilterCoefficients design_notch(double freq_hz, double fs, double quality) {
  if (freq_hz <= 0.0 || freq_hz >= fs / 2.0) {
    throw Error(Errc::invalid_rate, fmt::format("notch at {} Hz needs fs > {} Hz", freq_hz, 2.0 * freq_hz));
  }
  const double w0 = 2.0 * kPi * freq_hz / fs;
  const double bw = w0 / quality;
  const double g = 1.0 / (1.0 + std::tan(bw / 2.0));
  const double c = std::cos(w0);
  FilterCoefficients f;
  f.sections.push_back({g, -2.0 * g * c, g, -2.0 * g * c, 2.0 * g - 1.0});
  return f;
}

std::vector<double> apply_filter(const FilterCoefficients& coeffs, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  run_cascade(coeffs, y, false);
  return y;
}

std::vector<double> apply_filter_zero_phase(const FilterCoefficients& coeffs, std::span<const double> x) {
  const std::size_t pad = 3 * static_cast<std::size_t>(coeffs.order());
  const std::size_t n = x.size();
  if (n <= pad) {
    throw Error(Errc::insufficient_samples,
                fmt::format("zero-phase filtering of order {} needs more than {} samples, got {}", coeffs.order(),
                            pad, n));
  }
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  run_cascade(coeffs, ext, true);
  std::reverse(ext.begin(), ext.end());
  run_cascade(coeffs, ext, true);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

std::vector<double> notch_50hz(std::span<const double> x, double fs) {
  if (fs <= 100.0) throw Error(Errc::invalid_rate, fmt::format("50 Hz notch needs fs > 100 Hz, got {}", fs));
  return apply_filter_zero_phase(design_notch(50.0, fs), x);
}

std::vector<double> downsample(std::span<const double> x, int from_fs, int to_fs) {
  if (from_fs <= 0 || to_fs <= 0) throw Error(Errc::invalid_rate, "sample rates must be positive");
  if (from_fs % to_fs != 0) {
    throw Error(Errc::unsupported_ratio, fmt::format("cannot decimate {} Hz to {} Hz by an integer factor",
                                                     from_fs, to_fs));
  }
  const int factor = from_fs / to_fs;
  if (factor == 1) return {x.begin(), x.end()};
  const auto smooth = apply_filter_zero_phase(design_lowpass(anti_alias_cutoff(to_fs), from_fs), x);
  const std::size_t out_len = x.size() / static_cast<std::size_t>(factor);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = smooth[i * static_cast<std::size_t>(factor)];
  return out;
}

}  // namespace dyadsync
