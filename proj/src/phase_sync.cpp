#include "dyadsync/phase_sync.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

#include "dyadsync/error.hpp"
#include "dyadsync/fft.hpp"
#include "dyadsync/filter.hpp"

namespace dyadsync {

using cplx = std::complex<double>;

std::vector<cplx> analytic_signal(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 8) throw Error(Errc::insufficient_samples, fmt::format("analytic signal needs >= 8 samples, got {}", n));
  std::vector<cplx> buf(x.begin(), x.end());
  auto spec = fft(buf);
  // h = 1 at DC (and Nyquist for even n), 2 for positive, 0 for negative frequencies.
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < n; ++k) {
    if (k < (n + 1) / 2) {
      spec[k] *= 2.0;
    } else if (!(n % 2 == 0 && k == half)) {
      spec[k] = 0.0;
    }
  }
  auto out = ifft(spec);
  // The real part is the input by construction; restore it exactly.
  for (std::size_t i = 0; i < n; ++i) out[i].real(x[i]);
  return out;
}

std::vector<double> instantaneous_phase(std::span<const cplx> a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const cplx z = a[i];
    if (std::abs(z) < std::numeric_limits<double>::min()) {
      out[i] = kDegeneratePhase;
      continue;
    }
    double phi = std::arg(z);
    if (phi == -std::numbers::pi) phi = std::numbers::pi;
    out[i] = phi;
  }
  return out;
}

namespace {

void check_shapes(const PhaseSeries& phx, const PhaseSeries& phy) {
  if (phx.trial_count() != phy.trial_count()) {
    throw Error(Errc::shape_mismatch,
                fmt::format("trial counts differ ({} vs {})", phx.trial_count(), phy.trial_count()));
  }
  if (phx.trial_count() == 0) throw Error(Errc::shape_mismatch, "PLV needs at least one trial");
  for (std::size_t n = 0; n < phx.trial_count(); ++n) {
    if (phx.trials[n].size() != phx.length() || phy.trials[n].size() != phx.length()) {
      throw Error(Errc::shape_mismatch, "phase series differ in length");
    }
  }
}

/// Unit phasors of the phase difference, trial-major; NaN phasor where degenerate.
std::vector<std::vector<cplx>> difference_phasors(const PhaseSeries& phx, const PhaseSeries& phy) {
  std::vector<std::vector<cplx>> out(phx.trial_count(), std::vector<cplx>(phx.length()));
  for (std::size_t n = 0; n < phx.trial_count(); ++n) {
    for (std::size_t t = 0; t < phx.length(); ++t) {
      const double d = phx.trials[n][t] - phy.trials[n][t];
      out[n][t] = std::isnan(d) ? cplx(kDegeneratePhase, 0.0) : std::polar(1.0, d);
    }
  }
  return out;
}

struct WindowGrid {
  std::size_t len;
  std::size_t step;
  std::size_t count;
};

WindowGrid make_grid(std::size_t samples, double fs, double window_s, double step_s) {
  if (!(window_s > 0.0) || !(step_s > 0.0)) {
    throw Error(Errc::invalid_argument, "window and step must be positive");
  }
  const auto len = static_cast<std::size_t>(std::lround(window_s * fs));
  const auto step = static_cast<std::size_t>(std::lround(step_s * fs));
  if (len == 0 || step == 0) throw Error(Errc::invalid_argument, "window or step shorter than one sample");
  if (len > samples) {
    throw Error(Errc::empty_result,
                fmt::format("window of {} samples is longer than the {}-sample series", len, samples));
  }
  return {len, step, (samples - len) / step + 1};
}

/// Mean of the per-sample values of each window, skipping NaN; then the mean over windows.
double windowed_mean(std::span<const double> per_sample, const WindowGrid& g) {
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t w = 0; w < g.count; ++w) {
    double s = 0.0;
    std::size_t k = 0;
    for (std::size_t t = w * g.step; t < w * g.step + g.len; ++t) {
      if (!std::isnan(per_sample[t])) {
        s += per_sample[t];
        ++k;
      }
    }
    if (k > 0) {
      total += s / static_cast<double>(k);
      ++used;
    }
  }
  return used > 0 ? total / static_cast<double>(used) : kDegeneratePhase;
}

}  // namespace

double plv_across_trials(const PhaseSeries& phx, const PhaseSeries& phy, std::size_t t) {
  check_shapes(phx, phy);
  if (t >= phx.length()) throw Error(Errc::shape_mismatch, fmt::format("sample {} out of range", t));
  cplx sum{0.0, 0.0};
  for (std::size_t n = 0; n < phx.trial_count(); ++n) {
    const double d = phx.trials[n][t] - phy.trials[n][t];
    if (std::isnan(d)) return kDegeneratePhase;
    sum += std::polar(1.0, d);
  }
  return std::min(1.0, std::abs(sum) / static_cast<double>(phx.trial_count()));
}

std::vector<double> plv_per_sample(const PhaseSeries& phx, const PhaseSeries& phy) {
  check_shapes(phx, phy);
  const auto phasors = difference_phasors(phx, phy);
  const double inv_n = 1.0 / static_cast<double>(phx.trial_count());
  std::vector<double> out(phx.length());
  for (std::size_t t = 0; t < out.size(); ++t) {
    cplx sum{0.0, 0.0};
    for (const auto& trial : phasors) sum += trial[t];
    out[t] = std::isnan(sum.real()) ? kDegeneratePhase : std::min(1.0, std::abs(sum) * inv_n);
  }
  return out;
}

double PlvSeries::mean() const {
  double s = 0.0;
  std::size_t k = 0;
  for (double v : values) {
    if (!std::isnan(v)) {
      s += v;
      ++k;
    }
  }
  return k > 0 ? s / static_cast<double>(k) : kDegeneratePhase;
}

PlvSeries windowed_plv(const PhaseSeries& phx, const PhaseSeries& phy, double window_s, double step_s,
                       double start_time_s) {
  check_shapes(phx, phy);
  const auto g = make_grid(phx.length(), phx.sample_rate, window_s, step_s);
  const auto per_sample = plv_per_sample(phx, phy);
  PlvSeries out;
  out.values.reserve(g.count);
  out.window_centers.reserve(g.count);
  for (std::size_t w = 0; w < g.count; ++w) {
    const std::size_t begin = w * g.step;
    double s = 0.0;
    std::size_t k = 0;
    for (std::size_t t = begin; t < begin + g.len; ++t) {
      if (!std::isnan(per_sample[t])) {
        s += per_sample[t];
        ++k;
      }
    }
    out.values.push_back(k > 0 ? s / static_cast<double>(k) : kDegeneratePhase);
    out.window_centers.push_back(start_time_s + (static_cast<double>(begin) + 0.5 * static_cast<double>(g.len)) /
                                                    phx.sample_rate);
  }
  return out;
}

std::vector<double> trialwise_plv(const PhaseSeries& phx, const PhaseSeries& phy, double window_s, double step_s) {
  check_shapes(phx, phy);
  const std::size_t n_trials = phx.trial_count();
  if (n_trials < 2) throw Error(Errc::sample_size, "per-trial PLV samples need at least 2 trials");
  const auto g = make_grid(phx.length(), phx.sample_rate, window_s, step_s);
  const auto phasors = difference_phasors(phx, phy);
  const std::size_t len = phx.length();

  std::vector<cplx> total(len, cplx{0.0, 0.0});
  for (const auto& trial : phasors) {
    for (std::size_t t = 0; t < len; ++t) total[t] += trial[t];
  }
  const double n = static_cast<double>(n_trials);
  std::vector<double> full(len);
  for (std::size_t t = 0; t < len; ++t) full[t] = std::isnan(total[t].real()) ? kDegeneratePhase : std::abs(total[t]) / n;
  const double full_mean = windowed_mean(full, g);

  std::vector<double> pseudo(n_trials);
  std::vector<double> loo(len);
  for (std::size_t k = 0; k < n_trials; ++k) {
    for (std::size_t t = 0; t < len; ++t) {
      const cplx s = total[t] - phasors[k][t];
      loo[t] = std::isnan(s.real()) ? kDegeneratePhase : std::abs(s) / (n - 1.0);
    }
    pseudo[k] = n * full_mean - (n - 1.0) * windowed_mean(loo, g);
  }
  return pseudo;
}

PhaseSeries band_phases(std::span<const Epoch> epochs, Electrode channel, const FrequencyBand& band, BrainState state) {
  PhaseSeries out;
  if (epochs.empty()) return out;
  const int fs = epochs.front().sample_rate;
  out.sample_rate = fs;
  const auto coeffs = design_bandpass(band, fs);
  const auto range = state_range(state, fs);
  out.trials.reserve(epochs.size());
  for (const auto& e : epochs) {
    if (e.sample_rate != fs) throw Error(Errc::shape_mismatch, "epochs differ in sample rate");
    if (e.samples() < range.end) {
      throw Error(Errc::truncated_trial, fmt::format("trial {} is shorter than the state window", e.trial_index));
    }
    const auto filtered = apply_filter_zero_phase(coeffs, e.channel(channel));
    const auto phase = instantaneous_phase(analytic_signal(filtered));
    out.trials.emplace_back(phase.begin() + static_cast<std::ptrdiff_t>(range.begin),
                            phase.begin() + static_cast<std::ptrdiff_t>(range.end));
  }
  return out;
}

std::vector<PhaseSeries> montage_phases(std::span<const Epoch> epochs, const FrequencyBand& band, BrainState state) {
  std::vector<PhaseSeries> out;
  out.reserve(kMontage.size());
  for (Electrode e : kMontage) out.push_back(band_phases(epochs, e, band, state));
  return out;
}

IbsMatrix ibs_from_phases(std::span<const PhaseSeries> phases_a, std::span<const PhaseSeries> phases_b,
                          const FrequencyBand& band, BrainState state, const PlvOptions& opts) {
  if (phases_a.size() != kMontage.size() || phases_b.size() != kMontage.size()) {
    throw Error(Errc::incomplete_montage, "inter-brain matrix needs phases for all 8 electrodes of both subjects");
  }
  IbsMatrix m;
  m.band = band;
  m.state = state;
  m.trial_count = phases_a.front().trial_count();
  const double offset = window_of(state).start_s;
  for (std::size_t i = 0; i < kMontage.size(); ++i) {
    for (std::size_t j = 0; j < kMontage.size(); ++j) {
      auto series = windowed_plv(phases_a[i], phases_b[j], opts.window_s, opts.step_s, offset);
      m.entries.push_back(series.mean());
      m.series.push_back(std::move(series));
    }
  }
  return m;
}

void check_aligned(std::span<const Epoch> a, std::span<const Epoch> b) {
  if (a.size() != b.size()) {
    throw Error(Errc::alignment, fmt::format("subjects have {} and {} trials", a.size(), b.size()));
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].trial_index != b[i].trial_index) {
      throw Error(Errc::alignment, fmt::format("trial {} of subject A is paired with trial {} of subject B",
                                               a[i].trial_index, b[i].trial_index));
    }
  }
}

IbsMatrix ibs_matrix(std::span<const Epoch> epochs_a, std::span<const Epoch> epochs_b, const FrequencyBand& band,
                     BrainState state, const PlvOptions& opts) {
  check_aligned(epochs_a, epochs_b);
  if (epochs_a.empty()) throw Error(Errc::alignment, "no trials to compare");
  const auto pa = montage_phases(epochs_a, band, state);
  const auto pb = montage_phases(epochs_b, band, state);
  return ibs_from_phases(pa, pb, band, state, opts);
}

TestResult state_contrast(std::span<const double> task, std::span<const double> rest) {
  return paired_t_test(task, rest);
}

}  // namespace dyadsync
