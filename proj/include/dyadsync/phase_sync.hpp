#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "dyadsync/recording.hpp"
#include "dyadsync/stats.hpp"
#include "dyadsync/types.hpp"

namespace dyadsync {

/// Discrete analytic signal x + j*H{x}, built by zeroing negative frequencies.
/// Throws Errc::insufficient_samples when len(x) < 8.
std::vector<std::complex<double>> analytic_signal(std::span<const double> x);

/// Marker stored in place of a phase where the analytic signal vanishes.
inline constexpr double kDegeneratePhase = std::numeric_limits<double>::quiet_NaN();

inline bool is_degenerate_phase(double phi) { return phi != phi; }

/// Principal angle in (-pi, pi]; zero-modulus samples become kDegeneratePhase.
std::vector<double> instantaneous_phase(std::span<const std::complex<double>> a);

/// Phases of one channel over many trials (trial-major).
struct PhaseSeries {
  std::vector<std::vector<double>> trials;
  double sample_rate = 0.0;

  std::size_t trial_count() const { return trials.size(); }
  std::size_t length() const { return trials.empty() ? 0 : trials.front().size(); }
};

/// (1/N) |sum_n exp(j(phx_n(t) - phy_n(t)))|. Returns kDegeneratePhase (NaN)
/// when any trial is degenerate at t. Throws Errc::shape_mismatch on unequal
/// trial counts or lengths.
double plv_across_trials(const PhaseSeries& phx, const PhaseSeries& phy, std::size_t t);

/// Per-sample PLV for every t (NaN where degenerate).
std::vector<double> plv_per_sample(const PhaseSeries& phx, const PhaseSeries& phy);

struct PlvSeries {
  std::vector<double> window_centers;  // seconds
  std::vector<double> values;          // NaN for windows with no usable sample

  /// Mean over windows, ignoring NaN entries.
  double mean() const;
};

inline constexpr double kDefaultWindowSeconds = 0.1;

/// Per-sample PLV averaged inside tiled windows; a trailing partial window is
/// dropped. `start_time_s` offsets the reported window centers. Throws
/// Errc::empty_result when the window is longer than the series.
PlvSeries windowed_plv(const PhaseSeries& phx, const PhaseSeries& phy, double window_s = kDefaultWindowSeconds,
                       double step_s = kDefaultWindowSeconds, double start_time_s = 0.0);

/// Jackknife pseudo-values of the mean windowed PLV, one per trial. Their
/// mean is the bias-corrected estimate and their spread carries the
/// across-trial variability, so they serve as paired per-trial samples.
std::vector<double> trialwise_plv(const PhaseSeries& phx, const PhaseSeries& phy,
                                  double window_s = kDefaultWindowSeconds, double step_s = kDefaultWindowSeconds);

/// Band-filter each trial's channel over the whole epoch, take the analytic
/// phase, then keep only the state window.
PhaseSeries band_phases(std::span<const Epoch> epochs, Electrode channel, const FrequencyBand& band, BrainState state);

/// 8 x 8 inter-brain PLV matrix, rows = subject A electrodes, columns = subject B.
struct IbsMatrix {
  FrequencyBand band = FrequencyBand::named(BandName::alpha);
  BrainState state = BrainState::task;
  std::size_t trial_count = 0;
  std::vector<double> entries;     // row-major, kMontage order
  std::vector<PlvSeries> series;   // same layout as entries

  double at(Electrode a, Electrode b) const { return entries[montage_index(a) * kMontage.size() + montage_index(b)]; }
  const PlvSeries& series_at(Electrode a, Electrode b) const {
    return series[montage_index(a) * kMontage.size() + montage_index(b)];
  }
};

struct PlvOptions {
  double window_s = kDefaultWindowSeconds;
  double step_s = kDefaultWindowSeconds;
};

/// Phases of all montage channels for one subject (kMontage order).
std::vector<PhaseSeries> montage_phases(std::span<const Epoch> epochs, const FrequencyBand& band, BrainState state);

/// Inter-brain matrix from precomputed phases.
IbsMatrix ibs_from_phases(std::span<const PhaseSeries> phases_a, std::span<const PhaseSeries> phases_b,
                          const FrequencyBand& band, BrainState state, const PlvOptions& opts = {});

/// Throws Errc::alignment when the two subjects' trial indices differ.
IbsMatrix ibs_matrix(std::span<const Epoch> epochs_a, std::span<const Epoch> epochs_b, const FrequencyBand& band,
                     BrainState state, const PlvOptions& opts = {});

/// Paired t-test of task vs rest per-trial PLV samples.
TestResult state_contrast(std::span<const double> task, std::span<const double> rest);

/// Throws Errc::alignment unless both epoch lists carry the same trial indices in order.
void check_aligned(std::span<const Epoch> a, std::span<const Epoch> b);

}  // namespace dyadsync
