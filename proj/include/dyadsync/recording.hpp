#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dyadsync/types.hpp"

namespace dyadsync {

using Channels = std::vector<std::vector<double>>;

/// Continuous multi-channel EEG of one subject, amplitudes in microvolts.
struct Recording {
  std::string subject_id;
  std::vector<Electrode> channels;
  int sample_rate = 0;
  Channels data;  // one sequence per channel, all the same length

  std::size_t samples() const { return data.empty() ? 0 : data.front().size(); }
  std::optional<std::size_t> find_channel(Electrode e) const;
  /// Throws Errc::incomplete_montage when `e` is absent.
  std::size_t channel_index(Electrode e) const;
  /// Throws Errc::invalid_argument on a broken invariant.
  void validate() const;
};

/// One 10 s trial slice.
struct Epoch {
  std::size_t trial_index = 0;
  ClassLabel condition = ClassLabel::single(MotorClass::left_hand);
  int sample_rate = 0;
  std::vector<Electrode> channels;
  Channels data;

  std::size_t samples() const { return data.empty() ? 0 : data.front().size(); }
  std::optional<std::size_t> find_channel(Electrode e) const;
  std::size_t channel_index(Electrode e) const;
  std::span<const double> channel(Electrode e) const { return data[channel_index(e)]; }
};

constexpr std::size_t epoch_samples(int fs) { return static_cast<std::size_t>(kTrialSeconds * fs); }

/// Sample range [begin, end) of a state window at `fs`.
struct SampleRange {
  std::size_t begin;
  std::size_t end;
  std::size_t size() const { return end - begin; }
};
SampleRange state_range(BrainState s, int fs);

/// Cuts one epoch per onset. `trial_indices` defaults to 0, 1, 2, ...
/// Throws Errc::truncated_trial when an onset + 10 s runs past the end and
/// Errc::shape_mismatch when the list lengths differ.
std::vector<Epoch> epoch_recording(const Recording& rec, std::span<const std::size_t> trial_onsets,
                                   std::span<const ClassLabel> labels,
                                   std::span<const std::size_t> trial_indices = {});

struct StateSplit {
  Channels rest;
  Channels task;
};

/// Rest = [0, 4) s, task = [5, 10) s; the samples in between are dropped.
StateSplit split_states(const Epoch& e);

/// Copy of one state window, all channels.
Channels slice_state(const Epoch& e, BrainState s);

struct ArtifactResult {
  std::vector<Epoch> kept;
  std::vector<std::size_t> dropped;  // trial indices
};

inline constexpr double kDefaultAmplitudeLimitUv = 100.0;

/// Drops an epoch iff any channel's peak |amplitude| exceeds `amp_limit`.
/// Throws Errc::invalid_argument when amp_limit <= 0.
ArtifactResult artifact_reject(std::vector<Epoch> epochs, double amp_limit = kDefaultAmplitudeLimitUv);

inline constexpr int kAnalysisRate = 250;

/// Notch (when fs > 100) and downsample every channel to `target_fs`.
Recording prepare_recording(const Recording& rec, int target_fs = kAnalysisRate);

/// Maps onsets at `from_fs` onto a recording downsampled to `to_fs`.
std::vector<std::size_t> rescale_onsets(std::span<const std::size_t> onsets, int from_fs, int to_fs);

}  // namespace dyadsync
