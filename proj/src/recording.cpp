#include "dyadsync/recording.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dyadsync/error.hpp"
#include "dyadsync/filter.hpp"

namespace dyadsync {

namespace {
std::optional<std::size_t> index_of(const std::vector<Electrode>& channels, Electrode e) {
  const auto it = std::find(channels.begin(), channels.end(), e);
  if (it == channels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - channels.begin());
}
}  // namespace

std::optional<std::size_t> Recording::find_channel(Electrode e) const { return index_of(channels, e); }

std::size_t Recording::channel_index(Electrode e) const {
  if (auto i = find_channel(e)) return *i;
  throw Error(Errc::incomplete_montage, fmt::format("recording {} has no channel {}", subject_id, to_string(e)));
}

void Recording::validate() const {
  if (sample_rate <= 0) throw Error(Errc::invalid_argument, "sample rate must be positive");
  if (channels.size() != data.size()) {
    throw Error(Errc::invalid_argument,
                fmt::format("{} channel labels but {} data sequences", channels.size(), data.size()));
  }
  std::set<Electrode> seen(channels.begin(), channels.end());
  if (seen.size() != channels.size()) throw Error(Errc::invalid_argument, "duplicate channel labels");
  for (const auto& ch : data) {
    if (ch.size() != samples()) throw Error(Errc::invalid_argument, "channels differ in length");
  }
}

std::optional<std::size_t> Epoch::find_channel(Electrode e) const { return index_of(channels, e); }

std::size_t Epoch::channel_index(Electrode e) const {
  if (auto i = find_channel(e)) return *i;
  throw Error(Errc::incomplete_montage, fmt::format("trial {} has no channel {}", trial_index, to_string(e)));
}

SampleRange state_range(BrainState s, int fs) {
  const auto w = window_of(s);
  return {static_cast<std::size_t>(std::lround(w.start_s * fs)), static_cast<std::size_t>(std::lround(w.end_s * fs))};
}

std::vector<Epoch> epoch_recording(const Recording& rec, std::span<const std::size_t> trial_onsets,
                                   std::span<const ClassLabel> labels, std::span<const std::size_t> trial_indices) {
  rec.validate();
  if (trial_onsets.size() != labels.size()) {
    throw Error(Errc::shape_mismatch,
                fmt::format("{} onsets but {} labels", trial_onsets.size(), labels.size()));
  }
  if (!trial_indices.empty() && trial_indices.size() != trial_onsets.size()) {
    throw Error(Errc::shape_mismatch,
                fmt::format("{} onsets but {} trial indices", trial_onsets.size(), trial_indices.size()));
  }
  const std::size_t len = epoch_samples(rec.sample_rate);
  std::vector<Epoch> out;
  out.reserve(trial_onsets.size());
  for (std::size_t i = 0; i < trial_onsets.size(); ++i) {
    const std::size_t onset = trial_onsets[i];
    if (onset + len > rec.samples()) {
      throw Error(Errc::truncated_trial, fmt::format("trial at sample {} needs {} samples, recording has {}", onset,
                                                     len, rec.samples()));
    }
    Epoch e;
    e.trial_index = trial_indices.empty() ? i : trial_indices[i];
    e.condition = labels[i];
    e.sample_rate = rec.sample_rate;
    e.channels = rec.channels;
    e.data.reserve(rec.data.size());
    for (const auto& ch : rec.data) {
      e.data.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(onset),
                          ch.begin() + static_cast<std::ptrdiff_t>(onset + len));
    }
    out.push_back(std::move(e));
  }
  return out;
}

Channels slice_state(const Epoch& e, BrainState s) {
  const auto r = state_range(s, e.sample_rate);
  if (r.end > e.samples()) {
    throw Error(Errc::truncated_trial, fmt::format("trial {} holds {} samples, state window needs {}",
                                                   e.trial_index, e.samples(), r.end));
  }
  Channels out;
  out.reserve(e.data.size());
  for (const auto& ch : e.data) {
    out.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(r.begin), ch.begin() + static_cast<std::ptrdiff_t>(r.end));
  }
  return out;
}

StateSplit split_states(const Epoch& e) { return {slice_state(e, BrainState::rest), slice_state(e, BrainState::task)}; }

ArtifactResult artifact_reject(std::vector<Epoch> epochs, double amp_limit) {
  if (!(amp_limit > 0.0)) {
    throw Error(Errc::invalid_argument, fmt::format("amplitude limit must be positive, got {}", amp_limit));
  }
  ArtifactResult r;
  for (auto& e : epochs) {
    bool bad = false;
    for (const auto& ch : e.data) {
      for (double v : ch) {
        if (std::abs(v) > amp_limit) {
          bad = true;
          break;
        }
      }
      if (bad) break;
    }
    if (bad) {
      r.dropped.push_back(e.trial_index);
    } else {
      r.kept.push_back(std::move(e));
    }
  }
  return r;
}

Recording prepare_recording(const Recording& rec, int target_fs) {
  rec.validate();
  Recording out;
  out.subject_id = rec.subject_id;
  out.channels = rec.channels;
  out.sample_rate = target_fs;
  for (const auto& ch : rec.data) {
    if (rec.sample_rate > 100) {
      out.data.push_back(downsample(notch_50hz(ch, rec.sample_rate), rec.sample_rate, target_fs));
    } else {
      out.data.push_back(downsample(ch, rec.sample_rate, target_fs));
    }
  }
  return out;
}

std::vector<std::size_t> rescale_onsets(std::span<const std::size_t> onsets, int from_fs, int to_fs) {
  if (from_fs <= 0 || to_fs <= 0 || from_fs % to_fs != 0) {
    throw Error(Errc::unsupported_ratio, fmt::format("cannot map onsets from {} Hz to {} Hz", from_fs, to_fs));
  }
  const std::size_t factor = static_cast<std::size_t>(from_fs / to_fs);
  std::vector<std::size_t> out;
  out.reserve(onsets.size());
  for (auto o : onsets) {
    if (o % factor != 0) {
      throw Error(Errc::unsupported_ratio, fmt::format("onset {} is not on the {} Hz sample grid", o, to_fs));
    }
    out.push_back(o / factor);
  }
  return out;
}

}  // namespace dyadsync
