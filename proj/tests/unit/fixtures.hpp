#pragma once

#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "dyadsync/recording.hpp"
#include "dyadsync/types.hpp"

namespace fixtures {

using dyadsync::Electrode;

/// Epoch on the full montage where channel c, sample i is gen(c, i).
inline dyadsync::Epoch make_epoch(std::size_t trial, int fs, const std::function<double(std::size_t, std::size_t)>& gen,
                                  dyadsync::ClassLabel label = dyadsync::ClassLabel::single(dyadsync::MotorClass::left_hand)) {
  dyadsync::Epoch e;
  e.trial_index = trial;
  e.condition = label;
  e.sample_rate = fs;
  e.channels.assign(dyadsync::kMontage.begin(), dyadsync::kMontage.end());
  const std::size_t n = dyadsync::epoch_samples(fs);
  e.data.assign(e.channels.size(), std::vector<double>(n));
  for (std::size_t c = 0; c < e.channels.size(); ++c)
    for (std::size_t i = 0; i < n; ++i) e.data[c][i] = gen(c, i);
  return e;
}

/// Independent Gaussian noise epochs.
inline std::vector<dyadsync::Epoch> noise_epochs(std::size_t trials, int fs, std::uint64_t seed, double sd = 10.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sd);
  std::vector<dyadsync::Epoch> out;
  for (std::size_t t = 0; t < trials; ++t) out.push_back(make_epoch(t, fs, [&](std::size_t, std::size_t) { return n(rng); }));
  return out;
}

inline dyadsync::Recording make_recording(std::size_t samples, int fs, const std::function<double(std::size_t, std::size_t)>& gen) {
  dyadsync::Recording r;
  r.subject_id = "S";
  r.sample_rate = fs;
  r.channels.assign(dyadsync::kMontage.begin(), dyadsync::kMontage.end());
  r.data.assign(r.channels.size(), std::vector<double>(samples));
  for (std::size_t c = 0; c < r.channels.size(); ++c)
    for (std::size_t i = 0; i < samples; ++i) r.data[c][i] = gen(c, i);
  return r;
}

}  // namespace fixtures
