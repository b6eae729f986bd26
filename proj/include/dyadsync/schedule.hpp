#pragma once

#include <cstdint>
#include <vector>

#include "dyadsync/synth.hpp"

namespace dyadsync {

struct PhaseSpec {
  int phase_id = 1;  // 1, 2 or 3
  PhaseMode mode = PhaseMode::single;
  int blocks = 3;
  int trials_per_block = 20;

  int trial_count() const { return blocks * trials_per_block; }
};

struct ScheduledTrial {
  std::size_t trial_index = 0;  // global across the session
  int phase = 1;
  int block = 0;  // within the phase
  DyadCue cue;
};

struct TrialSchedule {
  std::vector<PhaseSpec> phases;
  TrialTiming timing;
  double inter_block_rest_s = 180.0;
  std::uint64_t seed = 0;
  std::vector<ScheduledTrial> trials;

  std::size_t trial_count() const { return trials.size(); }
  std::vector<ScheduledTrial> phase_trials(int phase) const;
  /// Keep only `phase_ids`, and within each phase only the first `max_blocks` blocks.
  TrialSchedule select(const std::vector<int>& phase_ids, int max_blocks) const;
  const ScheduledTrial* find(std::size_t trial_index) const;
  /// Trial time plus the rests between consecutive blocks.
  double duration_s() const;
};

/// Phase 2 cooperative between two single phases. Phase p holds global trial
/// indices [(p - 1) * blocks * trials_per_block, p * blocks * trials_per_block).
std::vector<PhaseSpec> default_phases(int blocks = 3, int trials_per_block = 20);

/// Seed used for phase `phase_id` of a session seeded with `seed`.
std::uint64_t phase_seed(std::uint64_t seed, int phase_id);

/// The synth plan whose cues and trial indices match phase `spec` of a
/// session schedule built from `seed` with the same phase list.
SessionPlan phase_plan(const std::vector<PhaseSpec>& phases, int phase_id, std::uint64_t seed);

/// Throws Errc::invalid_argument on an unknown or repeated phase id, a phase 2
/// that is not cooperative, or phases 1/3 that are not single.
TrialSchedule schedule_session(std::uint64_t seed, const std::vector<PhaseSpec>& phases = default_phases());

}  // namespace dyadsync
