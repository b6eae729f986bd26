#include "dyadsync/schedule.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

#include "dyadsync/error.hpp"

namespace dyadsync {

namespace {

void validate(const std::vector<PhaseSpec>& phases) {
  std::set<int> seen;
  for (const auto& p : phases) {
    if (p.phase_id < 1 || p.phase_id > 3) throw Error(Errc::invalid_argument, fmt::format("unknown phase {}", p.phase_id));
    if (!seen.insert(p.phase_id).second) throw Error(Errc::invalid_argument, fmt::format("phase {} repeated", p.phase_id));
    const PhaseMode expected = p.phase_id == 2 ? PhaseMode::cooperative : PhaseMode::single;
    if (p.mode != expected) throw Error(Errc::invalid_argument, fmt::format("phase {} has the wrong mode", p.phase_id));
    if (p.blocks <= 0 || p.trials_per_block <= 0) {
      throw Error(Errc::invalid_argument, fmt::format("phase {} needs positive block sizes", p.phase_id));
    }
  }
}

std::size_t first_index(const std::vector<PhaseSpec>& phases, int phase_id) {
  std::size_t start = 0;
  for (const auto& p : phases) {
    if (p.phase_id == phase_id) return start;
    start += static_cast<std::size_t>(p.trial_count());
  }
  throw Error(Errc::invalid_argument, fmt::format("phase {} not in schedule", phase_id));
}

}  // namespace

std::vector<PhaseSpec> default_phases(int blocks, int trials_per_block) {
  return {{1, PhaseMode::single, blocks, trials_per_block},
          {2, PhaseMode::cooperative, blocks, trials_per_block},
          {3, PhaseMode::single, blocks, trials_per_block}};
}

std::uint64_t phase_seed(std::uint64_t seed, int phase_id) {
  return seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(phase_id);
}

SessionPlan phase_plan(const std::vector<PhaseSpec>& phases, int phase_id, std::uint64_t seed) {
  validate(phases);
  const auto it = std::find_if(phases.begin(), phases.end(), [&](const PhaseSpec& p) { return p.phase_id == phase_id; });
  if (it == phases.end()) throw Error(Errc::invalid_argument, fmt::format("phase {} not in schedule", phase_id));
  return make_plan(it->mode, phase_seed(seed, phase_id), it->blocks, it->trials_per_block,
                   first_index(phases, phase_id));
}

TrialSchedule schedule_session(std::uint64_t seed, const std::vector<PhaseSpec>& phases) {
  validate(phases);
  TrialSchedule s;
  s.phases = phases;
  s.seed = seed;
  for (const auto& p : phases) {
    const auto plan = phase_plan(phases, p.phase_id, seed);
    for (std::size_t i = 0; i < plan.cues.size(); ++i) {
      s.trials.push_back({plan.first_trial_index + i, p.phase_id,
                          static_cast<int>(i / static_cast<std::size_t>(p.trials_per_block)), plan.cues[i]});
    }
  }
  return s;
}

std::vector<ScheduledTrial> TrialSchedule::phase_trials(int phase) const {
  std::vector<ScheduledTrial> out;
  for (const auto& t : trials)
    if (t.phase == phase) out.push_back(t);
  return out;
}

TrialSchedule TrialSchedule::select(const std::vector<int>& phase_ids, int max_blocks) const {
  TrialSchedule out = *this;
  out.phases.clear();
  out.trials.clear();
  for (const auto& p : phases) {
    if (std::find(phase_ids.begin(), phase_ids.end(), p.phase_id) == phase_ids.end()) continue;
    PhaseSpec kept = p;
    kept.blocks = std::min(p.blocks, max_blocks);
    out.phases.push_back(kept);
  }
  for (const auto& t : trials) {
    const auto it = std::find_if(out.phases.begin(), out.phases.end(),
                                 [&](const PhaseSpec& p) { return p.phase_id == t.phase; });
    if (it != out.phases.end() && t.block < it->blocks) out.trials.push_back(t);
  }
  return out;
}

const ScheduledTrial* TrialSchedule::find(std::size_t trial_index) const {
  for (const auto& t : trials)
    if (t.trial_index == trial_index) return &t;
  return nullptr;
}

double TrialSchedule::duration_s() const {
  int blocks = 0;
  for (const auto& p : phases) blocks += p.blocks;
  return static_cast<double>(trials.size()) * timing.total_s() +
         static_cast<double>(std::max(blocks - 1, 0)) * inter_block_rest_s;
}

}  // namespace dyadsync
