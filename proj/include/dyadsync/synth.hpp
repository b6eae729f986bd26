#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "dyadsync/recording.hpp"
#include "dyadsync/types.hpp"

namespace dyadsync {

struct OscillatorSpec {
  FrequencyBand band;
  double amplitude_uv;
  double center_hz;  // must lie inside band
};

/// One oscillator per canonical band: 2, 6, 10, 20 and 40 Hz.
std::vector<OscillatorSpec> default_oscillators();

/// Inter-brain phase coupling during the task window. For each (a, b) pair,
/// subject B's electrode b takes subject A's electrode a phase plus a per-trial
/// von Mises offset of concentration kappa, shared by all pairs. kappa = 0
/// gives a uniform offset, i.e. no inter-brain phase locking.
struct CouplingSpec {
  double kappa = 0.0;
  std::vector<std::pair<Electrode, Electrode>> coupled_pairs;
  BandName band = BandName::alpha;

  /// Every electrode coupled to the same electrode of the partner.
  static CouplingSpec matched(double kappa, BandName band = BandName::alpha);
};

/// Multiplicative task-window alpha/beta power factors per electrode for one class.
struct ErdSpec {
  MotorClass cls;
  std::array<double, 8> gains;  // kMontage order, power ratio task / rest
};

/// ERD pattern for all four classes.
class ErdMap {
 public:
  /// All gains 1 (no class information).
  static ErdMap none();
  /// Contralateral pattern: left_hand -> C4, right_hand -> C3, tongue -> C3 and C4,
  /// foot -> Cz, each attenuated to `gain` power. Throws unless gain > 0.
  static ErdMap motor_imagery(double gain);

  const ErdSpec& for_class(MotorClass c) const { return specs_[static_cast<std::size_t>(c)]; }
  void set(const ErdSpec& spec);

 private:
  std::array<ErdSpec, 4> specs_{};
};

struct TrialTiming {
  double idle_s = 3.0;
  double ready_s = 1.0;
  double task_s = 6.0;
  double total_s() const { return idle_s + ready_s + task_s; }
};

enum class PhaseMode : std::uint8_t { single, cooperative };

/// What each subject of the dyad is cued with on one trial. In single phases
/// subject A holds a hand class and subject B a tongue/foot class; in
/// cooperative phases both hold the same (hand, head) pair.
struct DyadCue {
  ClassLabel a = ClassLabel::single(MotorClass::left_hand);
  ClassLabel b = ClassLabel::single(MotorClass::tongue);
  friend bool operator==(const DyadCue&, const DyadCue&) = default;
};

struct SessionPlan {
  PhaseMode mode = PhaseMode::cooperative;
  int blocks = 3;
  int trials_per_block = 20;
  TrialTiming timing;
  std::vector<DyadCue> cues;  // one per trial
  std::uint64_t seed = 0;
  std::size_t first_trial_index = 0;

  std::size_t trial_count() const { return cues.size(); }
};

/// Cue sequence with class counts per block differing by at most one; only
/// the order is random (seeded).
std::vector<DyadCue> balanced_cues(PhaseMode mode, int blocks, int trials_per_block, std::uint64_t seed);

SessionPlan make_plan(PhaseMode mode, std::uint64_t seed, int blocks = 3, int trials_per_block = 20,
                      std::size_t first_trial_index = 0);

struct SynthParams {
  int sample_rate = 1000;
  std::vector<OscillatorSpec> oscillators = default_oscillators();
  double roi_kappa = 2.2;      // ROI source around the subject source, per band and trial
  double channel_kappa = 4.0;  // electrode around its ROI source
  double noise_rms_uv = 3.0;    // 1/f background
  double line_noise_uv = 1.0;   // 50 Hz mains
  double amplitude_jitter = 0.1;  // log-normal sigma of per-trial oscillator amplitude
  double transition_s = 4.5;    // centre of the rest-to-task crossfade
  double crossfade_s = 0.5;
};

struct DyadEpochs {
  Epoch a;
  Epoch b;
};

/// Both subjects' 10 s epochs for trial `trial` of `plan`. The random stream
/// is derived from (plan.seed, global trial index) only.
DyadEpochs generate_trial(const SessionPlan& plan, std::size_t trial, const CouplingSpec& coupling,
                          const ErdMap& erd, const SynthParams& params = {});

struct DyadDataset {
  Recording a;
  Recording b;
  std::vector<std::size_t> onsets;  // samples at the recording rate
  std::vector<std::size_t> trial_indices;
  std::vector<ClassLabel> labels_a;
  std::vector<ClassLabel> labels_b;
};

/// Trials laid back to back into two continuous recordings.
DyadDataset generate_session(const SessionPlan& plan, const CouplingSpec& coupling, const ErdMap& erd,
                             const SynthParams& params = {});

/// Von Mises sample with mean 0 and concentration kappa (Best-Fisher).
double sample_von_mises(std::mt19937_64& rng, double kappa);

/// Mean resultant length I1(kappa) / I0(kappa) of the von Mises distribution.
double von_mises_resultant(double kappa);

}  // namespace dyadsync
