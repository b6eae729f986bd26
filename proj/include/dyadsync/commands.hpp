#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dyadsync/brain_network.hpp"
#include "dyadsync/classifier.hpp"
#include "dyadsync/hub.hpp"
#include "dyadsync/phase_sync.hpp"
#include "dyadsync/schedule.hpp"
#include "dyadsync/stats.hpp"
#include "dyadsync/synth.hpp"

namespace dyadsync {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Dataset layout
// ---------------------------------------------------------------------------

/// Per-phase generator settings.
struct PhaseScenario {
  double kappa = 0.3;     // inter-brain coupling in the coupling band
  double erd_gain = 0.8;  // task/rest alpha-beta power on the contralateral channel
};

struct ManifestEntry {
  int dyad = 1;
  int phase = 1;
  std::uint64_t seed = 0;  // session seed of the dyad
  fs::path subject_a;      // relative to the manifest directory
  fs::path subject_b;
};

struct Manifest {
  fs::path root;
  std::uint64_t seed = 0;
  int blocks = 3;
  int trials_per_block = 20;
  std::vector<ManifestEntry> entries;

  /// Throws Errc::io when `dir/manifest.json` is missing or malformed.
  static Manifest load(const fs::path& dir);
  std::vector<int> dyads() const;
  /// Throws Errc::invalid_argument when absent.
  const ManifestEntry& find(int dyad, int phase) const;
};

/// Session seed of dyad `dyad` (1-based) in a dataset seeded with `seed`.
std::uint64_t dyad_seed(std::uint64_t seed, int dyad);

/// Both subjects' preprocessed (notch, 250 Hz) epochs of one phase. A trial
/// rejected for either subject is dropped for both.
struct PhaseEpochs {
  std::vector<Epoch> a;
  std::vector<Epoch> b;
  std::vector<std::size_t> dropped;
};

PhaseEpochs prepare_phase(const Recording& a, const Recording& b, std::span<const std::size_t> onsets,
                          std::span<const ClassLabel> labels_a, std::span<const ClassLabel> labels_b,
                          std::span<const std::size_t> trial_indices, double amp_limit = kDefaultAmplitudeLimitUv);
PhaseEpochs prepare_phase(const DyadDataset& ds, double amp_limit = kDefaultAmplitudeLimitUv);
PhaseEpochs load_phase(const Manifest& m, const ManifestEntry& e, double amp_limit = kDefaultAmplitudeLimitUv);

/// One dyad's three phases generated exactly as cmd_synth does.
struct SynthScenario {
  std::array<PhaseScenario, 3> phases{{{0.3, 0.8}, {1.5, 0.5}, {0.3, 0.75}}};
  BandName coupling_band = BandName::alpha;
};

DyadDataset synth_phase(std::uint64_t session_seed, int phase, const SynthScenario& scenario, int blocks = 3,
                        int trials_per_block = 20);

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct SynthConfig {
  fs::path out;
  std::uint64_t seed = 1;
  int dyads = 10;
  int blocks = 3;
  int trials_per_block = 20;
  std::vector<int> phases{1, 2, 3};
  SynthScenario scenario;
};

Manifest cmd_synth(const SynthConfig& cfg);

struct EpochConfig {
  fs::path input;  // recording CSV
  fs::path out;    // epoch archive CSV
  double amp_limit = kDefaultAmplitudeLimitUv;
};

/// Notch, downsample to 250 Hz, epoch and reject; returns the kept count.
std::size_t cmd_epoch(const EpochConfig& cfg);

struct IbsConfig {
  fs::path data;
  fs::path out;
  std::vector<BandName> bands{kAllBands.begin(), kAllBands.end()};
  std::vector<int> phases{2};
  double alpha = 0.05;
  bool fdr = false;
  PlvOptions plv;
};

struct IbsBandSummary {
  BandName band;
  double task_mean = 0.0;
  double rest_mean = 0.0;
  std::size_t tests = 0;
  std::size_t significant = 0;        // per-dyad trial-level tests
  std::size_t group_significant = 0;  // across-dyad tests (needs >= 2 dyads)
};

struct IbsReport {
  std::vector<IbsBandSummary> bands;
  const IbsBandSummary& at(BandName b) const;
};

IbsReport cmd_ibs(const IbsConfig& cfg);

struct FbnConfig {
  fs::path data;
  fs::path out;
  std::vector<BandName> bands{kAllBands.begin(), kAllBands.end()};
  double tau = kDefaultThreshold;
  SmallWorldOptions small_world;
};

struct FbnReport {
  std::map<BandName, std::vector<MetricComparison>> comparisons;
  /// (subject, phase, band) -> metrics, subject = "dyadNN-A" / "dyadNN-B".
  std::map<std::tuple<std::string, int, BandName>, NetworkMetrics> metrics;
};

/// Throws Errc::disconnected naming the subject, phase and band when a
/// thresholded network falls apart.
FbnReport cmd_fbn(const FbnConfig& cfg);

struct ClassifyConfig {
  fs::path data;
  fs::path out;
  std::vector<int> phases{1, 2, 3};
  std::size_t folds = 10;
  TrainConfig train;
};

struct SubjectPhaseResult {
  std::string subject;
  int phase;
  CvReport cv;
};

struct PhaseComparison {
  std::string groups;  // e.g. "1-2" or "all"
  TestResult test;
};

struct ClassifyReport {
  std::vector<SubjectPhaseResult> results;
  std::vector<PhaseComparison> comparisons;
  std::map<int, double> mean_accuracy;  // per phase
};

/// Features and per-subject labels (slot 0 = hand class, 1 = head class).
void collect_features(std::span<const Epoch> epochs, int slot, std::vector<FeatureVector>& features,
                      std::vector<MotorClass>& labels);

/// Kruskal-Wallis across phases on per-subject accuracies: every pair of
/// phases plus all phases together.
std::vector<PhaseComparison> compare_phase_accuracies(const std::map<int, std::vector<double>>& accuracies);

ClassifyReport cmd_classify(const ClassifyConfig& cfg);

struct TrainCmdConfig {
  fs::path data;
  fs::path out;  // directory receiving model_a.json and model_b.json
  int dyad = 1;
  std::vector<int> phases{1};
  TrainConfig train;
};

std::array<Model, 2> cmd_train(const TrainCmdConfig& cfg);

struct HubCmdConfig {
  std::string addr = "127.0.0.1:5555";
  fs::path data;  // manifest directory; fixes the schedule seed and sizes
  int dyad = 1;
  fs::path model_a;
  fs::path model_b;
  std::vector<int> phases{2};
  int blocks = 1;
  fs::path log;
  bool real_time = false;
  bool free_assignment = false;
  double timeout_s = 30.0;
  double time_scale = 0.01;
};

TrialSchedule hub_schedule(const Manifest& m, int dyad, const std::vector<int>& phases, int blocks);

/// Prints one line per trial to `out` and writes the JSON-lines log.
SessionLog cmd_hub(const HubCmdConfig& cfg, std::ostream& out);

struct ClientCmdConfig {
  std::string addr = "127.0.0.1:5555";
  fs::path data;
  int dyad = 1;
  int slot = 0;
  std::vector<int> phases{2};
  std::vector<std::size_t> skip_trials;
  std::optional<std::size_t> disconnect_at_trial;
};

std::map<std::size_t, Epoch> client_epochs(const Manifest& m, int dyad, int slot, const std::vector<int>& phases);

Transcript cmd_client(const ClientCmdConfig& cfg, std::ostream& out);

}  // namespace dyadsync
