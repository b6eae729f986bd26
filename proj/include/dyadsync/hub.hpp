#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dyadsync/classifier.hpp"
#include "dyadsync/net.hpp"
#include "dyadsync/protocol.hpp"
#include "dyadsync/recording.hpp"
#include "dyadsync/schedule.hpp"

namespace dyadsync {

enum class FusedOutcome : std::uint8_t { failure = 0, success = 1 };

std::string_view to_string(FusedOutcome o);

/// Strict rule: success iff pred_a is the cue's hand component and pred_b its
/// head component. With `free_assignment` the swapped pairing is accepted too.
/// Throws Errc::invalid_argument unless `cue` is a cooperative pair.
FusedOutcome fuse_results(MotorClass pred_a, MotorClass pred_b, const ClassLabel& cue, bool free_assignment = false);

/// Outcome of one trial of any phase: subject A is scored against its hand
/// cue and subject B against its head cue.
FusedOutcome score_trial(MotorClass pred_a, MotorClass pred_b, const DyadCue& cue, bool free_assignment = false);

struct SubjectPrediction {
  MotorClass cls;
  float probability;
};

struct TrialRecord {
  std::size_t trial_index = 0;
  int phase = 0;
  int block = 0;
  DyadCue cue;
  bool valid = false;
  std::string invalid_reason;
  std::optional<SubjectPrediction> pred_a;
  std::optional<SubjectPrediction> pred_b;
  std::optional<FusedOutcome> outcome;
};

/// One JSON object per line, no timestamps.
std::string to_json_line(const TrialRecord& r);

struct SessionLog {
  std::vector<TrialRecord> trials;

  std::size_t valid_count() const;
  std::size_t success_count() const;
  std::string to_jsonl() const;
};

struct HubConfig {
  net::Address listen;
  TrialSchedule schedule;
  Model model_a;
  Model model_b;
  bool free_assignment = false;
  double timeout_s = 30.0;     // logical seconds a trial waits for both epochs
  bool real_time = false;      // wall-clock pacing of trials and rests
  double time_scale = 0.01;    // real seconds per logical second when simulated
  std::chrono::milliseconds connect_timeout{60000};
};

/// The coordinator. Binding happens in the constructor so the port is known
/// (and a busy port reported) before any client connects.
class Hub {
 public:
  explicit Hub(HubConfig cfg);
  ~Hub();
  Hub(const Hub&) = delete;
  Hub& operator=(const Hub&) = delete;

  std::uint16_t port() const { return port_; }

  /// Runs the whole schedule. `on_trial` is called on the coordinator thread
  /// after each trial is logged. Throws Errc::io when two clients do not
  /// join within the connect timeout.
  SessionLog run(const std::function<void(const TrialRecord&)>& on_trial = {});

 private:
  HubConfig cfg_;
  net::Socket listener_;
  std::uint16_t port_ = 0;
};

struct Transcript {
  std::vector<proto::TrialStart> trial_starts;
  std::vector<proto::Result> results;
  std::vector<proto::Feedback> feedback;
  std::optional<proto::ByeReason> bye;
};

struct ClientConfig {
  net::Address hub;
  std::uint8_t slot = 0;
  std::map<std::size_t, Epoch> epochs;  // keyed by global trial index
  std::set<std::size_t> skip_trials;    // never answer these (failure injection)
  std::optional<std::size_t> disconnect_at_trial;
  std::chrono::milliseconds connect_timeout{10000};
  std::uint16_t protocol_version = proto::kProtocolVersion;
};

/// Task window of the motor channels as an EPOCH_DATA message.
proto::EpochData make_epoch_message(const Epoch& e, std::uint8_t slot);

/// Plays back `cfg.epochs`. Throws Errc::protocol when the hub starts a trial
/// the dataset does not contain (after sending a protocol-error BYE).
Transcript run_client(const ClientConfig& cfg, const std::function<void(const proto::Message&)>& on_message = {});

}  // namespace dyadsync
