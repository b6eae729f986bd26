#include "dyadsync/hub.hpp"

#include <fmt/format.h>
#include "json.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <thread>

#include "dyadsync/error.hpp"

namespace dyadsync {

namespace {

using Clock = std::chrono::steady_clock;

std::string_view slot_name(std::size_t slot) { return slot == 0 ? "a" : "b"; }

struct Connection {
  int id;
  net::Socket socket;
};

struct Event {
  enum class Kind { connected, message, closed, malformed } kind;
  std::shared_ptr<Connection> conn;
  std::optional<proto::Message> message;
};

class EventQueue {
 public:
  void push(Event e) {
    {
      std::lock_guard lock(mutex_);
      events_.push_back(std::move(e));
    }
    cv_.notify_one();
  }

  std::optional<Event> pop_until(Clock::time_point deadline) {
    std::unique_lock lock(mutex_);
    if (!cv_.wait_until(lock, deadline, [&] { return !events_.empty(); })) return std::nullopt;
    Event e = std::move(events_.front());
    events_.pop_front();
    return e;
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Event> events_;
};

/// Accepts connections and runs one reader thread per connection. Readers
/// only read; every write goes through the coordinator.
class Acceptor {
 public:
  Acceptor(const net::Socket& listener, EventQueue& queue) : listener_(listener), queue_(queue) {
    thread_ = std::thread([this] { loop(); });
  }

  ~Acceptor() {
    stop_ = true;
    thread_.join();
  }

 private:
  void loop() {
    int next_id = 0;
    while (!stop_) {
      auto s = net::accept_for(listener_, std::chrono::milliseconds(50));
      if (!s) continue;
      auto conn = std::make_shared<Connection>(Connection{next_id++, std::move(*s)});
      conns_.push_back(conn);
      queue_.push({Event::Kind::connected, conn, std::nullopt});
      readers_.emplace_back([this, conn] { read(conn); });
    }
    for (auto& c : conns_) c->socket.shutdown();
    for (auto& t : readers_) t.join();
  }

  void read(const std::shared_ptr<Connection>& conn) {
    net::MessageReader reader(conn->socket);
    try {
      while (auto m = reader.read()) queue_.push({Event::Kind::message, conn, std::move(m)});
      queue_.push({Event::Kind::closed, conn, std::nullopt});
    } catch (const Error&) {
      queue_.push({Event::Kind::malformed, conn, std::nullopt});
    }
  }

  const net::Socket& listener_;
  EventQueue& queue_;
  std::atomic<bool> stop_{false};
  std::vector<std::shared_ptr<Connection>> conns_;
  std::vector<std::thread> readers_;
  std::thread thread_;
};

/// All session state, owned by the coordinator thread.
class Coordinator {
 public:
  Coordinator(const HubConfig& cfg, EventQueue& queue) : cfg_(cfg), queue_(queue) {}

  void await_clients() {
    const auto deadline = Clock::now() + cfg_.connect_timeout;
    while (!(slots_[0] && slots_[1])) {
      auto e = queue_.pop_until(deadline);
      if (!e) throw Error(Errc::io, "two clients did not join before the connect timeout");
      handle(*e);
      if (lost_[0] || lost_[1]) {
        // A slot that joined and left before the session started can be claimed again.
        for (std::size_t s = 0; s < 2; ++s) lost_[s] = false;
      }
    }
  }

  TrialRecord run_trial(const ScheduledTrial& t) {
    TrialRecord rec;
    rec.trial_index = t.trial_index;
    rec.phase = t.phase;
    rec.block = t.block;
    rec.cue = t.cue;
    drain();
    if (auto reason = lost_reason()) {
      rec.invalid_reason = *reason;
      return rec;
    }
    current_ = t.trial_index;
    epochs_ = {};
    for (std::size_t s = 0; s < 2; ++s) {
      const auto& cue = s == 0 ? t.cue.a : t.cue.b;
      send(s, proto::TrialStart{static_cast<std::uint32_t>(t.trial_index), static_cast<std::uint8_t>(t.phase),
                                cue.code()});
    }
    const double scale = cfg_.real_time ? 1.0 : cfg_.time_scale;
    const auto deadline =
        Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg_.timeout_s * scale));
    while (!(epochs_[0] && epochs_[1]) && !lost_[0] && !lost_[1]) {
      auto e = queue_.pop_until(deadline);
      if (!e) break;
      handle(*e);
    }
    finished_.insert(t.trial_index);
    current_.reset();
    if (auto reason = lost_reason()) {
      rec.invalid_reason = *reason;
      return rec;
    }
    if (!epochs_[0] || !epochs_[1]) {
      rec.invalid_reason = !epochs_[0] && !epochs_[1] ? "timeout:a,b" : fmt::format("timeout:{}", slot_name(epochs_[0] ? 1 : 0));
      return rec;
    }
    std::array<SubjectPrediction, 2> preds{};
    for (std::size_t s = 0; s < 2; ++s) {
      try {
        preds[s] = classify(*epochs_[s], s == 0 ? cfg_.model_a : cfg_.model_b);
      } catch (const Error& err) {
        rec.invalid_reason = fmt::format("bad_epoch:{}", slot_name(s));
        return rec;
      }
    }
    rec.valid = true;
    rec.pred_a = preds[0];
    rec.pred_b = preds[1];
    rec.outcome = score_trial(preds[0].cls, preds[1].cls, t.cue, cfg_.free_assignment);
    for (std::size_t s = 0; s < 2; ++s) {
      send(s, proto::Result{static_cast<std::uint32_t>(t.trial_index), static_cast<std::uint8_t>(preds[s].cls),
                            preds[s].probability});
    }
    const proto::Feedback fb{static_cast<std::uint32_t>(t.trial_index),
                             static_cast<std::uint8_t>(*rec.outcome == FusedOutcome::success ? 1 : 0),
                             static_cast<std::uint8_t>(preds[0].cls), static_cast<std::uint8_t>(preds[1].cls)};
    for (std::size_t s = 0; s < 2; ++s) send(s, fb);
    return rec;
  }

  void finish() {
    drain();
    for (std::size_t s = 0; s < 2; ++s) {
      if (slots_[s]) send(s, proto::Bye{proto::ByeReason::normal});
    }
    for (auto& [id, conn] : peers_) conn->socket.shutdown();
  }

 private:
  static SubjectPrediction classify(const proto::EpochData& e, const Model& m) {
    if (e.channel_count != kMotorChannels.size() || e.sample_rate == 0) {
      throw Error(Errc::invalid_argument, "epoch does not carry the motor channels");
    }
    std::vector<std::vector<double>> channels(e.channel_count);
    for (std::size_t c = 0; c < channels.size(); ++c) {
      const auto* first = e.samples.data() + c * e.samples_per_channel;
      channels[c].assign(first, first + e.samples_per_channel);
    }
    const auto p = predict(m, extract_window_features(channels, e.sample_rate));
    return {p.cls, static_cast<float>(p.probabilities[p.index])};
  }

  std::optional<std::string> lost_reason() const {
    if (lost_[0] && lost_[1]) return "disconnected:a,b";
    if (lost_[0]) return "disconnected:a";
    if (lost_[1]) return "disconnected:b";
    return std::nullopt;
  }

  void drain() {
    while (auto e = queue_.pop_until(Clock::now())) handle(*e);
  }

  void send(std::size_t slot, const proto::Message& m) {
    if (!slots_[slot]) return;
    const auto it = peers_.find(*slots_[slot]);
    if (!net::send_message(it->second->socket, m)) drop(it->first);
  }

  void reject(const std::shared_ptr<Connection>& conn, proto::ByeReason reason) {
    net::send_message(conn->socket, proto::Bye{reason});
    drop(conn->id);
  }

  void drop(int id) {
    const auto it = peers_.find(id);
    if (it == peers_.end()) return;
    it->second->socket.shutdown();
    for (std::size_t s = 0; s < 2; ++s) {
      if (slots_[s] == id) {
        slots_[s].reset();
        lost_[s] = true;
      }
    }
    peers_.erase(it);
    slot_of_.erase(id);
  }

  void handle(const Event& e) {
    const int id = e.conn->id;
    switch (e.kind) {
      case Event::Kind::connected:
        peers_[id] = e.conn;
        if (slots_[0] && slots_[1]) reject(e.conn, proto::ByeReason::session_full);
        return;
      case Event::Kind::closed:
        drop(id);
        return;
      case Event::Kind::malformed:
        if (peers_.count(id)) reject(e.conn, proto::ByeReason::protocol_error);
        return;
      case Event::Kind::message:
        if (peers_.count(id)) on_message(e.conn, *e.message);
        return;
    }
  }

  void on_message(const std::shared_ptr<Connection>& conn, const proto::Message& m) {
    const int id = conn->id;
    const auto slot_it = slot_of_.find(id);
    if (const auto* h = std::get_if<proto::Hello>(&m)) {
      if (slot_it != slot_of_.end() || h->subject_slot > 1) return reject(conn, proto::ByeReason::protocol_error);
      if (h->protocol_version != proto::kProtocolVersion) return reject(conn, proto::ByeReason::version_mismatch);
      if (slots_[0] && slots_[1]) return reject(conn, proto::ByeReason::session_full);
      if (slots_[h->subject_slot] || lost_[h->subject_slot]) return reject(conn, proto::ByeReason::slot_taken);
      slots_[h->subject_slot] = id;
      slot_of_[id] = h->subject_slot;
      return;
    }
    if (std::holds_alternative<proto::Bye>(m)) return drop(id);
    const auto* ep = std::get_if<proto::EpochData>(&m);
    if (!ep || slot_it == slot_of_.end() || ep->subject_slot != slot_it->second) {
      return reject(conn, proto::ByeReason::protocol_error);
    }
    if (finished_.count(ep->trial_index)) return;  // late, the trial is already closed
    if (!current_ || ep->trial_index != *current_) return reject(conn, proto::ByeReason::protocol_error);
    auto& slot_epoch = epochs_[slot_it->second];
    if (!slot_epoch) slot_epoch = *ep;
  }

  const HubConfig& cfg_;
  EventQueue& queue_;
  std::map<int, std::shared_ptr<Connection>> peers_;
  std::map<int, std::uint8_t> slot_of_;
  std::array<std::optional<int>, 2> slots_{};
  std::array<bool, 2> lost_{};
  std::optional<std::size_t> current_;
  std::set<std::size_t> finished_;
  std::array<std::optional<proto::EpochData>, 2> epochs_{};
};

}  // namespace

std::string_view to_string(FusedOutcome o) { return o == FusedOutcome::success ? "success" : "failure"; }

FusedOutcome fuse_results(MotorClass pred_a, MotorClass pred_b, const ClassLabel& cue, bool free_assignment) {
  if (!cue.is_cooperative()) throw Error(Errc::invalid_argument, "fusion needs a cooperative cue");
  const bool strict = pred_a == cue.hand() && pred_b == cue.head();
  const bool swapped = pred_a == cue.head() && pred_b == cue.hand();
  return strict || (free_assignment && swapped) ? FusedOutcome::success : FusedOutcome::failure;
}

FusedOutcome score_trial(MotorClass pred_a, MotorClass pred_b, const DyadCue& cue, bool free_assignment) {
  if (cue.a.is_cooperative() && cue.a == cue.b) return fuse_results(pred_a, pred_b, cue.a, free_assignment);
  const bool ok = pred_a == cue.a.for_slot(0) && pred_b == cue.b.for_slot(1);
  return ok ? FusedOutcome::success : FusedOutcome::failure;
}

std::string to_json_line(const TrialRecord& r) {
  nlohmann::ordered_json j;
  j["trial_index"] = r.trial_index;
  j["phase"] = r.phase;
  j["block"] = r.block;
  j["cue_a"] = r.cue.a.to_string();
  j["cue_b"] = r.cue.b.to_string();
  j["status"] = r.valid ? "valid" : "invalid";
  if (!r.valid) j["reason"] = r.invalid_reason;
  auto pred = [](const std::optional<SubjectPrediction>& p) {
    if (!p) return nlohmann::ordered_json(nullptr);
    nlohmann::ordered_json o;
    o["class"] = std::string(to_string(p->cls));
    o["probability"] = p->probability;
    return o;
  };
  j["pred_a"] = pred(r.pred_a);
  j["pred_b"] = pred(r.pred_b);
  j["outcome"] = r.outcome ? nlohmann::ordered_json(std::string(to_string(*r.outcome))) : nlohmann::ordered_json(nullptr);
  return j.dump();
}

std::size_t SessionLog::valid_count() const {
  return static_cast<std::size_t>(std::count_if(trials.begin(), trials.end(), [](const auto& t) { return t.valid; }));
}

std::size_t SessionLog::success_count() const {
  return static_cast<std::size_t>(std::count_if(
      trials.begin(), trials.end(), [](const auto& t) { return t.outcome == FusedOutcome::success; }));
}

std::string SessionLog::to_jsonl() const {
  std::string out;
  for (const auto& t : trials) {
    out += to_json_line(t);
    out += '\n';
  }
  return out;
}

Hub::Hub(HubConfig cfg) : cfg_(std::move(cfg)) {
  if (!(cfg_.timeout_s > 0.0) || !(cfg_.time_scale > 0.0)) {
    throw Error(Errc::invalid_argument, "timeout and time scale must be positive");
  }
  listener_ = net::listen_tcp(cfg_.listen);
  port_ = net::local_port(listener_);
}

Hub::~Hub() = default;

SessionLog Hub::run(const std::function<void(const TrialRecord&)>& on_trial) {
  EventQueue queue;
  Acceptor acceptor(listener_, queue);
  Coordinator coord(cfg_, queue);
  coord.await_clients();
  SessionLog log;
  const auto& trials = cfg_.schedule.trials;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto started = Clock::now();
    log.trials.push_back(coord.run_trial(trials[i]));
    if (on_trial) on_trial(log.trials.back());
    if (cfg_.real_time) {
      double pause = cfg_.schedule.timing.total_s();
      const bool block_ends = i + 1 < trials.size() &&
                              (trials[i + 1].phase != trials[i].phase || trials[i + 1].block != trials[i].block);
      if (block_ends) pause += cfg_.schedule.inter_block_rest_s;
      std::this_thread::sleep_until(started + std::chrono::duration_cast<Clock::duration>(
                                                  std::chrono::duration<double>(pause)));
    }
  }
  coord.finish();
  return log;
}

proto::EpochData make_epoch_message(const Epoch& e, std::uint8_t slot) {
  const auto r = state_range(BrainState::task, e.sample_rate);
  if (e.samples() < r.end) throw Error(Errc::truncated_trial, fmt::format("trial {} is too short", e.trial_index));
  if (e.sample_rate <= 0 || e.sample_rate > 65535) throw Error(Errc::invalid_rate, "sample rate does not fit the wire");
  proto::EpochData m;
  m.trial_index = static_cast<std::uint32_t>(e.trial_index);
  m.subject_slot = slot;
  m.channel_count = static_cast<std::uint8_t>(kMotorChannels.size());
  m.samples_per_channel = static_cast<std::uint32_t>(r.size());
  m.sample_rate = static_cast<std::uint16_t>(e.sample_rate);
  m.samples.reserve(kMotorChannels.size() * r.size());
  for (Electrode ch : kMotorChannels) {
    const auto x = e.channel(ch);
    for (std::size_t i = r.begin; i < r.end; ++i) m.samples.push_back(static_cast<float>(x[i]));
  }
  return m;
}

Transcript run_client(const ClientConfig& cfg, const std::function<void(const proto::Message&)>& on_message) {
  if (cfg.slot > 1) throw Error(Errc::invalid_argument, "subject slot must be 0 or 1");
  auto socket = net::connect_tcp(cfg.hub, cfg.connect_timeout);
  Transcript t;
  if (!net::send_message(socket, proto::Hello{cfg.slot, cfg.protocol_version})) return t;
  net::MessageReader reader(socket);
  for (;;) {
    std::optional<proto::Message> m;
    try {
      m = reader.read();
    } catch (const Error&) {
      net::send_message(socket, proto::Bye{proto::ByeReason::protocol_error});
      throw;
    }
    if (!m) return t;
    if (on_message) on_message(*m);
    if (const auto* ts = std::get_if<proto::TrialStart>(&*m)) {
      t.trial_starts.push_back(*ts);
      if (cfg.disconnect_at_trial == ts->trial_index) return t;
      const auto it = cfg.epochs.find(ts->trial_index);
      if (it == cfg.epochs.end()) {
        net::send_message(socket, proto::Bye{proto::ByeReason::protocol_error});
        throw Error(Errc::protocol, fmt::format("hub started trial {} which the dataset does not hold", ts->trial_index));
      }
      if (cfg.skip_trials.count(ts->trial_index)) continue;
      if (!net::send_message(socket, make_epoch_message(it->second, cfg.slot))) return t;
    } else if (const auto* r = std::get_if<proto::Result>(&*m)) {
      t.results.push_back(*r);
    } else if (const auto* f = std::get_if<proto::Feedback>(&*m)) {
      t.feedback.push_back(*f);
    } else if (const auto* b = std::get_if<proto::Bye>(&*m)) {
      t.bye = b->reason;
      return t;
    } else {
      net::send_message(socket, proto::Bye{proto::ByeReason::protocol_error});
      throw Error(Errc::protocol, "unexpected message from hub");
    }
  }
}

}  // namespace dyadsync
