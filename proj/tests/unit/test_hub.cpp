#include "doctest.h"

#include <future>
#include <random>
#include <thread>

#include "dyadsync/error.hpp"
#include "dyadsync/hub.hpp"
#include "dyadsync/net.hpp"
#include "fixtures.hpp"

using namespace dyadsync;
using namespace std::chrono_literals;

namespace {

Model uniform_model(std::vector<MotorClass> classes) {
  Model m;
  m.classes = std::move(classes);
  m.weights.assign(m.classes.size(), {});
  m.feature_mean.fill(0.0);
  m.feature_std.fill(1.0);
  return m;
}

/// Model whose prediction follows the sign of the alpha C3 feature.
Model sign_model(MotorClass low, MotorClass high) {
  auto m = uniform_model({low, high});
  m.weights[1][0] = 5.0;
  m.feature_mean[0] = std::log(100.0);
  return m;
}

struct Session {
  TrialSchedule schedule;
  std::map<std::size_t, Epoch> epochs_a, epochs_b;
};

Session make_session(std::uint64_t seed) {
  Session s;
  s.schedule = schedule_session(seed).select({2}, 1);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (const auto& t : s.schedule.trials) {
    for (auto* map : {&s.epochs_a, &s.epochs_b}) {
      const double sd = std::exp(std::uniform_real_distribution<double>(0.0, 4.0)(rng));
      (*map)[t.trial_index] = fixtures::make_epoch(t.trial_index, 250, [&](std::size_t, std::size_t) { return sd * n(rng); });
    }
  }
  return s;
}

HubConfig hub_config(const Session& s) {
  HubConfig cfg;
  cfg.listen = {"127.0.0.1", 0};
  cfg.schedule = s.schedule;
  cfg.model_a = sign_model(MotorClass::left_hand, MotorClass::right_hand);
  cfg.model_b = sign_model(MotorClass::tongue, MotorClass::foot);
  cfg.connect_timeout = 10000ms;
  return cfg;
}

ClientConfig client_config(std::uint16_t port, std::uint8_t slot, const Session& s) {
  ClientConfig c;
  c.hub = {"127.0.0.1", port};
  c.slot = slot;
  c.epochs = slot == 0 ? s.epochs_a : s.epochs_b;
  return c;
}

struct RunResult {
  SessionLog log;
  Transcript a, b;
};

RunResult run_pair(const Session& s, ClientConfig* tweak_a = nullptr, ClientConfig* tweak_b = nullptr) {
  Hub hub(hub_config(s));
  auto ca = tweak_a ? *tweak_a : client_config(hub.port(), 0, s);
  auto cb = tweak_b ? *tweak_b : client_config(hub.port(), 1, s);
  ca.hub.port = cb.hub.port = hub.port();
  auto fa = std::async(std::launch::async, [&] { return run_client(ca); });
  auto fb = std::async(std::launch::async, [&] { return run_client(cb); });
  RunResult r;
  r.log = hub.run();
  r.a = fa.get();
  r.b = fb.get();
  return r;
}

proto::ByeReason expect_bye(const net::Socket& sock) {
  net::MessageReader reader(sock);
  for (;;) {
    auto m = reader.read();
    REQUIRE(m.has_value());
    if (const auto* b = std::get_if<proto::Bye>(&*m)) return b->reason;
  }
}

}  // namespace

TEST_CASE("fusion truth table") {
  const std::array<MotorClass, 4> all{MotorClass::left_hand, MotorClass::right_hand, MotorClass::tongue, MotorClass::foot};
  for (MotorClass hand : {MotorClass::left_hand, MotorClass::right_hand}) {
    for (MotorClass head : {MotorClass::tongue, MotorClass::foot}) {
      const auto cue = ClassLabel::cooperative(hand, head);
      for (MotorClass a : all) {
        for (MotorClass b : all) {
          const bool strict = a == hand && b == head;
          const bool free = strict || (a == head && b == hand);
          CHECK((fuse_results(a, b, cue) == FusedOutcome::success) == strict);
          CHECK((fuse_results(a, b, cue, true) == FusedOutcome::success) == free);
        }
      }
    }
  }
  CHECK(fuse_results(MotorClass::left_hand, MotorClass::tongue,
                     ClassLabel::cooperative(MotorClass::left_hand, MotorClass::tongue)) == FusedOutcome::success);
  CHECK(fuse_results(MotorClass::left_hand, MotorClass::foot,
                     ClassLabel::cooperative(MotorClass::left_hand, MotorClass::tongue)) == FusedOutcome::failure);
  CHECK_THROWS_AS(fuse_results(MotorClass::left_hand, MotorClass::foot, ClassLabel::single(MotorClass::left_hand)), Error);

  const DyadCue single{ClassLabel::single(MotorClass::right_hand), ClassLabel::single(MotorClass::foot)};
  CHECK(score_trial(MotorClass::right_hand, MotorClass::foot, single) == FusedOutcome::success);
  CHECK(score_trial(MotorClass::left_hand, MotorClass::foot, single) == FusedOutcome::failure);
}

TEST_CASE("log lines") {
  TrialRecord r;
  r.trial_index = 61;
  r.phase = 2;
  r.cue = {ClassLabel::cooperative(MotorClass::left_hand, MotorClass::foot),
           ClassLabel::cooperative(MotorClass::left_hand, MotorClass::foot)};
  r.valid = false;
  r.invalid_reason = "timeout:b";
  const auto line = to_json_line(r);
  CHECK(line.find("\"trial_index\":61") != std::string::npos);
  CHECK(line.find("\"reason\":\"timeout:b\"") != std::string::npos);
  CHECK(line.find('\n') == std::string::npos);
}

TEST_CASE("full block over loopback") {
  const auto s = make_session(3);
  const auto r = run_pair(s);
  CHECK(r.log.trials.size() == 20);
  CHECK(r.log.valid_count() == 20);
  CHECK(r.a.feedback.size() == 20);
  CHECK(r.b.feedback.size() == 20);
  CHECK(r.a.results.size() == 20);
  CHECK(r.a.trial_starts.size() == 20);
  CHECK(r.a.bye == proto::ByeReason::normal);
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& rec = r.log.trials[i];
    CHECK(rec.trial_index == 60 + i);
    CHECK(r.a.feedback[i] == r.b.feedback[i]);
    CHECK(r.a.feedback[i].trial_index == rec.trial_index);
    CHECK(r.a.trial_starts[i].cue_code == rec.cue.a.code());
    REQUIRE(rec.pred_a);
    CHECK(r.a.results[i].predicted_class == static_cast<std::uint8_t>(rec.pred_a->cls));
    CHECK(r.b.results[i].predicted_class == static_cast<std::uint8_t>(rec.pred_b->cls));
    const bool success = *rec.outcome == FusedOutcome::success;
    CHECK(success == (fuse_results(rec.pred_a->cls, rec.pred_b->cls, rec.cue.a) == FusedOutcome::success));
    CHECK(r.a.feedback[i].fused_outcome == (success ? 1 : 0));
  }

  SUBCASE("replay is identical") { CHECK(run_pair(s).log.to_jsonl() == r.log.to_jsonl()); }
}

TEST_CASE("missing epoch times out only that trial") {
  const auto s = make_session(4);
  auto cb = client_config(0, 1, s);
  cb.skip_trials = {64};
  const auto r = run_pair(s, nullptr, &cb);
  REQUIRE(r.log.trials.size() == 20);
  for (const auto& rec : r.log.trials) {
    if (rec.trial_index == 64) {
      CHECK_FALSE(rec.valid);
      CHECK(rec.invalid_reason == "timeout:b");
    } else {
      CHECK(rec.valid);
    }
  }
  CHECK(r.a.feedback.size() == 19);
}

TEST_CASE("dropped client invalidates only pending trials") {
  const auto s = make_session(5);
  auto cb = client_config(0, 1, s);
  cb.disconnect_at_trial = 70;
  const auto r = run_pair(s, nullptr, &cb);
  REQUIRE(r.log.trials.size() == 20);
  for (const auto& rec : r.log.trials) {
    if (rec.trial_index < 70) {
      CHECK(rec.valid);
    } else {
      CHECK_FALSE(rec.valid);
      CHECK(rec.invalid_reason == "disconnected:b");
    }
  }
  CHECK(r.a.feedback.size() == 10);
  // Once a subject is gone the hub stops starting trials; A saw trials 60..70.
  CHECK(r.a.trial_starts.size() == 11);
}

TEST_CASE("hello rejections") {
  const auto s = make_session(6);
  auto cfg = hub_config(s);
  cfg.connect_timeout = 3000ms;
  Hub hub(cfg);
  const net::Address addr{"127.0.0.1", hub.port()};
  auto run = std::async(std::launch::async, [&] {
    try {
      return hub.run();
    } catch (const Error&) {
      return SessionLog{};
    }
  });

  auto first = net::connect_tcp(addr, 2000ms);
  REQUIRE(net::send_message(first, proto::Hello{0, 1}));
  std::this_thread::sleep_for(100ms);

  SUBCASE("slot collision") {
    auto second = net::connect_tcp(addr, 2000ms);
    REQUIRE(net::send_message(second, proto::Hello{0, 1}));
    CHECK(expect_bye(second) == proto::ByeReason::slot_taken);
  }
  SUBCASE("version mismatch") {
    auto second = net::connect_tcp(addr, 2000ms);
    REQUIRE(net::send_message(second, proto::Hello{1, 2}));
    CHECK(expect_bye(second) == proto::ByeReason::version_mismatch);
  }
  SUBCASE("malformed frame") {
    auto second = net::connect_tcp(addr, 2000ms);
    const std::vector<std::uint8_t> junk{1, 0, 0, 0, 0x7f, 0};
    REQUIRE(net::send_all(second, junk));
    CHECK(expect_bye(second) == proto::ByeReason::protocol_error);
  }
  SUBCASE("third client") {
    auto second = net::connect_tcp(addr, 2000ms);
    REQUIRE(net::send_message(second, proto::Hello{1, 1}));
    std::this_thread::sleep_for(100ms);
    auto third = net::connect_tcp(addr, 2000ms);
    net::send_message(third, proto::Hello{1, 1});
    CHECK(expect_bye(third) == proto::ByeReason::session_full);
    second.close();
  }
  first.close();
  run.get();
}

TEST_CASE("client rejects a trial it does not hold") {
  const auto s = make_session(7);
  Hub hub(hub_config(s));
  auto ca = client_config(hub.port(), 0, s);
  auto cb = client_config(hub.port(), 1, s);
  cb.epochs.erase(62);
  auto fa = std::async(std::launch::async, [&] { return run_client(ca); });
  auto fb = std::async(std::launch::async, [&]() -> std::optional<Errc> {
    try {
      run_client(cb);
    } catch (const Error& e) {
      return e.code();
    }
    return std::nullopt;
  });
  const auto log = hub.run();
  CHECK(fb.get() == Errc::protocol);
  fa.get();
  for (const auto& rec : log.trials) CHECK(rec.valid == (rec.trial_index < 62));
}

TEST_CASE("busy port") {
  auto taken = net::listen_tcp({"127.0.0.1", 0});
  const auto port = net::local_port(taken);
  const auto s = make_session(8);
  auto cfg = hub_config(s);
  cfg.listen.port = port;
  try {
    Hub hub(cfg);
    FAIL("expected bind failure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io);
  }
}

TEST_CASE("connect timeout") {
  const auto s = make_session(9);
  auto cfg = hub_config(s);
  cfg.connect_timeout = 200ms;
  Hub hub(cfg);
  CHECK_THROWS_AS(hub.run(), Error);
}

TEST_CASE("address parsing") {
  const auto a = net::parse_address("127.0.0.1:5555");
  CHECK(a.host == "127.0.0.1");
  CHECK(a.port == 5555);
  CHECK(net::to_string(a) == "127.0.0.1:5555");
  CHECK_THROWS_AS(net::parse_address("nope"), Error);
  CHECK_THROWS_AS(net::parse_address("1.2.3.4:99999"), Error);
}

TEST_CASE("epoch message carries the task window of the motor channels") {
  const auto e = fixtures::make_epoch(3, 250, [](std::size_t c, std::size_t i) { return c * 1000.0 + i; });
  const auto m = make_epoch_message(e, 1);
  CHECK(m.trial_index == 3);
  CHECK(m.subject_slot == 1);
  CHECK(m.channel_count == 3);
  CHECK(m.samples_per_channel == 1250);
  CHECK(m.sample_rate == 250);
  CHECK(m.samples[0] == 2000.0f + 1250.0f);
  CHECK(m.samples[1250] == 3000.0f + 1250.0f);
  CHECK(proto::decode(proto::encode(m)) == proto::Message{m});
}
