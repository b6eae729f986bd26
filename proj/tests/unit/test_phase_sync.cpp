#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "dyadsync/error.hpp"
#include "dyadsync/filter.hpp"
#include "dyadsync/phase_sync.hpp"
#include "dyadsync/synth.hpp"
#include "fixtures.hpp"
#include "oracles/plv_oracles.hpp"
#include "oracles/stats_oracles.hpp"

using namespace dyadsync;
using std::numbers::pi;

namespace {

PhaseSeries series(std::vector<std::vector<double>> trials, double fs = 250) { return {std::move(trials), fs}; }

PhaseSeries random_series(std::size_t trials, std::size_t len, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-pi, pi);
  PhaseSeries s{{}, 250};
  for (std::size_t n = 0; n < trials; ++n) {
    std::vector<double> t(len);
    for (auto& v : t) v = u(rng);
    s.trials.push_back(std::move(t));
  }
  return s;
}

}  // namespace

TEST_CASE("analytic signal") {
  const double fs = 250;
  std::vector<double> c(1000), s(1000);
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = std::cos(2 * pi * 10 * i / fs);
    s[i] = std::sin(2 * pi * 10 * i / fs);
  }
  const auto ac = analytic_signal(c);
  const auto as = analytic_signal(s);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(ac[i].real() - c[i]) < 1e-9);

  const auto pc = instantaneous_phase(ac);
  const auto ps = instantaneous_phase(as);
  for (std::size_t i = 100; i < 900; ++i) {
    CHECK(std::abs(ac[i]) == doctest::Approx(1.0).epsilon(1e-6));
    const double step = std::remainder(pc[i + 1] - pc[i], 2 * pi);
    CHECK(step == doctest::Approx(2 * pi * 10 / fs).epsilon(1e-6));
    CHECK(std::abs(std::remainder(pc[i] - ps[i], 2 * pi) - pi / 2) < 1e-3);
  }

  const auto z = analytic_signal(std::vector<double>(16, 0.0));
  for (auto v : z) CHECK(v == std::complex<double>(0, 0));
  for (double p : instantaneous_phase(z)) CHECK(is_degenerate_phase(p));

  CHECK_THROWS_AS(analytic_signal(std::vector<double>(7, 1.0)), Error);
}

TEST_CASE("instantaneous phase principal values") {
  const std::vector<std::complex<double>> a{{1, 0}, {0, 1}, {-1, 0}, {-1, -0.0}, {0, -1}};
  const auto p = instantaneous_phase(a);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == doctest::Approx(pi / 2));
  CHECK(p[2] == pi);
  CHECK(p[3] == pi);
  CHECK(p[4] == doctest::Approx(-pi / 2));
}

TEST_CASE("plv across trials") {
  SUBCASE("constant offset") {
    std::mt19937_64 rng(1);
    auto x = random_series(30, 10, rng);
    auto y = x;
    for (auto& t : y.trials)
      for (auto& v : t) v = std::remainder(v + 0.7, 2 * pi);
    for (std::size_t t = 0; t < 10; ++t) CHECK(std::abs(plv_across_trials(x, y, t) - 1.0) < 1e-9);
  }
  SUBCASE("two-trial cases") {
    CHECK(std::abs(plv_across_trials(series({{0}, {0}}), series({{0}, {pi}}), 0)) < 1e-9);
    CHECK(std::abs(plv_across_trials(series({{0}, {0}}), series({{0}, {-pi / 2}}), 0) - std::sqrt(0.5)) < 1e-9);
  }
  SUBCASE("shape errors") {
    CHECK_THROWS_AS(plv_across_trials(series({{0}, {0}}), series({{0}}), 0), Error);
    CHECK_THROWS_AS(plv_across_trials(series({{0, 1}}), series({{0}}), 0), Error);
  }
  SUBCASE("degenerate sample") {
    CHECK(std::isnan(plv_across_trials(series({{kDegeneratePhase}, {0}}), series({{0}, {0}}), 0)));
  }
}

TEST_CASE("plv properties on random phases") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-pi, pi);
  for (int rep = 0; rep < 50; ++rep) {
    const auto x = random_series(12, 4, rng);
    const auto y = random_series(12, 4, rng);
    auto shifted = x;
    const double c = u(rng);
    for (auto& t : shifted.trials)
      for (auto& v : t) v = std::remainder(v + c, 2 * pi);
    for (std::size_t t = 0; t < 4; ++t) {
      const double p = plv_across_trials(x, y, t);
      CHECK(p >= 0.0);
      CHECK(p <= 1.0 + 1e-12);
      CHECK(p == doctest::Approx(plv_across_trials(y, x, t)).epsilon(1e-12));
      CHECK(plv_across_trials(shifted, y, t) == doctest::Approx(p).epsilon(1e-9));
      std::vector<double> d;
      for (std::size_t n = 0; n < 12; ++n) d.push_back(x.trials[n][t] - y.trials[n][t]);
      CHECK(p == doctest::Approx(oracle::plv_direct(d)).epsilon(1e-12));
    }
  }
}

TEST_CASE("windowed plv") {
  std::mt19937_64 rng(5);
  const auto locked = random_series(10, 1250, rng);
  const auto w = windowed_plv(locked, locked);
  CHECK(w.values.size() == 50);
  for (double v : w.values) CHECK(v == doctest::Approx(1.0));
  CHECK(w.window_centers.front() == doctest::Approx(0.05));
  CHECK(windowed_plv(locked, locked, 0.1, 0.1, 5.0).window_centers.front() == doctest::Approx(5.05));

  const auto partial = random_series(3, 130, rng);
  CHECK(windowed_plv(partial, partial).values.size() == 5);
  CHECK_THROWS_AS(windowed_plv(partial, partial, 1.0, 1.0), Error);
}

TEST_CASE("windowed plv null mean matches the Monte Carlo oracle") {
  std::mt19937_64 rng(7);
  double total = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const auto x = random_series(60, 25, rng);
    const auto y = random_series(60, 25, rng);
    total += windowed_plv(x, y).mean();
  }
  const double expected = oracle::mc_null_plv(60, 20000, 99);
  CHECK(std::abs(expected - 0.886 / std::sqrt(60.0)) < 0.1 * expected);
  CHECK(std::abs(total / reps - expected) < 0.01);
}

TEST_CASE("ibs matrix") {
  const auto a = fixtures::noise_epochs(60, 250, 1);
  const auto b = fixtures::noise_epochs(60, 250, 2);
  const auto alpha = FrequencyBand::named(BandName::alpha);

  SUBCASE("copy locks every matched pair") {
    const auto m = ibs_matrix(a, a, alpha, BrainState::task);
    CHECK(m.trial_count == 60);
    for (Electrode e : kMontage) CHECK(m.at(e, e) == doctest::Approx(1.0));
  }
  SUBCASE("copy of a common-source montage gives one everywhere") {
    auto common = a;
    for (auto& e : common)
      for (auto& ch : e.data) ch = e.data[0];
    const auto m = ibs_matrix(common, common, alpha, BrainState::task);
    for (double v : m.entries) CHECK(v == doctest::Approx(1.0));
  }
  SUBCASE("independent noise stays under the null bound") {
    const auto m = ibs_matrix(a, b, alpha, BrainState::task);
    for (double v : m.entries) {
      CHECK(v >= 0.0);
      CHECK(v < 0.25);
    }
    CHECK(m.series_at(Electrode::C3, Electrode::C4).values.size() == 50);
    const auto rest = ibs_matrix(a, b, alpha, BrainState::rest);
    CHECK(rest.series_at(Electrode::C3, Electrode::C4).values.size() == 40);
  }
  SUBCASE("alignment") {
    std::vector<Epoch> short_b(b.begin(), b.end() - 1);
    CHECK_THROWS_AS(ibs_matrix(a, short_b, alpha, BrainState::task), Error);
    auto shifted = b;
    for (auto& e : shifted) e.trial_index += 1;
    try {
      ibs_matrix(a, shifted, alpha, BrainState::task);
      FAIL("expected alignment error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::alignment);
    }
  }
  SUBCASE("amplitude scaling does not change plv") {
    auto scaled = b;
    for (auto& e : scaled)
      for (auto& ch : e.data)
        for (auto& v : ch) v *= 3.5;
    const auto m1 = ibs_matrix(a, b, alpha, BrainState::task);
    const auto m2 = ibs_matrix(a, scaled, alpha, BrainState::task);
    for (std::size_t i = 0; i < m1.entries.size(); ++i) CHECK(m2.entries[i] == doctest::Approx(m1.entries[i]).epsilon(1e-9));
  }
}

TEST_CASE("state contrast") {
  const std::vector<double> rest{0.1, 0.2, 0.15, 0.3};
  const auto same = state_contrast(rest, rest);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == 1.0);
  std::vector<double> shifted = rest;
  for (auto& v : shifted) v += 0.1;
  try {
    state_contrast(shifted, rest);
    FAIL("expected degenerate test");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::degenerate_test);
  }
}

TEST_CASE("coupled task versus uncoupled rest on synthetic data") {
  // Rest carries no coupling by construction; the task window is coupled at kappa = 5.
  const auto plan = make_plan(PhaseMode::cooperative, 17, 3, 20);
  std::vector<Epoch> a, b;
  for (std::size_t t = 0; t < plan.trial_count(); ++t) {
    auto d = generate_trial(plan, t, CouplingSpec::matched(5.0), ErdMap::none());
    for (auto* e : {&d.a, &d.b}) {
      for (auto& ch : e->data) ch = downsample(notch_50hz(ch, 1000), 1000, 250);
      e->sample_rate = 250;
    }
    a.push_back(std::move(d.a));
    b.push_back(std::move(d.b));
  }
  const auto alpha = FrequencyBand::named(BandName::alpha);
  const auto task = trialwise_plv(band_phases(a, Electrode::C3, alpha, BrainState::task),
                                  band_phases(b, Electrode::C3, alpha, BrainState::task));
  const auto rest = trialwise_plv(band_phases(a, Electrode::C3, alpha, BrainState::rest),
                                  band_phases(b, Electrode::C3, alpha, BrainState::rest));
  REQUIRE(task.size() == 60);
  const auto r = state_contrast(task, rest);
  CHECK(r.p_value < 0.05);
  CHECK(r.statistic > 0);
  const auto ref = oracle::paired_t(task, rest);
  CHECK(r.statistic == doctest::Approx(ref.statistic).epsilon(1e-9));
  CHECK(r.p_value == doctest::Approx(ref.p).epsilon(1e-6));
}
