#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "dyadsync/error.hpp"
#include "dyadsync/fft.hpp"
#include "dyadsync/filter.hpp"
#include "dyadsync/recording.hpp"
#include "dyadsync/types.hpp"
#include "fixtures.hpp"
#include "oracles/signal_oracles.hpp"

using namespace dyadsync;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected dyadsync::Error");
  return Errc::io;
}

}  // namespace

TEST_CASE("bands are fixed to the canonical ranges") {
  CHECK(FrequencyBand::named(BandName::delta).low() == 0.5);
  CHECK(FrequencyBand::named(BandName::alpha).high() == 13.0);
  CHECK(FrequencyBand::named(BandName::gamma).high() == 60.0);
  CHECK(FrequencyBand::make(BandName::beta, 13, 30) == FrequencyBand::named(BandName::beta));
  CHECK(code_of([] { FrequencyBand::make(BandName::alpha, 8, 12); }) == Errc::invalid_band);
  CHECK(code_of([] { FrequencyBand::make(BandName::theta, 3.9, 8); }) == Errc::invalid_band);
  for (auto b : kAllBands) CHECK(parse_band(to_string(b)) == b);
}

TEST_CASE("class label wire codes") {
  CHECK(ClassLabel::single(MotorClass::foot).code() == 3);
  const auto pair = ClassLabel::cooperative(MotorClass::right_hand, MotorClass::foot);
  CHECK(pair.code() == 4 + 2 * 1 + 1);
  CHECK(pair.hand() == MotorClass::right_hand);
  CHECK(pair.head() == MotorClass::foot);
  CHECK(pair.for_slot(0) == MotorClass::right_hand);
  CHECK(pair.for_slot(1) == MotorClass::foot);
  for (std::uint8_t c = 0; c < 8; ++c) {
    const auto l = ClassLabel::from_code(c);
    CHECK(l.code() == c);
    CHECK(ClassLabel::parse(l.to_string()) == l);
  }
  CHECK_THROWS_AS(ClassLabel::from_code(8), Error);
  CHECK(code_of([] { ClassLabel::cooperative(MotorClass::tongue, MotorClass::foot); }) == Errc::invalid_argument);
  CHECK(code_of([] { ClassLabel::cooperative(MotorClass::left_hand, MotorClass::right_hand); }) == Errc::invalid_argument);
}

TEST_CASE("roi membership") {
  CHECK(roi_of(Electrode::Fp1) == Roi::prefrontal);
  CHECK(roi_of(Electrode::Cz) == Roi::central);
  CHECK(roi_of(Electrode::Pz) == Roi::parietal);
  CHECK(parse_electrode("C4") == Electrode::C4);
}

TEST_CASE("fft matches a direct DFT") {
  std::mt19937 rng(3);
  std::normal_distribution<double> n;
  for (std::size_t len : {7u, 16u, 30u}) {
    std::vector<std::complex<double>> x(len);
    for (auto& v : x) v = {n(rng), n(rng)};
    const auto y = fft(x);
    for (std::size_t k = 0; k < len; ++k) {
      std::complex<double> s = 0;
      for (std::size_t t = 0; t < len; ++t) s += x[t] * std::polar(1.0, -2 * std::numbers::pi * k * t / len);
      CHECK(std::abs(y[k] - s) < 1e-9);
    }
    const auto back = ifft(y);
    for (std::size_t t = 0; t < len; ++t) CHECK(std::abs(back[t] - x[t]) < 1e-12);
  }
}

TEST_CASE("bandpass design") {
  const auto alpha = design_bandpass(FrequencyBand::named(BandName::alpha), 250);
  CHECK(alpha.is_stable());
  CHECK(alpha.order() == 8);

  SUBCASE("steady-state gains measured by DFT") {
    const auto x10 = oracle::sine(10, 250, 5000);
    const auto y10 = apply_filter(alpha, x10);
    std::span<const double> tail10(y10.data() + 2500, 2500);
    const double g10 = oracle::dft_amplitude(tail10, 10, 250);
    CHECK(g10 >= 0.9);
    CHECK(g10 <= 1.0 + 1e-6);

    const auto x50 = oracle::sine(50, 250, 5000);
    const auto y50 = apply_filter(alpha, x50);
    std::span<const double> tail50(y50.data() + 2500, 2500);
    CHECK(oracle::dft_amplitude(tail50, 50, 250) <= 0.1);
  }

  SUBCASE("nyquist") {
    CHECK(code_of([] { design_bandpass(FrequencyBand::named(BandName::gamma), 100); }) == Errc::invalid_band);
  }

  SUBCASE("every band is stable at analysis and raw rates") {
    for (auto b : kAllBands) {
      CHECK(design_bandpass(FrequencyBand::named(b), 250).is_stable());
      CHECK(design_bandpass(FrequencyBand::named(b), 1000).is_stable());
    }
  }
}

TEST_CASE("zero-phase filtering") {
  const auto alpha = design_bandpass(FrequencyBand::named(BandName::alpha), 250);
  CHECK(apply_filter_zero_phase(alpha, std::vector<double>(500, 0.0)) == std::vector<double>(500, 0.0));

  for (double f : {9.0, 10.0, 12.0}) {
    const auto x = oracle::sine(f, 250, 2500);
    const auto y = apply_filter_zero_phase(alpha, x);
    REQUIRE(y.size() == x.size());
    CHECK(oracle::xcorr_peak_lag(x, y, 20) == 0);
  }

  CHECK(code_of([&] { apply_filter_zero_phase(alpha, std::vector<double>(3, 1.0)); }) == Errc::insufficient_samples);
}

TEST_CASE("filters and decimation are linear") {
  std::mt19937 rng(11);
  std::normal_distribution<double> n;
  std::vector<double> x(2000), y(2000), mix(2000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = n(rng);
    y[i] = n(rng);
    mix[i] = 2.5 * x[i] - 0.75 * y[i];
  }
  auto check_linear = [&](auto f) {
    const auto fx = f(x), fy = f(y), fm = f(mix);
    double scale = 0;
    for (double v : fm) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < fm.size(); ++i) CHECK(std::abs(fm[i] - (2.5 * fx[i] - 0.75 * fy[i])) <= 1e-9 * scale);
  };
  const auto beta = design_bandpass(FrequencyBand::named(BandName::beta), 1000);
  check_linear([&](const std::vector<double>& v) { return apply_filter_zero_phase(beta, v); });
  check_linear([](const std::vector<double>& v) { return notch_50hz(v, 1000); });
  check_linear([](const std::vector<double>& v) { return downsample(v, 1000, 250); });
}

TEST_CASE("50 Hz notch") {
  const auto x50 = oracle::sine(50, 1000, 10000);
  const auto y50 = notch_50hz(x50, 1000);
  CHECK(oracle::rms(y50, 1000) <= 0.032 * oracle::rms(x50, 1000));

  const auto x10 = oracle::sine(10, 1000, 10000);
  CHECK(oracle::rms(notch_50hz(x10, 1000), 1000) >= 0.9 * oracle::rms(x10, 1000));

  // 40 and 60 Hz lose less than 3 dB.
  for (double f : {40.0, 60.0}) {
    const auto x = oracle::sine(f, 1000, 10000);
    CHECK(oracle::rms(notch_50hz(x, 1000), 1000) >= std::pow(10.0, -3.0 / 20.0) * oracle::rms(x, 1000));
  }

  CHECK(notch_50hz(std::vector<double>(1000, 0.0), 1000) == std::vector<double>(1000, 0.0));
  CHECK(code_of([] { notch_50hz(std::vector<double>(1000, 0.0), 100); }) == Errc::invalid_rate);
}

TEST_CASE("downsample") {
  CHECK(downsample(std::vector<double>(1000, 0.0), 1000, 250).size() == 250);
  CHECK(downsample(std::vector<double>(1003, 0.0), 1000, 250).size() == 250);
  const auto x = oracle::sine(10, 1000, 4000);
  const auto y = downsample(x, 1000, 250);
  CHECK(oracle::dft_peak_frequency(y, 250) == doctest::Approx(10.0));
  CHECK(code_of([&] { downsample(x, 1000, 300); }) == Errc::unsupported_ratio);
}

TEST_CASE("epoching") {
  const auto rec = fixtures::make_recording(20000, 250, [](std::size_t c, std::size_t i) { return c * 1e5 + i; });
  std::vector<std::size_t> onsets{0, 2500, 7000};
  std::vector<ClassLabel> labels{ClassLabel::single(MotorClass::left_hand), ClassLabel::single(MotorClass::tongue),
                                 ClassLabel::single(MotorClass::foot)};
  const auto epochs = epoch_recording(rec, onsets, labels);
  REQUIRE(epochs.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(epochs[k].trial_index == k);
    CHECK(epochs[k].condition == labels[k]);
    CHECK(epochs[k].samples() == 2500);
    CHECK(epochs[k].data[3][0] == 3e5 + onsets[k]);
  }

  CHECK(epoch_recording(rec, {}, {}).empty());

  std::vector<std::size_t> last{rec.samples() - 1};
  std::vector<ClassLabel> one{labels[0]};
  CHECK(code_of([&] { epoch_recording(rec, last, one); }) == Errc::truncated_trial);
  CHECK(code_of([&] { epoch_recording(rec, onsets, one); }) == Errc::shape_mismatch);

  SUBCASE("sixty trials") {
    const auto big = fixtures::make_recording(60 * 2500, 250, [](std::size_t, std::size_t) { return 0.0; });
    std::vector<std::size_t> o;
    std::vector<ClassLabel> l;
    for (std::size_t k = 0; k < 60; ++k) o.push_back(k * 2500), l.push_back(labels[k % 3]);
    CHECK(epoch_recording(big, o, l).size() == 60);
  }
}

TEST_CASE("state windows are exactly 4 s and 5 s") {
  for (int fs : {100, 250, 500, 1000}) {
    const auto e = fixtures::make_epoch(0, fs, [](std::size_t, std::size_t i) { return static_cast<double>(i); });
    const auto s = split_states(e);
    CHECK(s.rest[0].size() == static_cast<std::size_t>(4 * fs));
    CHECK(s.task[0].size() == static_cast<std::size_t>(5 * fs));
    CHECK(s.rest[0].size() + static_cast<std::size_t>(fs) + s.task[0].size() == e.samples());
    CHECK(s.task[0].front() == 5.0 * fs);
    CHECK(s.rest[0].back() == 4.0 * fs - 1);
  }
}

TEST_CASE("artifact rejection") {
  auto epochs = fixtures::noise_epochs(5, 250, 9, 5.0);
  const auto clean = artifact_reject(epochs, 100.0);
  CHECK(clean.kept.size() == 5);
  CHECK(clean.dropped.empty());

  epochs[2].data[4][700] = 200.0;
  const auto r = artifact_reject(epochs, 100.0);
  CHECK(r.kept.size() == 4);
  REQUIRE(r.dropped.size() == 1);
  CHECK(r.dropped[0] == 2);
  CHECK(r.kept[2].trial_index == 3);

  CHECK(code_of([&] { artifact_reject(epochs, 0.0); }) == Errc::invalid_argument);
}

TEST_CASE("prepare_recording notches and downsamples") {
  const auto rec = fixtures::make_recording(10000, 1000, [](std::size_t, std::size_t i) {
    return std::sin(2 * std::numbers::pi * 10 * i / 1000.0) + std::sin(2 * std::numbers::pi * 50 * i / 1000.0);
  });
  const auto out = prepare_recording(rec);
  CHECK(out.sample_rate == 250);
  CHECK(out.samples() == 2500);
  std::span<const double> mid(out.data[0].data() + 500, 1500);
  CHECK(oracle::dft_amplitude(mid, 10, 250) > 0.9);
  CHECK(oracle::dft_amplitude(mid, 50, 250) < 0.05);
  CHECK(rescale_onsets(std::vector<std::size_t>{0, 10000}, 1000, 250) == std::vector<std::size_t>{0, 2500});
}
