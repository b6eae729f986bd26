#include "dyadsync/types.hpp"

#include <fmt/format.h>

#include "dyadsync/error.hpp"

namespace dyadsync {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::invalid_band: return "invalid-band";
    case Errc::invalid_rate: return "invalid-rate";
    case Errc::insufficient_samples: return "insufficient-samples";
    case Errc::unsupported_ratio: return "unsupported-ratio";
    case Errc::truncated_trial: return "truncated-trial";
    case Errc::shape_mismatch: return "shape";
    case Errc::alignment: return "alignment";
    case Errc::empty_result: return "empty-result";
    case Errc::degenerate_test: return "degenerate-test";
    case Errc::sample_size: return "sample-size";
    case Errc::empty_group: return "empty-group";
    case Errc::incomplete_montage: return "incomplete-montage";
    case Errc::disconnected: return "disconnected";
    case Errc::no_threshold: return "no-threshold";
    case Errc::degenerate_feature: return "degenerate-feature";
    case Errc::degenerate_label: return "degenerate-label";
    case Errc::fold: return "fold";
    case Errc::pairing: return "pairing";
    case Errc::protocol: return "protocol";
    case Errc::io: return "io";
  }
  return "unknown";
}

namespace {
constexpr std::array<std::string_view, 8> kElectrodeNames{"Fp1", "Fp2", "C3", "C4", "Cz", "P3", "P4", "Pz"};
constexpr std::array<std::string_view, 5> kBandNames{"delta", "theta", "alpha", "beta", "gamma"};
constexpr std::array<std::string_view, 4> kClassNames{"left_hand", "right_hand", "tongue", "foot"};

struct BandRange {
  double low;
  double high;
};
constexpr std::array<BandRange, 5> kBandRanges{{{0.5, 4.0}, {4.0, 8.0}, {8.0, 13.0}, {13.0, 30.0}, {30.0, 60.0}}};
}  // namespace

std::string_view to_string(Electrode e) { return kElectrodeNames[montage_index(e)]; }

std::string_view to_string(Roi r) {
  switch (r) {
    case Roi::prefrontal: return "prefrontal";
    case Roi::central: return "central";
    case Roi::parietal: return "parietal";
  }
  return "unknown";
}

Electrode parse_electrode(std::string_view name) {
  for (std::size_t i = 0; i < kElectrodeNames.size(); ++i) {
    if (kElectrodeNames[i] == name) return static_cast<Electrode>(i);
  }
  throw Error(Errc::invalid_argument, fmt::format("unknown electrode label '{}'", name));
}

FrequencyBand FrequencyBand::named(BandName name) {
  const auto& r = kBandRanges[static_cast<std::size_t>(name)];
  return FrequencyBand(name, r.low, r.high);
}

FrequencyBand FrequencyBand::make(BandName name, double low, double high) {
  const auto& r = kBandRanges[static_cast<std::size_t>(name)];
  if (low != r.low || high != r.high) {
    throw Error(Errc::invalid_band, fmt::format("band {} must span [{}, {}] Hz, got [{}, {}]", to_string(name),
                                                r.low, r.high, low, high));
  }
  return FrequencyBand(name, low, high);
}

std::string_view to_string(BandName b) { return kBandNames[static_cast<std::size_t>(b)]; }

BandName parse_band(std::string_view name) {
  for (std::size_t i = 0; i < kBandNames.size(); ++i) {
    if (kBandNames[i] == name) return static_cast<BandName>(i);
  }
  throw Error(Errc::invalid_band, fmt::format("unknown band '{}'", name));
}

std::string_view to_string(MotorClass c) { return kClassNames[static_cast<std::size_t>(c)]; }

ClassLabel ClassLabel::cooperative(MotorClass hand, MotorClass head) {
  if (!is_hand(hand) || is_hand(head)) {
    throw Error(Errc::invalid_argument, fmt::format("cooperative label needs (hand, tongue/foot), got ({}, {})",
                                                    dyadsync::to_string(hand), dyadsync::to_string(head)));
  }
  const int head_offset = head == MotorClass::tongue ? 0 : 1;
  return ClassLabel(static_cast<std::uint8_t>(4 + 2 * static_cast<int>(hand) + head_offset));
}

ClassLabel ClassLabel::from_code(std::uint8_t code) {
  if (code > 7) throw Error(Errc::invalid_argument, fmt::format("class code {} out of range", code));
  return ClassLabel(code);
}

ClassLabel ClassLabel::parse(std::string_view text) {
  const auto plus = text.find('+');
  auto parse_class = [](std::string_view s) {
    for (std::size_t i = 0; i < kClassNames.size(); ++i) {
      if (kClassNames[i] == s) return static_cast<MotorClass>(i);
    }
    throw Error(Errc::invalid_argument, fmt::format("unknown class label '{}'", s));
  };
  if (plus == std::string_view::npos) return single(parse_class(text));
  return cooperative(parse_class(text.substr(0, plus)), parse_class(text.substr(plus + 1)));
}

MotorClass ClassLabel::hand() const {
  if (!is_cooperative()) return static_cast<MotorClass>(code_);
  return static_cast<MotorClass>((code_ - 4) / 2);
}

MotorClass ClassLabel::head() const {
  if (!is_cooperative()) return static_cast<MotorClass>(code_);
  return (code_ - 4) % 2 == 0 ? MotorClass::tongue : MotorClass::foot;
}

MotorClass ClassLabel::for_slot(int slot) const { return slot == 0 ? hand() : head(); }

std::string ClassLabel::to_string() const {
  if (!is_cooperative()) return std::string(dyadsync::to_string(hand()));
  return fmt::format("{}+{}", dyadsync::to_string(hand()), dyadsync::to_string(head()));
}

std::string_view to_string(BrainState s) { return s == BrainState::rest ? "rest" : "task"; }

}  // namespace dyadsync
