#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace dyadsync {

// ---------------------------------------------------------------------------
// Electrodes and regions of interest
// ---------------------------------------------------------------------------

enum class Electrode : std::uint8_t { Fp1, Fp2, C3, C4, Cz, P3, P4, Pz };

enum class Roi : std::uint8_t { prefrontal, central, parietal };

/// The fixed 8-electrode montage, in canonical order.
inline constexpr std::array<Electrode, 8> kMontage{Electrode::Fp1, Electrode::Fp2, Electrode::C3,
                                                   Electrode::C4,  Electrode::Cz,  Electrode::P3,
                                                   Electrode::P4,  Electrode::Pz};

/// Motor-imagery feature channels, in the order used on the wire and in features.
inline constexpr std::array<Electrode, 3> kMotorChannels{Electrode::C3, Electrode::C4, Electrode::Cz};

constexpr Roi roi_of(Electrode e) {
  switch (e) {
    case Electrode::Fp1:
    case Electrode::Fp2:
      return Roi::prefrontal;
    case Electrode::C3:
    case Electrode::C4:
    case Electrode::Cz:
      return Roi::central;
    default:
      return Roi::parietal;
  }
}

constexpr std::size_t montage_index(Electrode e) { return static_cast<std::size_t>(e); }

std::string_view to_string(Electrode e);
std::string_view to_string(Roi r);
Electrode parse_electrode(std::string_view name);

// ---------------------------------------------------------------------------
// Frequency bands
// ---------------------------------------------------------------------------

enum class BandName : std::uint8_t { delta, theta, alpha, beta, gamma };

/// One of the five canonical EEG bands. Ranges are fixed; the only way to get
/// a band is by name, or by `make` with the exact canonical edges.
class FrequencyBand {
 public:
  static FrequencyBand named(BandName name);
  /// Throws Errc::invalid_band unless [low, high] is the canonical range of `name`.
  static FrequencyBand make(BandName name, double low, double high);

  BandName name() const { return name_; }
  double low() const { return low_; }
  double high() const { return high_; }
  double center() const { return 0.5 * (low_ + high_); }

  friend bool operator==(const FrequencyBand&, const FrequencyBand&) = default;

 private:
  FrequencyBand(BandName name, double low, double high) : name_(name), low_(low), high_(high) {}

  BandName name_;
  double low_;
  double high_;
};

inline constexpr std::array<BandName, 5> kAllBands{BandName::delta, BandName::theta, BandName::alpha,
                                                   BandName::beta, BandName::gamma};

std::string_view to_string(BandName b);
BandName parse_band(std::string_view name);

// ---------------------------------------------------------------------------
// Class labels
// ---------------------------------------------------------------------------

enum class MotorClass : std::uint8_t { left_hand = 0, right_hand = 1, tongue = 2, foot = 3 };

constexpr bool is_hand(MotorClass c) { return c == MotorClass::left_hand || c == MotorClass::right_hand; }

std::string_view to_string(MotorClass c);

/// A cue as shown to the participants: either one motor class, or a
/// cooperative (hand, head) pair. Wire code: 0..3 for single classes,
/// 4 + 2*hand + head_offset for pairs (head_offset 0 = tongue, 1 = foot).
class ClassLabel {
 public:
  static ClassLabel single(MotorClass c) { return ClassLabel(static_cast<std::uint8_t>(c)); }
  /// Throws Errc::invalid_argument unless `hand` is a hand class and `head` is tongue/foot.
  static ClassLabel cooperative(MotorClass hand, MotorClass head);
  static ClassLabel from_code(std::uint8_t code);
  static ClassLabel parse(std::string_view text);

  std::uint8_t code() const { return code_; }
  bool is_cooperative() const { return code_ >= 4; }
  /// The hand component of a pair, or the class itself for a single label.
  MotorClass hand() const;
  /// The tongue/foot component of a pair, or the class itself for a single label.
  MotorClass head() const;
  /// Class the subject in `slot` is expected to imagine (slot 0 = hand, 1 = head).
  MotorClass for_slot(int slot) const;

  std::string to_string() const;

  friend bool operator==(const ClassLabel&, const ClassLabel&) = default;

 private:
  explicit ClassLabel(std::uint8_t code) : code_(code) {}
  std::uint8_t code_;
};

// ---------------------------------------------------------------------------
// Trial state windows
// ---------------------------------------------------------------------------

enum class BrainState : std::uint8_t { rest, task };

std::string_view to_string(BrainState s);

struct StateWindow {
  BrainState state;
  double start_s;
  double end_s;
};

inline constexpr double kTrialSeconds = 10.0;
inline constexpr StateWindow kRestWindow{BrainState::rest, 0.0, 4.0};
inline constexpr StateWindow kTaskWindow{BrainState::task, 5.0, 10.0};

constexpr StateWindow window_of(BrainState s) { return s == BrainState::rest ? kRestWindow : kTaskWindow; }

}  // namespace dyadsync
