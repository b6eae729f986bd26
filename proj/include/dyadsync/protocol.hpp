#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace dyadsync::proto {

// Frame layout, all integers little-endian:
//   u32 payload_length | u8 message_type | payload[payload_length]

inline constexpr std::uint16_t kProtocolVersion = 1;
inline constexpr std::size_t kHeaderSize = 5;
inline constexpr std::uint32_t kMaxPayload = 64u << 20;

enum class MessageType : std::uint8_t {
  hello = 0x01,
  trial_start = 0x02,
  epoch_data = 0x03,
  result = 0x04,
  feedback = 0x05,
  bye = 0x06,
};

enum class ByeReason : std::uint8_t {
  normal = 0,
  session_full = 1,
  slot_taken = 2,
  protocol_error = 3,
  version_mismatch = 4,
};

struct Hello {
  std::uint8_t subject_slot = 0;
  std::uint16_t protocol_version = kProtocolVersion;
  friend bool operator==(const Hello&, const Hello&) = default;
};

struct TrialStart {
  std::uint32_t trial_index = 0;
  std::uint8_t phase = 0;
  std::uint8_t cue_code = 0;
  friend bool operator==(const TrialStart&, const TrialStart&) = default;
};

/// samples are channel-major: channel c occupies [c * samples_per_channel, (c + 1) * samples_per_channel).
struct EpochData {
  std::uint32_t trial_index = 0;
  std::uint8_t subject_slot = 0;
  std::uint8_t channel_count = 0;
  std::uint32_t samples_per_channel = 0;
  std::uint16_t sample_rate = 0;
  std::vector<float> samples;
  friend bool operator==(const EpochData&, const EpochData&) = default;
};

struct Result {
  std::uint32_t trial_index = 0;
  std::uint8_t predicted_class = 0;
  float probability = 0.0f;
  friend bool operator==(const Result&, const Result&) = default;
};

struct Feedback {
  std::uint32_t trial_index = 0;
  std::uint8_t fused_outcome = 0;  // 1 = success
  std::uint8_t pred_a = 0;
  std::uint8_t pred_b = 0;
  friend bool operator==(const Feedback&, const Feedback&) = default;
};

struct Bye {
  ByeReason reason = ByeReason::normal;
  friend bool operator==(const Bye&, const Bye&) = default;
};

using Message = std::variant<Hello, TrialStart, EpochData, Result, Feedback, Bye>;

MessageType type_of(const Message& m);

/// Complete frame bytes for `m`.
std::vector<std::uint8_t> encode(const Message& m);

/// Payload bytes only (no header).
std::vector<std::uint8_t> encode_payload(const Message& m);

/// Parses one payload. Throws dyadsync::Error(Errc::protocol) on an unknown
/// type, wrong length or inconsistent fields.
Message decode_payload(std::uint8_t type, std::span<const std::uint8_t> payload);

/// Parses exactly one complete frame.
Message decode(std::span<const std::uint8_t> frame);

/// Incremental frame splitter for a byte stream.
class FrameDecoder {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  /// Next complete message, or nullopt when more bytes are needed. Throws
  /// Errc::protocol on a malformed frame.
  std::optional<Message> next();
  std::size_t buffered() const { return buffer_.size() - offset_; }

 private:
  std::vector<std::uint8_t> buffer_;
  std::size_t offset_ = 0;
};

}  // namespace dyadsync::proto
