#include "dyadsync/protocol.hpp"

#include <fmt/format.h>

#include <bit>
#include <cstring>

#include "dyadsync/error.hpp"

namespace dyadsync::proto {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void le(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  float f32() { return std::bit_cast<float>(u32()); }
  std::size_t remaining() const { return in_.size() - pos_; }
  void expect_end() const {
    if (remaining() != 0) throw Error(Errc::protocol, fmt::format("{} trailing payload bytes", remaining()));
  }

 private:
  std::uint64_t le(int bytes) {
    if (remaining() < static_cast<std::size_t>(bytes)) throw Error(Errc::protocol, "payload too short");
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::uint32_t read_u32(std::span<const std::uint8_t> b) {
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

}  // namespace

MessageType type_of(const Message& m) {
  return std::visit(
      [](const auto& v) -> MessageType {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Hello>) return MessageType::hello;
        if constexpr (std::is_same_v<T, TrialStart>) return MessageType::trial_start;
        if constexpr (std::is_same_v<T, EpochData>) return MessageType::epoch_data;
        if constexpr (std::is_same_v<T, Result>) return MessageType::result;
        if constexpr (std::is_same_v<T, Feedback>) return MessageType::feedback;
        if constexpr (std::is_same_v<T, Bye>) return MessageType::bye;
      },
      m);
}

std::vector<std::uint8_t> encode_payload(const Message& m) {
  Writer w;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Hello>) {
          w.u8(v.subject_slot);
          w.u16(v.protocol_version);
        } else if constexpr (std::is_same_v<T, TrialStart>) {
          w.u32(v.trial_index);
          w.u8(v.phase);
          w.u8(v.cue_code);
        } else if constexpr (std::is_same_v<T, EpochData>) {
          if (v.samples.size() != static_cast<std::size_t>(v.channel_count) * v.samples_per_channel) {
            throw Error(Errc::protocol, "EPOCH_DATA sample count does not match its shape");
          }
          w.u32(v.trial_index);
          w.u8(v.subject_slot);
          w.u8(v.channel_count);
          w.u32(v.samples_per_channel);
          w.u16(v.sample_rate);
          for (float s : v.samples) w.f32(s);
        } else if constexpr (std::is_same_v<T, Result>) {
          w.u32(v.trial_index);
          w.u8(v.predicted_class);
          w.f32(v.probability);
        } else if constexpr (std::is_same_v<T, Feedback>) {
          w.u32(v.trial_index);
          w.u8(v.fused_outcome);
          w.u8(v.pred_a);
          w.u8(v.pred_b);
        } else {
          w.u8(static_cast<std::uint8_t>(v.reason));
        }
      },
      m);
  return w.take();
}

std::vector<std::uint8_t> encode(const Message& m) {
  const auto payload = encode_payload(m);
  if (payload.size() > kMaxPayload) throw Error(Errc::protocol, "payload exceeds the frame size limit");
  Writer w;
  w.u32(static_cast<std::uint32_t>(payload.size()));
  w.u8(static_cast<std::uint8_t>(type_of(m)));
  auto frame = w.take();
  frame.insert(frame.end(), payload.begin(), payload.end());
  return frame;
}

Message decode_payload(std::uint8_t type, std::span<const std::uint8_t> payload) {
  Reader r(payload);
  Message out;
  switch (static_cast<MessageType>(type)) {
    case MessageType::hello: {
      Hello h;
      h.subject_slot = r.u8();
      h.protocol_version = r.u16();
      out = h;
      break;
    }
    case MessageType::trial_start: {
      TrialStart t;
      t.trial_index = r.u32();
      t.phase = r.u8();
      t.cue_code = r.u8();
      out = t;
      break;
    }
    case MessageType::epoch_data: {
      EpochData e;
      e.trial_index = r.u32();
      e.subject_slot = r.u8();
      e.channel_count = r.u8();
      e.samples_per_channel = r.u32();
      e.sample_rate = r.u16();
      const std::uint64_t count = static_cast<std::uint64_t>(e.channel_count) * e.samples_per_channel;
      if (count * 4 != r.remaining()) {
        throw Error(Errc::protocol, fmt::format("EPOCH_DATA declares {} samples but carries {} bytes", count,
                                                r.remaining()));
      }
      e.samples.resize(static_cast<std::size_t>(count));
      for (auto& s : e.samples) s = r.f32();
      out = std::move(e);
      break;
    }
    case MessageType::result: {
      Result res;
      res.trial_index = r.u32();
      res.predicted_class = r.u8();
      res.probability = r.f32();
      out = res;
      break;
    }
    case MessageType::feedback: {
      Feedback f;
      f.trial_index = r.u32();
      f.fused_outcome = r.u8();
      f.pred_a = r.u8();
      f.pred_b = r.u8();
      out = f;
      break;
    }
    case MessageType::bye: {
      Bye b;
      const auto reason = r.u8();
      if (reason > static_cast<std::uint8_t>(ByeReason::version_mismatch)) {
        throw Error(Errc::protocol, fmt::format("unknown BYE reason {}", reason));
      }
      b.reason = static_cast<ByeReason>(reason);
      out = b;
      break;
    }
    default:
      throw Error(Errc::protocol, fmt::format("unknown message type 0x{:02x}", type));
  }
  r.expect_end();
  return out;
}

Message decode(std::span<const std::uint8_t> frame) {
  if (frame.size() < kHeaderSize) throw Error(Errc::protocol, "frame shorter than its header");
  const auto len = read_u32(frame);
  if (len > kMaxPayload) throw Error(Errc::protocol, "payload exceeds the frame size limit");
  if (frame.size() != kHeaderSize + len) {
    throw Error(Errc::protocol, fmt::format("frame declares {} payload bytes, has {}", len, frame.size() - kHeaderSize));
  }
  return decode_payload(frame[4], frame.subspan(kHeaderSize));
}

void FrameDecoder::feed(std::span<const std::uint8_t> bytes) {
  if (offset_ > 0 && offset_ == buffer_.size()) {
    buffer_.clear();
    offset_ = 0;
  }
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Message> FrameDecoder::next() {
  const std::span<const std::uint8_t> view(buffer_.data() + offset_, buffer_.size() - offset_);
  if (view.size() < kHeaderSize) return std::nullopt;
  const auto len = read_u32(view);
  if (len > kMaxPayload) throw Error(Errc::protocol, "payload exceeds the frame size limit");
  if (view.size() < kHeaderSize + len) return std::nullopt;
  auto msg = decode_payload(view[4], view.subspan(kHeaderSize, len));
  offset_ += kHeaderSize + len;
  if (offset_ > (1u << 20) && offset_ * 2 > buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(offset_));
    offset_ = 0;
  }
  return msg;
}

}  // namespace dyadsync::proto
