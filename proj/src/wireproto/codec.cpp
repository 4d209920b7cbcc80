#include "asmctl/wireproto/codec.hpp"

#include <algorithm>

#include "asmctl/wireproto/crc16.hpp"

namespace asmctl::wireproto {

namespace {

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint8_t u8() { return in_[pos_++]; }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

// Exact payload size per type; -1 for unknown types.
int payload_size(std::uint8_t type) {
  switch (static_cast<MsgType>(type)) {
    case MsgType::SetMode:
      return 1;
    case MsgType::SetLimit:
      return 4;
    case MsgType::Start:
    case MsgType::Stop:
      return 0;
    case MsgType::Ack:
      return 2;
    case MsgType::Telemetry:
      return 12;
    case MsgType::Result:
      return 5;
  }
  return -1;
}

Message parse_payload(MsgType type, std::span<const std::uint8_t> payload) {
  Reader r(payload);
  switch (type) {
    case MsgType::SetMode:
      return SetMode{r.u8()};
    case MsgType::SetLimit:
      return SetLimit{r.u32()};
    case MsgType::Start:
      return Start{};
    case MsgType::Stop:
      return Stop{};
    case MsgType::Ack: {
      Ack a;
      a.acked_seq = r.u8();
      a.status = r.u8();
      return a;
    }
    case MsgType::Telemetry: {
      Telemetry t;
      t.t_ms = r.u32();
      t.current_ma = r.u32();
      t.angle_mdeg = r.i32();
      return t;
    }
    case MsgType::Result: {
      Result res;
      res.final_torque_mnm = r.u32();
      res.status = r.u8();
      return res;
    }
  }
  return Stop{};
}

}  // namespace

MsgType type_of(const Message& msg) {
  return static_cast<MsgType>(msg.index() + 1);
}

std::string_view to_string(MsgType type) {
  switch (type) {
    case MsgType::SetMode:
      return "SetMode";
    case MsgType::SetLimit:
      return "SetLimit";
    case MsgType::Start:
      return "Start";
    case MsgType::Stop:
      return "Stop";
    case MsgType::Ack:
      return "Ack";
    case MsgType::Telemetry:
      return "Telemetry";
    case MsgType::Result:
      return "Result";
  }
  return "Unknown";
}

std::string_view to_string(DecodeStatus status) {
  switch (status) {
    case DecodeStatus::Ok:
      return "Ok";
    case DecodeStatus::BadSync:
      return "BadSync";
    case DecodeStatus::BadCrc:
      return "BadCrc";
    case DecodeStatus::UnknownType:
      return "UnknownType";
    case DecodeStatus::LengthMismatch:
      return "LengthMismatch";
    case DecodeStatus::Truncated:
      return "Truncated";
  }
  return "Unknown";
}

std::vector<std::uint8_t> encode(const Message& msg, std::uint8_t seq) {
  std::vector<std::uint8_t> payload;
  Writer w(payload);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SetMode>) {
          w.u8(m.mode);
        } else if constexpr (std::is_same_v<T, SetLimit>) {
          w.u32(m.torque_mnm);
        } else if constexpr (std::is_same_v<T, Ack>) {
          w.u8(m.acked_seq);
          w.u8(m.status);
        } else if constexpr (std::is_same_v<T, Telemetry>) {
          w.u32(m.t_ms);
          w.u32(m.current_ma);
          w.i32(m.angle_mdeg);
        } else if constexpr (std::is_same_v<T, Result>) {
          w.u32(m.final_torque_mnm);
          w.u8(m.status);
        }
      },
      msg);

  std::vector<std::uint8_t> frame;
  frame.reserve(kHeaderSize + payload.size() + kCrcSize);
  frame.push_back(kSync);
  frame.push_back(static_cast<std::uint8_t>(payload.size()));
  frame.push_back(static_cast<std::uint8_t>(type_of(msg)));
  frame.push_back(seq);
  frame.insert(frame.end(), payload.begin(), payload.end());
  const std::uint16_t crc =
      crc16_ccitt_false(std::span<const std::uint8_t>(frame).subspan(1));
  frame.push_back(static_cast<std::uint8_t>(crc & 0xFF));
  frame.push_back(static_cast<std::uint8_t>(crc >> 8));
  return frame;
}

DecodeResult decode(std::span<const std::uint8_t> bytes) {
  DecodeResult r;
  if (bytes.empty()) return r;
  if (bytes[0] != kSync) {
    r.status = DecodeStatus::BadSync;
    r.consumed = 1;
    return r;
  }
  if (bytes.size() < kHeaderSize) return r;
  const std::size_t length = bytes[1];
  const std::size_t total = kHeaderSize + length + kCrcSize;
  if (bytes.size() < total) return r;

  r.consumed = total;
  const auto covered = bytes.subspan(1, kHeaderSize - 1 + length);
  const std::uint16_t expected = static_cast<std::uint16_t>(
      bytes[total - 2] | (static_cast<std::uint16_t>(bytes[total - 1]) << 8));
  if (crc16_ccitt_false(covered) != expected) {
    r.status = DecodeStatus::BadCrc;
    return r;
  }
  const int want = payload_size(bytes[2]);
  if (want < 0) {
    r.status = DecodeStatus::UnknownType;
    return r;
  }
  if (static_cast<std::size_t>(want) != length) {
    r.status = DecodeStatus::LengthMismatch;
    return r;
  }
  r.status = DecodeStatus::Ok;
  r.seq = bytes[3];
  r.message = parse_payload(static_cast<MsgType>(bytes[2]),
                            bytes.subspan(kHeaderSize, length));
  return r;
}

void FrameReader::feed(std::span<const std::uint8_t> bytes) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Decoded> FrameReader::next() {
  while (!buffer_.empty()) {
    const DecodeResult r = decode(buffer_);
    switch (r.status) {
      case DecodeStatus::Ok: {
        buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<long>(r.consumed));
        return Decoded{r.message, r.seq};
      }
      case DecodeStatus::Truncated:
        return std::nullopt;
      case DecodeStatus::BadSync: {
        auto it = std::find(buffer_.begin() + 1, buffer_.end(), kSync);
        buffer_.erase(buffer_.begin(), it);
        break;
      }
      case DecodeStatus::BadCrc:
        // The length byte may itself be corrupt, so resync one byte on.
        ++dropped_frames_;
        buffer_.erase(buffer_.begin());
        break;
      case DecodeStatus::UnknownType:
      case DecodeStatus::LengthMismatch:
        ++dropped_frames_;
        buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<long>(r.consumed));
        break;
    }
  }
  return std::nullopt;
}

}  // namespace asmctl::wireproto
