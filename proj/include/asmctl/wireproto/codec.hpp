#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

// Controller <-> tool frames:
//
//   0xAA | length | msg_type | seq | payload[length] | crc16 (LE)
//
// The CRC is CRC-16/CCITT-FALSE over length, msg_type, seq and payload.
// Multi-byte fields are little-endian.
namespace asmctl::wireproto {

inline constexpr std::uint8_t kSync = 0xAA;
inline constexpr std::size_t kHeaderSize = 4;
inline constexpr std::size_t kCrcSize = 2;
inline constexpr std::size_t kMaxFrameSize = kHeaderSize + 255 + kCrcSize;

enum class MsgType : std::uint8_t {
  SetMode = 0x01,
  SetLimit = 0x02,
  Start = 0x03,
  Stop = 0x04,
  Ack = 0x05,
  Telemetry = 0x06,
  Result = 0x07,
};

// Field values are carried raw; range checks belong to the receiver.
struct SetMode {
  std::uint8_t mode = 0;  // 0 TorqueLimit, 1 ActuationCutoff
  bool operator==(const SetMode&) const = default;
};
struct SetLimit {
  std::uint32_t torque_mnm = 0;
  bool operator==(const SetLimit&) const = default;
};
struct Start {
  bool operator==(const Start&) const = default;
};
struct Stop {
  bool operator==(const Stop&) const = default;
};
struct Ack {
  std::uint8_t acked_seq = 0;
  std::uint8_t status = 0;  // 0 OK, 1 Rejected
  bool operator==(const Ack&) const = default;
};
struct Telemetry {
  std::uint32_t t_ms = 0;
  std::uint32_t current_ma = 0;
  std::int32_t angle_mdeg = 0;
  bool operator==(const Telemetry&) const = default;
};
struct Result {
  std::uint32_t final_torque_mnm = 0;
  std::uint8_t status = 0;  // 0 Completed, 1 Stalled, 2 Aborted
  bool operator==(const Result&) const = default;
};

inline constexpr std::uint8_t kAckOk = 0;
inline constexpr std::uint8_t kAckRejected = 1;

using Message = std::variant<SetMode, SetLimit, Start, Stop, Ack, Telemetry, Result>;

MsgType type_of(const Message& msg);
std::string_view to_string(MsgType type);

std::vector<std::uint8_t> encode(const Message& msg, std::uint8_t seq);

enum class DecodeStatus {
  Ok,
  BadSync,
  BadCrc,
  UnknownType,
  LengthMismatch,
  Truncated,
};

std::string_view to_string(DecodeStatus status);

struct DecodeResult {
  DecodeStatus status = DecodeStatus::Truncated;
  Message message;
  std::uint8_t seq = 0;
  // Bytes taken by the frame under examination: the whole frame for Ok and
  // for CRC-valid frames with bad content, 1 for BadSync, 0 for Truncated.
  std::size_t consumed = 0;

  bool ok() const { return status == DecodeStatus::Ok; }
};

// Parses the single frame at the start of `bytes`. Never reads past the
// span; anything after `consumed` is left for the next call.
DecodeResult decode(std::span<const std::uint8_t> bytes);

struct Decoded {
  Message message;
  std::uint8_t seq = 0;
};

// Reassembles frames from a byte stream delivered in arbitrary chunks and
// skips over corrupted or unknown frames.
class FrameReader {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  // Next complete frame, or nullopt when more bytes are needed.
  std::optional<Decoded> next();

  std::size_t dropped_frames() const { return dropped_frames_; }
  std::size_t buffered() const { return buffer_.size(); }
  void clear() { buffer_.clear(); }

 private:
  std::vector<std::uint8_t> buffer_;
  std::size_t dropped_frames_ = 0;
};

}  // namespace asmctl::wireproto
