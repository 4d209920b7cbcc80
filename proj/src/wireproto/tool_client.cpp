#include "asmctl/wireproto/tool_client.hpp"

#include <string>

namespace asmctl::wireproto {

ToolClient::ToolClient(ByteChannel& channel, std::chrono::milliseconds reply_timeout)
    : channel_(channel), timeout_(reply_timeout) {}

std::uint8_t ToolClient::send(const Message& msg) {
  const std::uint8_t seq = seq_++;
  try {
    channel_.write(encode(msg, seq));
  } catch (const ChannelClosed& e) {
    throw ToolUnreachable(std::string("tool link closed: ") + e.what());
  }
  return seq;
}

Decoded ToolClient::receive() {
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  std::uint8_t buf[512];
  while (true) {
    if (auto frame = reader_.next()) return *frame;
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) throw ToolUnreachable("tool did not reply in time");
    std::size_t n = 0;
    try {
      n = channel_.read(buf, std::chrono::duration_cast<std::chrono::milliseconds>(
                                 deadline - now) + std::chrono::milliseconds(1));
    } catch (const ChannelClosed& e) {
      throw ToolUnreachable(std::string("tool link closed: ") + e.what());
    }
    reader_.feed(std::span<const std::uint8_t>(buf, n));
  }
}

void ToolClient::expect_ack(std::uint8_t seq, const char* what) {
  while (true) {
    const Decoded d = receive();
    const auto* ack = std::get_if<Ack>(&d.message);
    if (ack == nullptr || ack->acked_seq != seq) continue;
    if (ack->status != kAckOk) throw ToolRejected(std::string("tool rejected ") + what);
    return;
  }
}

FastenOutcome ToolClient::fasten(ToolMode mode, std::uint32_t setpoint_mnm,
                                 const TelemetryFn& on_telemetry) {
  expect_ack(send(SetMode{static_cast<std::uint8_t>(mode)}), "SetMode");
  expect_ack(send(SetLimit{setpoint_mnm}), "SetLimit");
  expect_ack(send(Start{}), "Start");
  FastenOutcome out;
  while (true) {
    const Decoded d = receive();
    if (const auto* t = std::get_if<Telemetry>(&d.message)) {
      out.telemetry.push_back(*t);
      if (on_telemetry) on_telemetry(*t);
    } else if (const auto* r = std::get_if<Result>(&d.message)) {
      out.result = *r;
      return out;
    }
  }
}

void ToolClient::stop() { expect_ack(send(Stop{}), "Stop"); }

}  // namespace asmctl::wireproto
