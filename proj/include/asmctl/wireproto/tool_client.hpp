#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "asmctl/common.hpp"
#include "asmctl/wireproto/codec.hpp"
#include "asmctl/wireproto/transport.hpp"

namespace asmctl::wireproto {

// No reply in time, or the link dropped.
class ToolUnreachable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The tool answered a command with Ack{Rejected}.
class ToolRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FastenOutcome {
  Result result;
  std::vector<Telemetry> telemetry;
};

// Controller side of the tool link: one fastening per fasten() call.
class ToolClient {
 public:
  explicit ToolClient(ByteChannel& channel,
                      std::chrono::milliseconds reply_timeout = std::chrono::seconds(5));

  using TelemetryFn = std::function<void(const Telemetry&)>;

  // SetMode, SetLimit, Start (each Ack'd), then Telemetry until Result.
  FastenOutcome fasten(ToolMode mode, std::uint32_t setpoint_mnm,
                       const TelemetryFn& on_telemetry = {});

  // Sends Stop and waits for its Ack.
  void stop();

 private:
  std::uint8_t send(const Message& msg);
  Decoded receive();
  void expect_ack(std::uint8_t seq, const char* what);

  ByteChannel& channel_;
  std::chrono::milliseconds timeout_;
  FrameReader reader_;
  std::uint8_t seq_ = 0;
};

}  // namespace asmctl::wireproto
