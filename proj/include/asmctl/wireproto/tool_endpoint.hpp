#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "asmctl/tooling/tightening.hpp"
#include "asmctl/wireproto/codec.hpp"
#include "asmctl/wireproto/transport.hpp"

namespace asmctl::wireproto {

// Everything about the simulated tool that the controller does not set over
// the wire. The mode and setpoint fields of `tool` are ignored.
struct ToolProfile {
  tooling::JointModel joint;
  tooling::TorqueModel model;
  tooling::ToolConfig tool;
};

inline constexpr double kTelemetryRateHz = 100.0;
inline constexpr std::chrono::milliseconds kSilenceTimeout{500};

// Tool-side protocol state machine, independent of any transport.
//
//   Idle --SetMode+SetLimit--> Configured --Start--> Running --> Result
//
// Every command is Ack'd; commands that make no sense in the current state
// are Ack'd Rejected. Stop while Running aborts the fastening. After a
// Result the endpoint is Configured again and accepts another Start.
class ToolEndpoint {
 public:
  enum class State { Idle, Configured, Running };

  explicit ToolEndpoint(ToolProfile profile);

  State state() const { return state_; }
  // Idle with nothing configured.
  bool pristine() const { return state_ == State::Idle && !mode_ && !setpoint_nm_; }
  double tick_s() const { return profile_.tool.tick_s; }

  // Handles one inbound frame and returns the replies, in order.
  std::vector<Message> on_message(const Message& msg, std::uint8_t seq);

  // One simulation tick while Running: decimated Telemetry, then Result on
  // the final tick.
  std::vector<Message> advance();

  // Back to Idle, aborting any fastening without a Result. Used when the
  // controller goes silent or disconnects.
  void reset();

  std::uint32_t starts() const { return starts_; }
  std::uint32_t results() const { return results_; }
  const std::optional<tooling::TighteningResult>& last_result() const {
    return last_result_;
  }

 private:
  Message ack(std::uint8_t seq, bool ok) const;
  Message make_result();
  Telemetry telemetry(const tooling::TighteningSample& sample) const;

  ToolProfile profile_;
  State state_ = State::Idle;
  std::optional<ToolMode> mode_;
  std::optional<double> setpoint_nm_;
  std::optional<tooling::TighteningSimulation> sim_;
  std::uint64_t ticks_per_telemetry_ = 1;
  std::uint64_t tick_ = 0;
  std::uint32_t starts_ = 0;
  std::uint32_t results_ = 0;
  std::optional<tooling::TighteningResult> last_result_;
};

struct ServeOptions {
  std::chrono::milliseconds silence_timeout = kSilenceTimeout;
  // Simulated seconds per wall second while Running; 0 runs unpaced.
  double realtime_factor = 0.0;
};

// Runs the endpoint over one connection until the peer disconnects or
// `stop` becomes true. The endpoint is reset to Idle on return.
void serve_tool(ByteChannel& channel, ToolEndpoint& endpoint,
                const std::atomic<bool>& stop, const ServeOptions& options = {});

}  // namespace asmctl::wireproto
