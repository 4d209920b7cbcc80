#include "asmctl/wireproto/tool_endpoint.hpp"

#include <cmath>
#include <thread>

namespace asmctl::wireproto {

namespace {

std::uint32_t to_milli(double v) {
  return static_cast<std::uint32_t>(std::lround(std::max(0.0, v) * 1000.0));
}

}  // namespace

ToolEndpoint::ToolEndpoint(ToolProfile profile) : profile_(std::move(profile)) {
  const double period = 1.0 / kTelemetryRateHz;
  ticks_per_telemetry_ = static_cast<std::uint64_t>(
      std::max(1.0, std::ceil(period / profile_.tool.tick_s - 1e-9)));
}

Message ToolEndpoint::ack(std::uint8_t seq, bool ok) const {
  return Ack{seq, ok ? kAckOk : kAckRejected};
}

Telemetry ToolEndpoint::telemetry(const tooling::TighteningSample& s) const {
  Telemetry t;
  t.t_ms = to_milli(s.t_s);
  t.current_ma = to_milli(s.current_a);
  t.angle_mdeg = static_cast<std::int32_t>(std::lround(s.angle_rad * 180.0 / M_PI * 1000.0));
  return t;
}

Message ToolEndpoint::make_result() {
  tooling::TighteningResult r = sim_->take_result();
  sim_.reset();
  ++results_;
  state_ = State::Configured;
  Result msg{to_milli(r.final_torque_nm), static_cast<std::uint8_t>(r.status)};
  last_result_ = std::move(r);
  return msg;
}

std::vector<Message> ToolEndpoint::on_message(const Message& msg, std::uint8_t seq) {
  std::vector<Message> out;
  const bool running = state_ == State::Running;
  auto settle = [&] {
    if (!running) state_ = (mode_ && setpoint_nm_) ? State::Configured : State::Idle;
  };

  if (const auto* m = std::get_if<SetMode>(&msg)) {
    const bool ok = !running && m->mode <= 1;
    if (ok) mode_ = static_cast<ToolMode>(m->mode);
    settle();
    out.push_back(ack(seq, ok));
  } else if (const auto* m = std::get_if<SetLimit>(&msg)) {
    const double setpoint = m->torque_mnm / 1000.0;
    const bool ok = !running && setpoint > profile_.joint.run_down_torque_nm &&
                    setpoint > profile_.model.offset_nm;
    if (ok) setpoint_nm_ = setpoint;
    settle();
    out.push_back(ack(seq, ok));
  } else if (std::holds_alternative<Start>(msg)) {
    if (state_ != State::Configured) {
      out.push_back(ack(seq, false));
      return out;
    }
    tooling::ToolConfig cfg = profile_.tool;
    cfg.mode = *mode_;
    cfg.setpoint_nm = *setpoint_nm_;
    cfg.seed = profile_.tool.seed + starts_;
    try {
      sim_.emplace(profile_.joint, cfg, profile_.model);
    } catch (const std::invalid_argument&) {
      out.push_back(ack(seq, false));
      return out;
    }
    ++starts_;
    tick_ = 0;
    state_ = State::Running;
    out.push_back(ack(seq, true));
  } else if (std::holds_alternative<Stop>(msg)) {
    out.push_back(ack(seq, true));
    if (running) {
      sim_->abort();
      out.push_back(make_result());
    }
  } else {
    // Tool-to-controller messages have no meaning here.
    out.push_back(ack(seq, false));
  }
  return out;
}

std::vector<Message> ToolEndpoint::advance() {
  std::vector<Message> out;
  if (state_ != State::Running) return out;
  const tooling::TighteningSample& s = sim_->step();
  ++tick_;
  if (tick_ % ticks_per_telemetry_ == 0) out.push_back(telemetry(s));
  if (sim_->finished()) out.push_back(make_result());
  return out;
}

void ToolEndpoint::reset() {
  sim_.reset();
  mode_.reset();
  setpoint_nm_.reset();
  state_ = State::Idle;
}

void serve_tool(ByteChannel& channel, ToolEndpoint& endpoint,
                const std::atomic<bool>& stop, const ServeOptions& options) {
  FrameReader reader;
  std::uint8_t out_seq = 0;
  std::uint8_t buf[512];
  auto last_rx = std::chrono::steady_clock::now();

  auto send_all = [&](const std::vector<Message>& msgs) {
    for (const auto& m : msgs) channel.write(encode(m, out_seq++));
  };

  try {
    while (!stop.load()) {
      const bool running = endpoint.state() == ToolEndpoint::State::Running;
      const std::size_t n =
          channel.read(buf, running ? std::chrono::milliseconds(0)
                                    : std::chrono::milliseconds(20));
      const auto now = std::chrono::steady_clock::now();
      if (n > 0) {
        last_rx = now;
        reader.feed(std::span<const std::uint8_t>(buf, n));
        while (auto frame = reader.next()) {
          send_all(endpoint.on_message(frame->message, frame->seq));
        }
      }
      if (endpoint.state() == ToolEndpoint::State::Running) {
        send_all(endpoint.advance());
        if (options.realtime_factor > 0.0) {
          std::this_thread::sleep_for(std::chrono::duration<double>(
              endpoint.tick_s() / options.realtime_factor));
        }
        last_rx = now;
      } else if (!endpoint.pristine() && now - last_rx > options.silence_timeout) {
        endpoint.reset();
        reader.clear();
      }
    }
  } catch (const ChannelClosed&) {
  }
  endpoint.reset();
}

}  // namespace asmctl::wireproto
