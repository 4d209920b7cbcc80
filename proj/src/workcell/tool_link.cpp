#include "asmctl/workcell/tool_link.hpp"

namespace asmctl::workcell {

using wireproto::ToolClient;

SimulatedToolLink::SimulatedToolLink(wireproto::ToolProfile profile,
                                     std::chrono::milliseconds reply_timeout)
    : profile_(std::move(profile)), timeout_(reply_timeout) {}

SimulatedToolLink::~SimulatedToolLink() { drop(); }

ToolClient& SimulatedToolLink::client() {
  if (client_) return *client_;
  auto [ctl, tool] = wireproto::make_pipe();
  ctl_ = std::move(ctl);
  tool_side_ = std::move(tool);
  endpoint_ = std::make_unique<wireproto::ToolEndpoint>(profile_);
  stop_ = false;
  server_ = std::thread([this] {
    try {
      wireproto::serve_tool(*tool_side_, *endpoint_, stop_);
    } catch (const std::exception&) {
    }
  });
  client_ = std::make_unique<ToolClient>(*ctl_, timeout_);
  return *client_;
}

void SimulatedToolLink::drop() {
  client_.reset();
  stop_ = true;
  if (ctl_) ctl_->close();
  if (server_.joinable()) server_.join();
  ctl_.reset();
  tool_side_.reset();
  endpoint_.reset();
}

TcpToolLink::TcpToolLink(std::string host, std::uint16_t port,
                         std::chrono::milliseconds connect_timeout,
                         std::chrono::milliseconds reply_timeout)
    : host_(std::move(host)),
      port_(port),
      connect_timeout_(connect_timeout),
      reply_timeout_(reply_timeout) {}

TcpToolLink::~TcpToolLink() { drop(); }

ToolClient& TcpToolLink::client() {
  if (client_) return *client_;
  try {
    channel_ = wireproto::tcp_connect(host_, port_, connect_timeout_);
  } catch (const wireproto::TransportError& e) {
    throw wireproto::ToolUnreachable(e.what());
  }
  client_ = std::make_unique<ToolClient>(*channel_, reply_timeout_);
  return *client_;
}

void TcpToolLink::drop() {
  client_.reset();
  if (channel_) channel_->close();
  channel_.reset();
}

}  // namespace asmctl::workcell
