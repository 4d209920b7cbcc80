#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <string>
#include <thread>

#include "asmctl/wireproto/tool_client.hpp"
#include "asmctl/wireproto/tool_endpoint.hpp"
#include "asmctl/wireproto/transport.hpp"

namespace asmctl::workcell {

// Lazily connected controller-side tool session.
class ToolLink {
 public:
  virtual ~ToolLink() = default;
  // Connects on first use. Throws wireproto::ToolUnreachable.
  virtual wireproto::ToolClient& client() = 0;
  // Forgets the connection; the next client() reconnects.
  virtual void drop() = 0;
};

// Simulated tool served on a background thread over an in-memory pipe. A
// fresh endpoint is created per connection, as a tool server does per
// accepted socket.
class SimulatedToolLink : public ToolLink {
 public:
  explicit SimulatedToolLink(wireproto::ToolProfile profile,
                             std::chrono::milliseconds reply_timeout = std::chrono::seconds(5));
  ~SimulatedToolLink() override;
  wireproto::ToolClient& client() override;
  void drop() override;

 private:
  wireproto::ToolProfile profile_;
  std::chrono::milliseconds timeout_;
  std::unique_ptr<wireproto::ByteChannel> ctl_;
  std::unique_ptr<wireproto::ByteChannel> tool_side_;
  std::unique_ptr<wireproto::ToolEndpoint> endpoint_;
  std::unique_ptr<wireproto::ToolClient> client_;
  std::atomic<bool> stop_{false};
  std::thread server_;
};

class TcpToolLink : public ToolLink {
 public:
  TcpToolLink(std::string host, std::uint16_t port,
              std::chrono::milliseconds connect_timeout = std::chrono::seconds(2),
              std::chrono::milliseconds reply_timeout = std::chrono::seconds(5));
  ~TcpToolLink() override;
  wireproto::ToolClient& client() override;
  void drop() override;

 private:
  std::string host_;
  std::uint16_t port_;
  std::chrono::milliseconds connect_timeout_;
  std::chrono::milliseconds reply_timeout_;
  std::unique_ptr<wireproto::ByteChannel> channel_;
  std::unique_ptr<wireproto::ToolClient> client_;
};

}  // namespace asmctl::workcell
