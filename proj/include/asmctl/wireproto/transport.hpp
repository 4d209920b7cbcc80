#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

namespace asmctl::wireproto {

class ChannelClosed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AddressInUse : public TransportError {
 public:
  using TransportError::TransportError;
};

// Ordered, reliable byte stream. One reader and one writer at a time.
class ByteChannel {
 public:
  virtual ~ByteChannel() = default;

  // Throws ChannelClosed once either side has closed.
  virtual void write(std::span<const std::uint8_t> bytes) = 0;

  // Waits up to `timeout` for data. Returns the number of bytes read, 0 on
  // timeout; throws ChannelClosed when the peer is gone and nothing is left.
  virtual std::size_t read(std::span<std::uint8_t> buffer,
                           std::chrono::milliseconds timeout) = 0;

  virtual void close() = 0;
};

// Two connected in-memory endpoints.
std::pair<std::unique_ptr<ByteChannel>, std::unique_ptr<ByteChannel>> make_pipe();

std::unique_ptr<ByteChannel> tcp_connect(const std::string& host, std::uint16_t port,
                                         std::chrono::milliseconds timeout);

class TcpListener {
 public:
  // Port 0 picks an ephemeral port. Throws AddressInUse.
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }

  // nullptr on timeout.
  std::unique_ptr<ByteChannel> accept(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

// Splits "host:port".
std::pair<std::string, std::uint16_t> parse_host_port(const std::string& address);

}  // namespace asmctl::wireproto
