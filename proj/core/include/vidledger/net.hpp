// SPDX-License-Identifier: Apache-2.0
#pragma once

// Blocking TCP plumbing shared by the store service, the camera link and the
// gateway peer link. Every message on the wire is a frame:
//
//   length u32 BE (= 1 + body size) | opcode u8 | body

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include "vidledger/bytes.hpp"

namespace vidledger::net {

inline constexpr std::uint32_t kMaxFrameBytes = 64u << 20;

class NetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  /// "host:port"; throws std::invalid_argument.
  static Endpoint parse(std::string_view text);
  std::string str() const { return host + ":" + std::to_string(port); }
  bool operator==(const Endpoint&) const = default;
};

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  static Socket connect(const Endpoint& ep, std::chrono::milliseconds timeout = std::chrono::seconds(5));

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  void close();
  /// Unblocks a reader on another thread without releasing the descriptor.
  void shutdown();

  void write_all(ByteView data);
  /// False on clean EOF before the first byte; throws NetError on a short read.
  bool read_exact(std::uint8_t* out, std::size_t n);

 private:
  int fd_ = -1;
};

struct Frame {
  std::uint8_t opcode = 0;
  Bytes body;
};

void write_frame(Socket& s, std::uint8_t opcode, ByteView body);
/// nullopt on clean EOF between frames.
std::optional<Frame> read_frame(Socket& s, std::uint32_t max_bytes = kMaxFrameBytes);

class Listener {
 public:
  explicit Listener(const Endpoint& ep);
  std::uint16_t port() const { return port_; }
  /// Invalid socket once the listener has been closed.
  Socket accept();
  /// Wakes a thread blocked in accept().
  void interrupt();
  void close();

 private:
  Socket sock_;
  std::uint16_t port_ = 0;
};

/// Accept loop with one thread per connection. The handler owns the
/// connection for its lifetime and returns when the peer hangs up.
class FrameServer {
 public:
  using Handler = std::function<void(Socket&)>;

  FrameServer(const Endpoint& listen, Handler handler);
  ~FrameServer();
  FrameServer(const FrameServer&) = delete;
  FrameServer& operator=(const FrameServer&) = delete;

  std::uint16_t port() const { return listener_.port(); }
  Endpoint endpoint() const { return {host_, port()}; }
  void stop();

 private:
  struct Connection {
    Socket socket;
    std::thread thread;
    std::atomic<bool> finished{false};
  };

  void accept_loop();
  void reap_finished();

  std::string host_;
  Listener listener_;
  Handler handler_;
  std::atomic<bool> stopping_{false};
  std::mutex mutex_;
  std::list<std::unique_ptr<Connection>> connections_;
  std::thread accept_thread_;
};

}  // namespace vidledger::net
