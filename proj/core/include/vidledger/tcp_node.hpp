// SPDX-License-Identifier: Apache-2.0
#pragma once

// gatewayd networking. One listening port carries both cameras and peers;
// the first frame decides: camera opcodes (camera_protocol.hpp) start a
// camera session, PEER 0x20 frames carry encoded PeerMessages, one per frame,
// for the rest of the connection. Peer links are one-way (each gateway dials
// the others for its own outbound traffic).

#include <atomic>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "vidledger/gateway.hpp"
#include "vidledger/gateway_config.hpp"
#include "vidledger/net.hpp"

namespace vidledger::gateway {

inline constexpr std::uint8_t kPeerOpcode = 0x20;

class TcpPeerTransport final : public PeerTransport {
 public:
  TcpPeerTransport(const std::vector<PeerEntry>& peers, const PublicKey& self,
                   std::size_t max_queued = 10'000);
  ~TcpPeerTransport() override;

  /// Queues the message on the peer's link; dropped when the queue is full
  /// or the peer is unknown. Repair is left to SYNC.
  void send(const PublicKey& to, const PeerMessage& message) override;
  void stop();
  std::uint64_t dropped() const { return dropped_.load(); }

 private:
  struct Link {
    net::Endpoint endpoint;
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<Bytes> queue;
    std::thread thread;
  };
  void run(Link& link);

  std::size_t max_queued_;
  std::map<PublicKey, std::unique_ptr<Link>> links_;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> dropped_{0};
};

class GatewayServer {
 public:
  GatewayServer(Gateway& gateway, const net::Endpoint& listen,
                std::chrono::milliseconds hello_wait = std::chrono::seconds(5));
  net::Endpoint endpoint() const { return server_.endpoint(); }
  void stop() { server_.stop(); }

 private:
  void handle(net::Socket& socket);

  Gateway& gateway_;
  std::chrono::milliseconds hello_wait_;
  net::FrameServer server_;
};

}  // namespace vidledger::gateway
