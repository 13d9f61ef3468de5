// SPDX-License-Identifier: Apache-2.0
#include "vidledger/tcp_node.hpp"

#include <spdlog/spdlog.h>

#include "vidledger/camera_protocol.hpp"

namespace vidledger::gateway {

TcpPeerTransport::TcpPeerTransport(const std::vector<PeerEntry>& peers, const PublicKey& self,
                                   std::size_t max_queued)
    : max_queued_(max_queued) {
  for (const auto& p : peers) {
    if (p.key == self) continue;
    auto link = std::make_unique<Link>();
    link->endpoint = p.endpoint;
    links_.emplace(p.key, std::move(link));
  }
  for (auto& [key, link] : links_) {
    Link* l = link.get();
    l->thread = std::thread([this, l] { run(*l); });
  }
}

TcpPeerTransport::~TcpPeerTransport() { stop(); }

void TcpPeerTransport::stop() {
  stopping_ = true;
  for (auto& [key, link] : links_) {
    {
      std::lock_guard lock(link->mutex);
    }
    link->cv.notify_all();
  }
  for (auto& [key, link] : links_)
    if (link->thread.joinable()) link->thread.join();
}

void TcpPeerTransport::send(const PublicKey& to, const PeerMessage& message) {
  auto it = links_.find(to);
  if (it == links_.end() || stopping_) {
    ++dropped_;
    return;
  }
  Link& link = *it->second;
  {
    std::lock_guard lock(link.mutex);
    if (link.queue.size() >= max_queued_) {
      ++dropped_;
      return;
    }
    link.queue.push_back(message.encode());
  }
  link.cv.notify_one();
}

void TcpPeerTransport::run(Link& link) {
  net::Socket socket;
  auto backoff = std::chrono::milliseconds(50);
  while (true) {
    Bytes item;
    {
      std::unique_lock lock(link.mutex);
      link.cv.wait(lock, [&] { return stopping_ || !link.queue.empty(); });
      if (stopping_) return;
      item = std::move(link.queue.front());
      link.queue.pop_front();
    }
    try {
      if (!socket.valid()) socket = net::Socket::connect(link.endpoint, std::chrono::seconds(1));
      net::write_frame(socket, kPeerOpcode, item);
      backoff = std::chrono::milliseconds(50);
    } catch (const std::exception& e) {
      ++dropped_;
      socket.close();
      spdlog::debug("peer link to {} failed: {}", link.endpoint.str(), e.what());
      std::unique_lock lock(link.mutex);
      link.cv.wait_for(lock, backoff, [&] { return stopping_.load(); });
      backoff = std::min(backoff * 2, std::chrono::milliseconds(2000));
    }
  }
}

GatewayServer::GatewayServer(Gateway& gateway, const net::Endpoint& listen, std::chrono::milliseconds hello_wait)
    : gateway_(gateway), hello_wait_(hello_wait), server_(listen, [this](net::Socket& s) { handle(s); }) {}

void GatewayServer::handle(net::Socket& socket) {
  try {
    auto first = net::read_frame(socket);
    if (!first) return;
    if (first->opcode == kPeerOpcode) {
      for (auto frame = std::move(first); frame; frame = net::read_frame(socket)) {
        if (frame->opcode != kPeerOpcode) return;
        gateway_.deliver(std::move(frame->body));
      }
      return;
    }
    camera::serve_camera_session(gateway_, socket, std::move(*first), hello_wait_);
  } catch (const std::exception& e) {
    spdlog::debug("connection closed: {}", e.what());
  }
}

}  // namespace vidledger::gateway
