// SPDX-License-Identifier: Apache-2.0
#include "vidledger/camera_protocol.hpp"

#include <spdlog/spdlog.h>

#include <thread>

namespace vidledger::camera {

namespace {
using Clock = std::chrono::steady_clock;

Bytes nack_body(std::uint32_t retry_ms) {
  Bytes b;
  put_u32be(b, retry_ms);
  return b;
}

std::string body_text(const Bytes& body) { return std::string(body.begin(), body.end()); }
}  // namespace

CameraClient::CameraClient(net::Endpoint gateway, PublicKey camera, std::chrono::milliseconds connect_timeout)
    : gateway_(std::move(gateway)), camera_(camera), connect_timeout_(connect_timeout) {}

net::Frame CameraClient::exchange(std::uint8_t op, ByteView body) {
  if (!socket_.valid()) socket_ = net::Socket::connect(gateway_, connect_timeout_);
  net::write_frame(socket_, op, body);
  auto reply = net::read_frame(socket_);
  if (!reply) {
    socket_.close();
    throw CameraError("gateway closed the connection");
  }
  return std::move(*reply);
}

void CameraClient::hello(std::chrono::milliseconds deadline) {
  const auto until = Clock::now() + deadline;
  while (true) {
    net::Frame reply = exchange(opcode::kHello, camera_.bytes);
    if (reply.opcode == opcode::kAck) return;
    if (reply.opcode == opcode::kReject) throw CameraRejected("hello rejected: " + body_text(reply.body));
    if (reply.opcode != opcode::kNack || reply.body.size() != 4)
      throw CameraError("unexpected reply to HELLO: opcode " + std::to_string(reply.opcode));
    const auto wait = std::chrono::milliseconds(get_u32be(reply.body.data()));
    if (Clock::now() + wait > until) throw CameraError("gateway did not admit the camera before the deadline");
    std::this_thread::sleep_for(wait);
  }
}

Receipt CameraClient::send_chunk(ByteView frame, std::chrono::milliseconds deadline) {
  const auto until = Clock::now() + deadline;
  while (true) {
    net::Frame reply = exchange(opcode::kChunk, frame);
    if (reply.opcode == opcode::kReceipt) {
      if (reply.body.size() != 8 + 32) throw CameraError("malformed receipt");
      Receipt r;
      r.sequence = get_u64be(reply.body.data());
      std::copy(reply.body.begin() + 8, reply.body.end(), r.transaction_hash.begin());
      return r;
    }
    if (reply.opcode == opcode::kReject) throw CameraRejected("chunk rejected: " + body_text(reply.body));
    if (reply.opcode != opcode::kNack || reply.body.size() != 4)
      throw CameraError("unexpected reply to CHUNK: opcode " + std::to_string(reply.opcode));
    const auto wait = std::chrono::milliseconds(get_u32be(reply.body.data()));
    if (Clock::now() + wait > until) throw CameraError("chunk not accepted before the deadline");
    std::this_thread::sleep_for(wait);
  }
}

void serve_camera_session(gateway::Gateway& gw, net::Socket& socket, net::Frame first,
                          std::chrono::milliseconds hello_wait) {
  std::optional<PublicKey> camera;
  std::optional<net::Frame> next = std::move(first);
  while (next) {
    net::Frame frame = std::move(*next);
    if (frame.opcode == opcode::kHello) {
      if (frame.body.size() != 32) return;
      PublicKey key;
      std::copy(frame.body.begin(), frame.body.end(), key.bytes.begin());
      const gateway::HelloResult r = gw.handle_camera_hello(key, hello_wait);
      switch (r.status) {
        case gateway::HelloStatus::Ready:
          camera = key;
          net::write_frame(socket, opcode::kAck, {});
          break;
        case gateway::HelloStatus::ManagedElsewhere: {
          const std::string reason = "managed by " + r.managing_gateway->hex();
          net::write_frame(socket, opcode::kReject, as_bytes(reason));
          break;
        }
        case gateway::HelloStatus::Timeout:
          net::write_frame(socket, opcode::kNack, nack_body(static_cast<std::uint32_t>(hello_wait.count() / 2 + 1)));
          break;
      }
    } else if (frame.opcode == opcode::kChunk) {
      if (!camera) {
        spdlog::warn("camera sent a chunk before its HELLO was acknowledged; closing");
        return;
      }
      try {
        const gateway::ProcessedChunk p = gw.process_chunk(*camera, frame.body);
        Bytes body;
        put_u64be(body, p.tx.sequence_number);
        body.insert(body.end(), p.tx.transaction_hash.begin(), p.tx.transaction_hash.end());
        net::write_frame(socket, opcode::kReceipt, body);
      } catch (const chunk::ChunkParseError& e) {
        net::write_frame(socket, opcode::kReject, as_bytes(std::string(e.what())));
      } catch (const gateway::NotManagedError& e) {
        net::write_frame(socket, opcode::kReject, as_bytes(std::string(e.what())));
      } catch (const gateway::StoreUnavailable& e) {
        spdlog::warn("chunk from {} deferred: {}", camera->hex().substr(0, 12), e.what());
        net::write_frame(socket, opcode::kNack, nack_body(1000));
      }
    } else {
      spdlog::warn("unexpected camera opcode {}; closing", frame.opcode);
      return;
    }
    next = net::read_frame(socket);
  }
}

}  // namespace vidledger::camera
