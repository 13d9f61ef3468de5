// SPDX-License-Identifier: Apache-2.0
#pragma once

// Camera to gateway link (frames as in net.hpp):
//
//   camera  HELLO   0x01 body = 32-byte camera public key
//           CHUNK   0x02 body = one SVC1 container frame
//   gateway ACK     0x81 empty                      block ready, camera may stream
//           NACK    0x82 u32 BE retry_after_ms      bootstrap or store not ready, resend
//           RECEIPT 0x83 u64 BE sequence | 32-byte transaction hash
//           REJECT  0x84 utf-8 reason               HELLO: camera managed elsewhere;
//                                                   CHUNK: unparseable frame, no transaction
//
// A CHUNK before the HELLO has been ACKed closes the connection.

#include <chrono>
#include <stdexcept>

#include "vidledger/gateway.hpp"
#include "vidledger/net.hpp"

namespace vidledger::camera {

namespace opcode {
inline constexpr std::uint8_t kHello = 0x01;
inline constexpr std::uint8_t kChunk = 0x02;
inline constexpr std::uint8_t kAck = 0x81;
inline constexpr std::uint8_t kNack = 0x82;
inline constexpr std::uint8_t kReceipt = 0x83;
inline constexpr std::uint8_t kReject = 0x84;
}  // namespace opcode

struct Receipt {
  std::uint64_t sequence = 0;
  Digest transaction_hash{};
};

class CameraError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The gateway refused the HELLO or the chunk for good.
class CameraRejected : public CameraError {
 public:
  using CameraError::CameraError;
};

class CameraClient {
 public:
  CameraClient(net::Endpoint gateway, PublicKey camera,
               std::chrono::milliseconds connect_timeout = std::chrono::seconds(2));

  /// HELLO until ACK, honouring NACK retry hints until `deadline` elapses.
  void hello(std::chrono::milliseconds deadline = std::chrono::seconds(30));
  /// Sends one frame, resending on NACK until `deadline` elapses.
  Receipt send_chunk(ByteView frame, std::chrono::milliseconds deadline = std::chrono::seconds(60));
  void close() { socket_.close(); }

 private:
  net::Frame exchange(std::uint8_t op, ByteView body);

  net::Endpoint gateway_;
  PublicKey camera_;
  std::chrono::milliseconds connect_timeout_;
  net::Socket socket_;
};

/// Gateway side of one camera connection whose first frame is `first`.
/// Returns when the camera hangs up or violates the protocol.
void serve_camera_session(gateway::Gateway& gateway, net::Socket& socket, net::Frame first,
                          std::chrono::milliseconds hello_wait);

}  // namespace vidledger::camera
