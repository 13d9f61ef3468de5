// SPDX-License-Identifier: Apache-2.0
#pragma once

// Store wire protocol (frames as in net.hpp):
//
//   request   PUT  0x01 body = content          -> ADDRESS 0x81 body = 32-byte digest
//             GET  0x02 body = 32-byte digest   -> CONTENT 0x82 body = content
//                                               |  NOT_FOUND 0x83 (empty)
//                                               |  INTEGRITY_FAIL 0x84 (empty)
//   any request may also be answered by ERROR 0x85 body = transient u8 | utf-8 message

#include <memory>
#include <mutex>
#include <vector>

#include "vidledger/cas_store.hpp"
#include "vidledger/net.hpp"

namespace vidledger::cas {

namespace opcode {
inline constexpr std::uint8_t kPut = 0x01;
inline constexpr std::uint8_t kGet = 0x02;
inline constexpr std::uint8_t kAddress = 0x81;
inline constexpr std::uint8_t kContent = 0x82;
inline constexpr std::uint8_t kNotFound = 0x83;
inline constexpr std::uint8_t kIntegrityFail = 0x84;
inline constexpr std::uint8_t kError = 0x85;
}  // namespace opcode

/// Serves a ChunkStore over TCP; one thread per client connection.
class StoreServer {
 public:
  StoreServer(std::shared_ptr<ChunkStore> store, const net::Endpoint& listen);
  net::Endpoint endpoint() const { return server_.endpoint(); }
  void stop() { server_.stop(); }

 private:
  void serve(net::Socket& client);

  std::shared_ptr<ChunkStore> store_;
  net::FrameServer server_;
};

/// Client side of the store protocol. Keeps a small pool of connections so
/// concurrent camera sessions do not serialise on one socket. Any transport
/// failure surfaces as a transient StoreIoError.
class RemoteStore final : public ChunkStore {
 public:
  explicit RemoteStore(net::Endpoint endpoint, std::chrono::milliseconds connect_timeout = std::chrono::seconds(2));

  ContentAddress put(ByteView content) override;
  std::optional<Bytes> get(const ContentAddress& address) override;

  const net::Endpoint& endpoint() const { return endpoint_; }

 private:
  net::Frame round_trip(std::uint8_t op, ByteView body);
  net::Socket acquire();
  void release(net::Socket s);

  net::Endpoint endpoint_;
  std::chrono::milliseconds connect_timeout_;
  std::mutex mutex_;
  std::vector<net::Socket> idle_;
};

}  // namespace vidledger::cas
