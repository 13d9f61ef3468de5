// SPDX-License-Identifier: Apache-2.0
#include "vidledger/cas_service.hpp"

namespace vidledger::cas {

namespace {
Bytes error_body(bool transient, std::string_view message) {
  Bytes body;
  body.push_back(transient ? 1 : 0);
  body.insert(body.end(), message.begin(), message.end());
  return body;
}
}  // namespace

StoreServer::StoreServer(std::shared_ptr<ChunkStore> store, const net::Endpoint& listen)
    : store_(std::move(store)), server_(listen, [this](net::Socket& s) { serve(s); }) {}

void StoreServer::serve(net::Socket& client) {
  while (auto frame = net::read_frame(client)) {
    try {
      switch (frame->opcode) {
        case opcode::kPut: {
          if (frame->body.empty()) {
            net::write_frame(client, opcode::kError, error_body(false, "empty content"));
            break;
          }
          const ContentAddress addr = store_->put(frame->body);
          net::write_frame(client, opcode::kAddress, addr.digest);
          break;
        }
        case opcode::kGet: {
          if (frame->body.size() != 32) {
            net::write_frame(client, opcode::kError, error_body(false, "address must be 32 bytes"));
            break;
          }
          ContentAddress addr;
          std::copy(frame->body.begin(), frame->body.end(), addr.digest.begin());
          try {
            auto content = store_->get(addr);
            if (content)
              net::write_frame(client, opcode::kContent, *content);
            else
              net::write_frame(client, opcode::kNotFound, {});
          } catch (const IntegrityError&) {
            net::write_frame(client, opcode::kIntegrityFail, {});
          }
          break;
        }
        default:
          net::write_frame(client, opcode::kError,
                           error_body(false, "unknown opcode " + std::to_string(frame->opcode)));
          return;
      }
    } catch (const StoreIoError& e) {
      net::write_frame(client, opcode::kError, error_body(e.transient(), e.what()));
    }
  }
}

RemoteStore::RemoteStore(net::Endpoint endpoint, std::chrono::milliseconds connect_timeout)
    : endpoint_(std::move(endpoint)), connect_timeout_(connect_timeout) {}

net::Socket RemoteStore::acquire() {
  {
    std::lock_guard lock(mutex_);
    if (!idle_.empty()) {
      net::Socket s = std::move(idle_.back());
      idle_.pop_back();
      return s;
    }
  }
  return net::Socket::connect(endpoint_, connect_timeout_);
}

void RemoteStore::release(net::Socket s) {
  std::lock_guard lock(mutex_);
  if (idle_.size() < 16) idle_.push_back(std::move(s));
}

net::Frame RemoteStore::round_trip(std::uint8_t op, ByteView body) {
  // A pooled socket may have been closed by the server since last use; retry
  // once on a fresh connection before reporting the store unreachable.
  for (int attempt = 0; attempt < 2; ++attempt) {
    net::Socket s;
    bool pooled = false;
    try {
      {
        std::lock_guard lock(mutex_);
        pooled = !idle_.empty();
      }
      s = acquire();
      net::write_frame(s, op, body);
      auto reply = net::read_frame(s);
      if (!reply) throw net::NetError("store closed connection");
      release(std::move(s));
      return std::move(*reply);
    } catch (const net::NetError& e) {
      if (pooled && attempt == 0) continue;
      throw StoreIoError("store " + endpoint_.str() + " unreachable: " + e.what(), true);
    }
  }
  throw StoreIoError("store " + endpoint_.str() + " unreachable", true);
}

ContentAddress RemoteStore::put(ByteView content) {
  if (content.empty()) throw std::invalid_argument("cannot store empty content");
  const net::Frame reply = round_trip(opcode::kPut, content);
  if (reply.opcode == opcode::kError) {
    const bool transient = !reply.body.empty() && reply.body[0] != 0;
    throw StoreIoError("store error: " + std::string(reply.body.begin() + (reply.body.empty() ? 0 : 1), reply.body.end()),
                       transient);
  }
  if (reply.opcode != opcode::kAddress || reply.body.size() != 32)
    throw StoreIoError("malformed PUT reply", true);
  ContentAddress addr;
  std::copy(reply.body.begin(), reply.body.end(), addr.digest.begin());
  // The storage layer is untrusted: the address must be the one we derive.
  if (addr != ContentAddress::of(content))
    throw StoreIoError("store returned address " + addr.hex() + " that does not match content", false);
  return addr;
}

std::optional<Bytes> RemoteStore::get(const ContentAddress& address) {
  net::Frame reply = round_trip(opcode::kGet, address.digest);
  switch (reply.opcode) {
    case opcode::kContent:
      if (!verify_address(address, reply.body)) throw IntegrityError(address);
      return std::move(reply.body);
    case opcode::kNotFound:
      return std::nullopt;
    case opcode::kIntegrityFail:
      throw IntegrityError(address);
    case opcode::kError: {
      const bool transient = !reply.body.empty() && reply.body[0] != 0;
      throw StoreIoError("store error", transient);
    }
    default:
      throw StoreIoError("malformed GET reply", true);
  }
}

}  // namespace vidledger::cas
