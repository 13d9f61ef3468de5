// SPDX-License-Identifier: Apache-2.0
#pragma once

// In-process peer transport. Messages are encoded, optionally dropped, and
// queued on the receiving gateway's inbox, so gateways in one process talk
// exactly as they would over TCP minus the sockets.

#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <unordered_map>

#include "vidledger/gateway.hpp"

namespace vidledger::gateway {

class LocalNetwork {
 public:
  /// True drops the message.
  using DropFilter = std::function<bool(const PublicKey& from, const PublicKey& to, const PeerMessage& message)>;

  LocalNetwork();

  /// Sending side for the gateway with key `self`.
  std::shared_ptr<PeerTransport> transport_for(const PublicKey& self);
  /// Receiving side. Detach before the gateway is destroyed.
  void attach(Gateway& gateway);
  void detach(const PublicKey& key);

  /// A down node neither sends nor receives.
  void set_down(const PublicKey& key, bool down);
  void set_drop_filter(DropFilter filter);
  /// Drops each message of `kind` with probability p (seeded, repeatable).
  void drop_randomly(PeerKind kind, double p, std::uint64_t seed);

  std::uint64_t sent() const;
  std::uint64_t dropped() const;

 private:
  struct State {
    std::mutex mutex;
    std::unordered_map<PublicKey, Gateway*> nodes;
    std::set<PublicKey> down;
    DropFilter filter;
    std::uint64_t sent = 0;
    std::uint64_t dropped = 0;
  };
  class Endpoint;

  std::shared_ptr<State> state_;
};

}  // namespace vidledger::gateway
