// SPDX-License-Identifier: Apache-2.0
#include "vidledger/local_network.hpp"

namespace vidledger::gateway {

class LocalNetwork::Endpoint final : public PeerTransport {
 public:
  Endpoint(std::shared_ptr<State> state, PublicKey self) : state_(std::move(state)), self_(self) {}

  void send(const PublicKey& to, const PeerMessage& message) override {
    std::lock_guard lock(state_->mutex);
    ++state_->sent;
    auto it = state_->nodes.find(to);
    if (it == state_->nodes.end() || state_->down.count(self_) || state_->down.count(to) ||
        (state_->filter && state_->filter(self_, to, message))) {
      ++state_->dropped;
      return;
    }
    it->second->deliver(message.encode());
  }

 private:
  std::shared_ptr<State> state_;
  PublicKey self_;
};

LocalNetwork::LocalNetwork() : state_(std::make_shared<State>()) {}

std::shared_ptr<PeerTransport> LocalNetwork::transport_for(const PublicKey& self) {
  return std::make_shared<Endpoint>(state_, self);
}

void LocalNetwork::attach(Gateway& gateway) {
  std::lock_guard lock(state_->mutex);
  state_->nodes[gateway.public_key()] = &gateway;
}

void LocalNetwork::detach(const PublicKey& key) {
  std::lock_guard lock(state_->mutex);
  state_->nodes.erase(key);
}

void LocalNetwork::set_down(const PublicKey& key, bool down) {
  std::lock_guard lock(state_->mutex);
  if (down)
    state_->down.insert(key);
  else
    state_->down.erase(key);
}

void LocalNetwork::set_drop_filter(DropFilter filter) {
  std::lock_guard lock(state_->mutex);
  state_->filter = std::move(filter);
}

void LocalNetwork::drop_randomly(PeerKind kind, double p, std::uint64_t seed) {
  // The filter runs under the state mutex, so the generator needs no lock.
  auto rng = std::make_shared<std::mt19937_64>(seed);
  set_drop_filter([rng, kind, p](const PublicKey&, const PublicKey&, const PeerMessage& m) {
    if (m.kind() != kind) return false;
    return std::uniform_real_distribution<double>(0.0, 1.0)(*rng) < p;
  });
}

std::uint64_t LocalNetwork::sent() const {
  std::lock_guard lock(state_->mutex);
  return state_->sent;
}

std::uint64_t LocalNetwork::dropped() const {
  std::lock_guard lock(state_->mutex);
  return state_->dropped;
}

}  // namespace vidledger::gateway
