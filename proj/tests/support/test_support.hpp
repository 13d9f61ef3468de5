// SPDX-License-Identifier: Apache-2.0
#pragma once

// Shared fixtures: scratch directories, deterministic identities and a small
// in-process gateway cluster on LocalNetwork.

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "vidledger/cas_store.hpp"
#include "vidledger/gateway.hpp"
#include "vidledger/identity.hpp"
#include "vidledger/local_network.hpp"
#include "vidledger/sha256.hpp"

namespace vidledger::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("vidledger-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline DeviceIdentity identity_for(std::string_view role, std::uint64_t i) {
  CanonicalWriter w;
  w.field(std::string_view("vidledger-test")).field(role).u64(i);
  return DeviceIdentity::from_seed(sha256(std::move(w).take()));
}

inline bool wait_until(const std::function<bool()>& pred, std::chrono::milliseconds limit,
                       std::chrono::milliseconds poll = std::chrono::milliseconds(10)) {
  const auto deadline = std::chrono::steady_clock::now() + limit;
  while (!pred()) {
    if (std::chrono::steady_clock::now() > deadline) return false;
    std::this_thread::sleep_for(poll);
  }
  return true;
}

/// n gateways sharing one FileStore. Call stop() (or let the destructor run)
/// before the network goes away.
struct Cluster {
  TempDir dir{"cluster"};
  std::shared_ptr<cas::FileStore> store;
  Membership membership;
  gateway::LocalNetwork network;
  std::vector<std::unique_ptr<gateway::Gateway>> nodes;

  explicit Cluster(std::size_t n, std::uint32_t f,
                   std::function<void(std::size_t, gateway::GatewayOptions&)> tweak = {}) {
    store = std::make_shared<cas::FileStore>(dir.path() / "store");
    std::vector<DeviceIdentity> ids;
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back(identity_for("gateway", i));
      membership.peers.push_back(ids.back().public_key());
    }
    membership.f = f;
    for (std::size_t i = 0; i < n; ++i) {
      gateway::GatewayOptions opt;
      opt.membership = membership;
      opt.store = store;
      opt.consensus_timeout = std::chrono::milliseconds(1000);
      opt.announce_interval = std::chrono::milliseconds(100);
      opt.seed = 7 + i;
      if (tweak) tweak(i, opt);
      nodes.push_back(std::make_unique<gateway::Gateway>(ids[i], std::move(opt),
                                                          network.transport_for(ids[i].public_key())));
      network.attach(*nodes.back());
    }
    for (auto& g : nodes) g->start();
  }
  ~Cluster() { stop(); }

  void stop() {
    for (auto& g : nodes) {
      if (!g) continue;
      g->stop();
      network.detach(g->public_key());
    }
    nodes.clear();
  }

  gateway::Gateway& operator[](std::size_t i) { return *nodes.at(i); }

  bool converged() const {
    const Bytes ref = nodes.front()->serialized_ledger();
    for (std::size_t i = 1; i < nodes.size(); ++i)
      if (nodes[i]->serialized_ledger() != ref) return false;
    return true;
  }

  bool wait_converged(std::chrono::milliseconds limit) {
    return wait_until([&] { return converged(); }, limit, std::chrono::milliseconds(25));
  }
};

}  // namespace vidledger::testing
