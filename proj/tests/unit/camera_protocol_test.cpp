// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "test_support.hpp"
#include "vidledger/camera_protocol.hpp"
#include "vidledger/gateway_config.hpp"
#include "vidledger/tcp_node.hpp"

using namespace vidledger;
using namespace std::chrono_literals;
using vidledger::testing::Cluster;
using vidledger::testing::identity_for;

namespace {
PublicKey cam_key(std::size_t i) { return identity_for("tcp-camera", i).public_key(); }

std::uint16_t free_port() {
  net::Listener l(net::Endpoint{"127.0.0.1", 0});
  return l.port();
}
}  // namespace

TEST(CameraProtocol, StreamsChunksAndGetsReceipts) {
  Cluster c(4, 1);
  gateway::GatewayServer server(c[0], net::Endpoint{"127.0.0.1", 0});
  camera::CameraClient client(server.endpoint(), cam_key(0));
  client.hello(20s);
  chunk::SyntheticCamera src(1, 2048);
  for (std::uint64_t k = 0; k < 4; ++k) {
    const auto r = client.send_chunk(src.next_frame());
    EXPECT_EQ(r.sequence, k);
    const auto l = c[0].ledger_snapshot();
    EXPECT_EQ(l.find_block(cam_key(0))->transactions.at(k).transaction_hash, r.transaction_hash);
  }
  EXPECT_THROW(client.send_chunk(Bytes{'b', 'a', 'd'}), camera::CameraRejected);
  // The session survives a rejected chunk.
  EXPECT_EQ(client.send_chunk(src.next_frame()).sequence, 4u);
  client.close();
  server.stop();
}

TEST(CameraProtocol, HelloAtWrongGatewayIsRejected) {
  Cluster c(4, 1);
  gateway::GatewayServer s0(c[0], net::Endpoint{"127.0.0.1", 0});
  gateway::GatewayServer s1(c[1], net::Endpoint{"127.0.0.1", 0});
  camera::CameraClient first(s0.endpoint(), cam_key(1));
  first.hello(20s);
  ASSERT_TRUE(c.wait_converged(10s));
  camera::CameraClient second(s1.endpoint(), cam_key(1));
  EXPECT_THROW(second.hello(10s), camera::CameraRejected);
}

TEST(CameraProtocol, ChunkBeforeHelloClosesConnection) {
  Cluster c(4, 1);
  gateway::GatewayServer server(c[0], net::Endpoint{"127.0.0.1", 0});
  auto sock = net::Socket::connect(server.endpoint());
  chunk::SyntheticCamera src(2, 64);
  net::write_frame(sock, camera::opcode::kChunk, src.next_frame());
  bool closed = false;
  try {
    closed = !net::read_frame(sock).has_value();
  } catch (const net::NetError&) {
    closed = true;
  }
  EXPECT_TRUE(closed);
  EXPECT_EQ(c[0].ledger_snapshot().size(), 0u);
}

TEST(TcpPeers, FourGatewaysOverLoopbackConverge) {
  vidledger::testing::TempDir dir("tcp");
  auto store = std::make_shared<cas::FileStore>(dir.path() / "store");
  std::vector<DeviceIdentity> ids;
  std::vector<gateway::PeerEntry> peers;
  Membership m;
  m.f = 1;
  for (std::size_t i = 0; i < 4; ++i) {
    ids.push_back(identity_for("tcp-gateway", i));
    m.peers.push_back(ids.back().public_key());
    peers.push_back({ids.back().public_key(), net::Endpoint{"127.0.0.1", free_port()}});
  }
  std::vector<std::shared_ptr<gateway::TcpPeerTransport>> transports;
  std::vector<std::unique_ptr<gateway::Gateway>> nodes;
  std::vector<std::unique_ptr<gateway::GatewayServer>> servers;
  for (std::size_t i = 0; i < 4; ++i) {
    gateway::GatewayOptions o;
    o.membership = m;
    o.store = store;
    o.consensus_timeout = 1000ms;
    o.announce_interval = 100ms;
    o.seed = 40 + i;
    transports.push_back(std::make_shared<gateway::TcpPeerTransport>(peers, ids[i].public_key()));
    nodes.push_back(std::make_unique<gateway::Gateway>(ids[i], std::move(o), transports.back()));
    servers.push_back(std::make_unique<gateway::GatewayServer>(*nodes.back(), peers[i].endpoint));
    nodes.back()->start();
  }

  camera::CameraClient client(servers[2]->endpoint(), cam_key(7));
  client.hello(30s);
  chunk::SyntheticCamera src(3, 512);
  for (int k = 0; k < 5; ++k) client.send_chunk(src.next_frame());
  client.close();

  const bool converged = vidledger::testing::wait_until(
      [&] {
        const Bytes ref = nodes[0]->serialized_ledger();
        for (std::size_t i = 1; i < 4; ++i)
          if (nodes[i]->serialized_ledger() != ref) return false;
        return true;
      },
      20s, 50ms);
  EXPECT_TRUE(converged);
  EXPECT_EQ(nodes[0]->transaction_count(cam_key(7)), 5u);

  for (auto& s : servers) s->stop();
  for (auto& n : nodes) n->stop();
  for (auto& t : transports) t->stop();
}
