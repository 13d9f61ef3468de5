// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <deque>

#include "consensus_sim.hpp"
#include "vidledger/consensus.hpp"

using namespace vidledger;
using namespace vidledger::consensus;
using vidledger::testing::identity_for;

namespace {

struct Net {
  std::vector<DeviceIdentity> ids;
  Membership m;
  PublicKey device = identity_for("cons-camera", 0).public_key();
  std::vector<std::unique_ptr<ConsensusInstance>> nodes;
  std::vector<std::optional<ledger::BlockHeader>> decided;
  std::deque<std::pair<std::size_t, ConsensusMessage>> queue;

  explicit Net(std::size_t n = 4, std::uint32_t f = 1, ProposalValidator v = {}) {
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back(identity_for("cons-gateway", i));
      m.peers.push_back(ids.back().public_key());
    }
    m.f = f;
    for (std::size_t i = 0; i < n; ++i) nodes.push_back(std::make_unique<ConsensusInstance>(m, device, ids[i], v));
    decided.resize(n);
  }
  ledger::BlockHeader header(std::uint64_t t = 1) const {
    return ledger::build_block_header(device, Digest{}, t, m.peers[0]);
  }
  void absorb(std::size_t from, const StepResult& r) {
    if (r.decided) decided[from] = r.decided;
    for (const auto& msg : r.outbound)
      for (std::size_t to = 0; to < nodes.size(); ++to)
        if (to != from) queue.emplace_back(to, msg);
  }
  void run(const std::set<std::size_t>& crashed = {}) {
    while (!queue.empty()) {
      auto [to, msg] = queue.front();
      queue.pop_front();
      if (crashed.count(to)) continue;
      absorb(to, nodes[to]->step(msg));
    }
  }
};

}  // namespace

TEST(Consensus, AllHonestDecideWithQuorumCertificate) {
  Net net;
  const auto h = net.header();
  net.absorb(0, net.nodes[0]->propose(h));
  net.run();
  for (std::size_t i = 0; i < 4; ++i) {
    ASSERT_TRUE(net.decided[i]) << i;
    EXPECT_EQ(net.decided[i]->hash(), h.hash());
    const auto check = check_certificate(h.hash(), net.decided[i]->consensus_certificate, net.m);
    EXPECT_GE(check.valid_distinct, 3u);
    EXPECT_TRUE(check.problems.empty());
  }
}

TEST(Consensus, ExhaustiveSingleCrashStillDecides) {
  for (std::size_t crashed = 1; crashed < 4; ++crashed) {
    Net net;
    net.absorb(0, net.nodes[0]->propose(net.header()));
    net.run({crashed});
    for (std::size_t i = 0; i < 4; ++i)
      if (i != crashed) {
        EXPECT_TRUE(net.decided[i]) << "crashed " << crashed << " node " << i;
      }
  }
}

TEST(Consensus, TwoCrashesBlockProgress) {
  Net net;
  net.absorb(0, net.nodes[0]->propose(net.header()));
  net.run({2, 3});
  EXPECT_FALSE(net.decided[0]);
  EXPECT_FALSE(net.decided[1]);
}

TEST(Consensus, ExhaustiveEquivocationSplitsAreSafe) {
  // Every assignment of header A / B to the three honest peers, with the
  // byzantine proposer voting for both.
  for (unsigned mask = 0; mask < 8; ++mask) {
    Net net;
    const auto a = net.header(1), b = net.header(2);
    for (std::size_t to = 1; to < 4; ++to) {
      const auto& h = (mask >> (to - 1)) & 1 ? a : b;
      net.queue.emplace_back(to, ConsensusMessage::make(Phase::PrePrepare, h.hash(), h, net.ids[0]));
      for (const auto* x : {&a, &b}) {
        net.queue.emplace_back(to, ConsensusMessage::make(Phase::Prepare, x->hash(), std::nullopt, net.ids[0]));
        net.queue.emplace_back(to, ConsensusMessage::make(Phase::Commit, x->hash(), std::nullopt, net.ids[0]));
      }
    }
    net.run();
    std::optional<Digest> seen;
    for (std::size_t i = 1; i < 4; ++i) {
      if (!net.decided[i]) continue;
      if (seen) {
        EXPECT_EQ(*seen, net.decided[i]->hash()) << "mask " << mask;
      }
      seen = net.decided[i]->hash();
    }
    // A split of 3-0 has an honest quorum and must decide.
    if (mask == 0 || mask == 7) {
      EXPECT_TRUE(seen.has_value()) << "mask " << mask;
    }
  }
}

TEST(Consensus, RandomisedSchedulesAreSafe) {
  using vidledger::testing::Scenario;
  for (Scenario s : {Scenario::EquivocatingProposerCrashedPeer, Scenario::EquivocatingProposer,
                     Scenario::HonestProposerCrashedPeer, Scenario::AllHonest}) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      const auto r = vidledger::testing::run_schedule(seed * 7919 + 1, s);
      ASSERT_TRUE(r.agreement) << vidledger::testing::scenario_name(s) << " seed " << seed << ": " << r.problem;
      ASSERT_TRUE(r.certificates_ok) << vidledger::testing::scenario_name(s) << " seed " << seed << ": " << r.problem;
      if (s == Scenario::AllHonest || s == Scenario::HonestProposerCrashedPeer) {
        EXPECT_EQ(r.decided, r.honest_live) << vidledger::testing::scenario_name(s) << " seed " << seed;
      }
    }
  }
}

TEST(Consensus, ProposeTwiceThrows) {
  Net net;
  net.nodes[0]->propose(net.header());
  EXPECT_THROW(net.nodes[0]->propose(net.header(2)), std::logic_error);
}

TEST(Consensus, BadMessagesRejectedDuplicatesIgnored) {
  Net net;
  auto& node = *net.nodes[1];
  const auto h = net.header();

  const auto outsider = identity_for("outsider", 0);
  node.step(ConsensusMessage::make(Phase::Prepare, h.hash(), std::nullopt, outsider));
  EXPECT_EQ(node.rejected(), 1u);

  auto forged = ConsensusMessage::make(Phase::Prepare, h.hash(), std::nullopt, net.ids[2]);
  forged.signature.bytes[0] ^= 1;
  node.step(forged);
  EXPECT_EQ(node.rejected(), 2u);

  auto mismatched = ConsensusMessage::make(Phase::PrePrepare, h.hash(), net.header(9), net.ids[0]);
  EXPECT_FALSE(mismatched.well_formed());
  node.step(mismatched);
  EXPECT_EQ(node.rejected(), 3u);

  const auto vote = ConsensusMessage::make(Phase::Prepare, h.hash(), std::nullopt, net.ids[2]);
  node.step(vote);
  node.step(vote);
  EXPECT_EQ(node.ignored(), 1u);
  EXPECT_EQ(node.prepare_votes(h.hash()), 1u);
}

TEST(Consensus, DeferThenAccept) {
  bool ready = false;
  Net net(4, 1, [&](const ledger::BlockHeader&) { return ready ? Acceptance::Accept : Acceptance::Defer; });
  const auto h = net.header();
  auto r = net.nodes[1]->step(ConsensusMessage::make(Phase::PrePrepare, h.hash(), h, net.ids[0]));
  EXPECT_TRUE(r.outbound.empty());
  EXPECT_TRUE(net.nodes[1]->has_deferred());
  ready = true;
  r = net.nodes[1]->reevaluate();
  ASSERT_EQ(r.outbound.size(), 1u);
  EXPECT_EQ(r.outbound[0].phase, Phase::Prepare);
  EXPECT_EQ(net.nodes[1]->accepted_hash(), h.hash());
}

TEST(Consensus, RejectedProposalGetsNoVote) {
  Net net(4, 1, [](const ledger::BlockHeader&) { return Acceptance::Reject; });
  const auto h = net.header();
  const auto r = net.nodes[1]->step(ConsensusMessage::make(Phase::PrePrepare, h.hash(), h, net.ids[0]));
  EXPECT_TRUE(r.outbound.empty());
  EXPECT_FALSE(net.nodes[1]->accepted_hash());
}

TEST(Consensus, QuorumOfOneDecidesOnPropose) {
  Net net(1, 0);
  const auto r = net.nodes[0]->propose(net.header());
  ASSERT_TRUE(r.decided);
  EXPECT_EQ(r.decided->consensus_certificate.size(), 1u);
}

TEST(Consensus, MessageEncodingRoundTrip) {
  Net net;
  const auto h = net.header();
  for (const auto& msg : {ConsensusMessage::make(Phase::PrePrepare, h.hash(), h, net.ids[0]),
                          ConsensusMessage::make(Phase::Commit, h.hash(), std::nullopt, net.ids[3])}) {
    const auto back = ConsensusMessage::decode(msg.encode());
    EXPECT_EQ(back, msg);
    EXPECT_TRUE(back.well_formed());
  }
  Bytes junk{1, 2, 3};
  EXPECT_THROW(ConsensusMessage::decode(junk), DecodeError);
}
