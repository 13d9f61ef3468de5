// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>

#include "test_support.hpp"
#include "vidledger/gateway_config.hpp"

using namespace vidledger;
using namespace vidledger::gateway;
using vidledger::testing::identity_for;

namespace {
std::string key(std::size_t i) { return identity_for("cfg", i).device_id(); }

std::string sample() {
  std::string s =
      "# gateway 0\n"
      "identity = keys/g0.seed\n"
      "listen = 127.0.0.1:7000\n"
      "store = 127.0.0.1:6000\n"
      "interval_ms = 5000\n"
      "consensus_timeout_ms = 1500\n";
  for (std::size_t i = 0; i < 4; ++i) s += "peer = " + key(i) + " 127.0.0.1:" + std::to_string(7000 + i) + "\n";
  return s;
}

std::size_t error_line(const std::string& text) {
  try {
    parse_gateway_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  ADD_FAILURE() << "no ConfigError";
  return 0;
}
}  // namespace

TEST(GatewayConfig, ParsesSample) {
  const auto c = parse_gateway_config(sample());
  EXPECT_EQ(c.identity, "keys/g0.seed");
  ASSERT_TRUE(c.listen);
  EXPECT_EQ(c.listen->port, 7000);
  EXPECT_EQ(c.store.str(), "127.0.0.1:6000");
  EXPECT_EQ(c.interval_ms, 5000u);
  EXPECT_EQ(c.consensus_timeout_ms, 1500u);
  EXPECT_EQ(c.announce_interval_ms, 1000u);
  EXPECT_EQ(c.consensus_f, 1u);
  ASSERT_EQ(c.peers.size(), 4u);
  EXPECT_EQ(c.membership().quorum(), 3u);
  EXPECT_NO_THROW(c.validate(identity_for("cfg", 2).public_key()));
  EXPECT_THROW(c.validate(identity_for("cfg", 9).public_key()), ConfigError);
}

TEST(GatewayConfig, RenderRoundTrips) {
  const auto c = parse_gateway_config(sample());
  const auto again = parse_gateway_config(render_gateway_config(c));
  EXPECT_EQ(again.peers, c.peers);
  EXPECT_EQ(again.identity, c.identity);
  EXPECT_EQ(again.interval_ms, c.interval_ms);
}

TEST(GatewayConfig, ErrorsNameTheLine) {
  EXPECT_EQ(error_line(sample() + "colour = blue\n"), 11u);
  EXPECT_EQ(error_line(sample() + "store = 1.2.3.4:1\n"), 11u);
  EXPECT_EQ(error_line(sample() + "interval_ms = soon\n"), 11u);
  EXPECT_EQ(error_line(sample() + "peer = abcd 127.0.0.1:1\n"), 11u);
  EXPECT_EQ(error_line(sample() + "just words\n"), 11u);
}

TEST(GatewayConfig, MissingRequiredKeys) {
  EXPECT_THROW(parse_gateway_config("store = 127.0.0.1:1\n"), ConfigError);
  EXPECT_THROW(parse_gateway_config("identity = a\nstore = 127.0.0.1:1\n"), ConfigError);
}

TEST(GatewayConfig, TooFewPeersForF) {
  std::string s = "identity = k\nstore = 127.0.0.1:1\nconsensus_f = 1\n";
  for (std::size_t i = 0; i < 3; ++i) s += "peer = " + key(i) + " 127.0.0.1:" + std::to_string(7000 + i) + "\n";
  const auto c = parse_gateway_config(s);
  EXPECT_THROW(c.validate(identity_for("cfg", 0).public_key()), ConfigError);
}

TEST(GatewayConfig, LoadResolvesRelativePaths) {
  vidledger::testing::TempDir dir("cfg");
  {
    std::ofstream out(dir.path() / "g.conf");
    out << sample() << "ledger_file = data/ledger.vlg\n";
  }
  const auto c = load_gateway_config(dir.path() / "g.conf");
  EXPECT_EQ(c.identity, dir.path() / "keys/g0.seed");
  EXPECT_EQ(c.ledger_file, dir.path() / "data/ledger.vlg");
  EXPECT_THROW(load_gateway_config(dir.path() / "absent.conf"), ConfigError);
}
