// SPDX-License-Identifier: Apache-2.0
#include "vidledger/gateway_config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace vidledger::gateway {

namespace {
std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

template <class T>
T parse_uint(std::string_view v, std::string_view key, std::size_t line) {
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError(std::string(key) + ": expected an unsigned integer, got '" + std::string(v) + "'", line);
  return out;
}

net::Endpoint parse_endpoint(std::string_view v, std::string_view key, std::size_t line) {
  try {
    return net::Endpoint::parse(v);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(key) + ": " + e.what(), line);
  }
}
}  // namespace

Membership GatewayConfig::membership() const {
  Membership m;
  m.f = consensus_f;
  for (const auto& p : peers) m.peers.push_back(p.key);
  return m;
}

void GatewayConfig::validate(const PublicKey& self) const {
  try {
    membership().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("peer table: ") + e.what(), 0);
  }
  if (!membership().contains(self)) throw ConfigError("own key " + self.hex() + " is not in the peer table", 0);
  if (interval_ms == 0) throw ConfigError("interval_ms must be > 0", 0);
  if (consensus_timeout_ms == 0) throw ConfigError("consensus_timeout_ms must be > 0", 0);
}

GatewayConfig parse_gateway_config(std::string_view text) {
  GatewayConfig cfg;
  std::set<std::string> seen;
  bool have_store = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", lineno);
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (value.empty()) throw ConfigError(key + ": empty value", lineno);
    if (key != "peer" && !seen.insert(key).second) throw ConfigError("duplicate key " + key, lineno);

    if (key == "identity") {
      cfg.identity = std::string(value);
    } else if (key == "listen") {
      cfg.listen = parse_endpoint(value, key, lineno);
    } else if (key == "store") {
      cfg.store = parse_endpoint(value, key, lineno);
      have_store = true;
    } else if (key == "interval_ms") {
      cfg.interval_ms = parse_uint<std::uint64_t>(value, key, lineno);
    } else if (key == "consensus_f") {
      cfg.consensus_f = parse_uint<std::uint32_t>(value, key, lineno);
    } else if (key == "consensus_timeout_ms") {
      cfg.consensus_timeout_ms = parse_uint<std::uint64_t>(value, key, lineno);
    } else if (key == "announce_interval_ms") {
      cfg.announce_interval_ms = parse_uint<std::uint64_t>(value, key, lineno);
    } else if (key == "metrics_csv") {
      cfg.metrics_csv = std::string(value);
    } else if (key == "ledger_file") {
      cfg.ledger_file = std::string(value);
    } else if (key == "peer") {
      const auto sp = value.find_first_of(" \t");
      if (sp == std::string_view::npos) throw ConfigError("peer: expected '<key hex> <host:port>'", lineno);
      auto pk = PublicKey::from_hex(value.substr(0, sp));
      if (!pk) throw ConfigError("peer: bad public key", lineno);
      for (const auto& p : cfg.peers)
        if (p.key == *pk) throw ConfigError("peer: duplicate key", lineno);
      cfg.peers.push_back({*pk, parse_endpoint(trim(value.substr(sp)), key, lineno)});
    } else {
      throw ConfigError("unknown key " + key, lineno);
    }
  }
  if (cfg.identity.empty()) throw ConfigError("missing key identity", 0);
  if (!have_store) throw ConfigError("missing key store", 0);
  if (cfg.peers.empty()) throw ConfigError("no peer entries", 0);
  return cfg;
}

GatewayConfig load_gateway_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string(), 0);
  std::stringstream ss;
  ss << in.rdbuf();
  GatewayConfig cfg = parse_gateway_config(ss.str());
  const auto base = path.parent_path();
  auto resolve = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  resolve(cfg.identity);
  resolve(cfg.metrics_csv);
  resolve(cfg.ledger_file);
  return cfg;
}

std::string render_gateway_config(const GatewayConfig& cfg) {
  std::ostringstream out;
  out << "identity = " << cfg.identity.string() << '\n';
  if (cfg.listen) out << "listen = " << cfg.listen->str() << '\n';
  out << "store = " << cfg.store.str() << '\n';
  out << "interval_ms = " << cfg.interval_ms << '\n';
  out << "consensus_f = " << cfg.consensus_f << '\n';
  out << "consensus_timeout_ms = " << cfg.consensus_timeout_ms << '\n';
  out << "announce_interval_ms = " << cfg.announce_interval_ms << '\n';
  for (const auto& p : cfg.peers) out << "peer = " << p.key.hex() << ' ' << p.endpoint.str() << '\n';
  if (!cfg.metrics_csv.empty()) out << "metrics_csv = " << cfg.metrics_csv.string() << '\n';
  if (!cfg.ledger_file.empty()) out << "ledger_file = " << cfg.ledger_file.string() << '\n';
  return out.str();
}

}  // namespace vidledger::gateway
