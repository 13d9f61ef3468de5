// SPDX-License-Identifier: Apache-2.0
#pragma once

// gatewayd configuration file. One `key = value` per line, '#' starts a
// comment, blank lines ignored. Keys:
//
//   identity             path to the 32-byte seed file        required
//   listen               host:port for cameras and peers      required unless given on the command line
//   store                host:port of casd                    required
//   interval_ms          chunk interval                       default 10000
//   consensus_f          tolerated faulty gateways            default 1
//   consensus_timeout_ms per-instance timeout                 default 2000
//   announce_interval_ms anti-entropy period                  default 1000
//   peer                 <64 hex key> <host:port>             repeated, includes this gateway
//   metrics_csv          per-transaction timing log           optional
//   ledger_file          append-only ledger log               optional
//
// Relative paths are resolved against the config file's directory.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vidledger/certificate.hpp"
#include "vidledger/net.hpp"

namespace vidledger::gateway {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct PeerEntry {
  PublicKey key;
  net::Endpoint endpoint;
  bool operator==(const PeerEntry&) const = default;
};

struct GatewayConfig {
  std::filesystem::path identity;
  std::optional<net::Endpoint> listen;
  net::Endpoint store;
  std::uint64_t interval_ms = 10'000;
  std::uint32_t consensus_f = 1;
  std::uint64_t consensus_timeout_ms = 2'000;
  std::uint64_t announce_interval_ms = 1'000;
  std::vector<PeerEntry> peers;
  std::filesystem::path metrics_csv;
  std::filesystem::path ledger_file;

  Membership membership() const;
  /// Throws ConfigError unless `self` is a listed peer and the peer set
  /// satisfies n >= 3f + 1.
  void validate(const PublicKey& self) const;
};

/// Throws ConfigError.
GatewayConfig parse_gateway_config(std::string_view text);
GatewayConfig load_gateway_config(const std::filesystem::path& path);
std::string render_gateway_config(const GatewayConfig& config);

}  // namespace vidledger::gateway
