// SPDX-License-Identifier: Apache-2.0
#pragma once

// Gateway-to-gateway messages. Every message is signed by its sender:
//
//   envelope     = field(u8 kind) | field(body) | field(sender key) | field(signature)
//   signed bytes = field(u8 kind) | field(body)
//
// Bodies (canonical encoding):
//   HELLO_ANNOUNCE 1  u64 count | count x (field(device) | u64 tx_count | field(cert digest))
//                     in chain order
//   CONSENSUS      2  field(device) | field(consensus message)
//   TX_UPDATE      3  field(device) | field(transaction encoding)
//   SYNC_REQUEST   4  field(device) | u64 from_sequence
//   SYNC_RESPONSE  5  field(device) | u8 has_header | [field(certified header)]
//                     | u64 from_sequence | u64 count | count x field(transaction encoding)
//
// HELLO_ANNOUNCE is the periodic anti-entropy digest of a gateway's chain.
// SYNC_RESPONSE doubles as the unsolicited block notification a managing
// gateway publishes after its camera's block is inserted. Certificates are
// merged by union of valid COMMIT votes, so the digest lets peers notice
// they hold different vote sets for the same header.

#include <optional>
#include <variant>
#include <vector>

#include "vidledger/consensus.hpp"
#include "vidledger/ledger.hpp"

namespace vidledger::gateway {

enum class PeerKind : std::uint8_t {
  HelloAnnounce = 1,
  Consensus = 2,
  TxUpdate = 3,
  SyncRequest = 4,
  SyncResponse = 5,
};

std::string_view to_string(PeerKind kind);

struct ChainSummaryEntry {
  PublicKey device;
  std::uint64_t tx_count = 0;
  Digest certificate_digest{};
  bool operator==(const ChainSummaryEntry&) const = default;
};

struct HelloAnnounce {
  std::vector<ChainSummaryEntry> blocks;
  bool operator==(const HelloAnnounce&) const = default;
};

struct ConsensusEnvelope {
  PublicKey device;
  consensus::ConsensusMessage message;
  bool operator==(const ConsensusEnvelope&) const = default;
};

struct TxUpdate {
  PublicKey device;
  ledger::Transaction tx;
  bool operator==(const TxUpdate&) const = default;
};

struct SyncRequest {
  PublicKey device;
  std::uint64_t from_sequence = 0;
  bool operator==(const SyncRequest&) const = default;
};

struct SyncResponse {
  PublicKey device;
  std::optional<ledger::BlockHeader> header;
  std::uint64_t from_sequence = 0;
  std::vector<ledger::Transaction> transactions;
  bool operator==(const SyncResponse&) const = default;
};

using PeerBody = std::variant<HelloAnnounce, ConsensusEnvelope, TxUpdate, SyncRequest, SyncResponse>;

PeerKind kind_of(const PeerBody& body);
Bytes encode_body(const PeerBody& body);
/// Throws DecodeError.
PeerBody decode_body(PeerKind kind, ByteView data);

/// SHA-256 over the canonical encoding of the entries, in the given order.
Digest certificate_digest(const std::vector<CertificateEntry>& certificate);

struct PeerMessage {
  PeerBody body;
  PublicKey sender;
  Signature signature;

  PeerKind kind() const { return kind_of(body); }

  static PeerMessage make(PeerBody body, const DeviceIdentity& signer);
  bool signature_valid() const;

  Bytes encode() const;
  /// Throws DecodeError.
  static PeerMessage decode(ByteView data);

 private:
  /// Exact signed bytes as received, so verification never depends on
  /// re-encoding.
  Bytes signed_bytes_;
};

}  // namespace vidledger::gateway
