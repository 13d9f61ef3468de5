// SPDX-License-Identifier: Apache-2.0
#pragma once

// Per-device chain: one block per camera, transactions appended into that
// block over time. Blocks are linked by header hash in insertion order; the
// transactions inside a block form their own hash chain rooted at the header.
//
// Hashed material (canonical encoding, see bytes.hpp):
//   header_hash      = SHA-256(device_key | previous_header_hash | u64 created_at_ms | managing_gateway)
//   payload encoding = storage_address | metadata_hash | u64 timestamp_ms
//   transaction_hash = SHA-256(previous_transaction_hash | u64 sequence_number | payload encoding)
// The gateway signs the 32 transaction_hash bytes.

#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "vidledger/bytes.hpp"
#include "vidledger/cas_store.hpp"
#include "vidledger/certificate.hpp"
#include "vidledger/identity.hpp"

namespace vidledger::ledger {

struct BlockHeader {
  PublicKey device_public_key;
  Digest previous_header_hash{};
  std::uint64_t created_at_ms = 0;
  PublicKey managing_gateway;
  /// COMMIT votes over hash(); not part of the hashed encoding.
  std::vector<CertificateEntry> consensus_certificate;

  Bytes canonical_encoding() const;
  Digest hash() const;

  bool operator==(const BlockHeader&) const = default;
};

/// Uncertified header; the certificate is attached once consensus decides.
BlockHeader build_block_header(const PublicKey& device_public_key, const Digest& previous_header_hash,
                               std::uint64_t created_at_ms, const PublicKey& managing_gateway);

struct TransactionPayload {
  cas::ContentAddress storage_address;
  Digest metadata_hash{};
  std::uint64_t timestamp_ms = 0;

  Bytes canonical_encoding() const;
  bool operator==(const TransactionPayload&) const = default;
};

struct Transaction {
  Digest previous_transaction_hash{};
  std::uint64_t sequence_number = 0;
  TransactionPayload payload;
  Signature gateway_signature;
  Digest transaction_hash{};

  static Digest compute_hash(const Digest& previous, std::uint64_t sequence, const TransactionPayload& payload);
  Digest computed_hash() const { return compute_hash(previous_transaction_hash, sequence_number, payload); }

  bool operator==(const Transaction&) const = default;
};

struct Block {
  BlockHeader header;
  Digest header_hash{};
  std::vector<Transaction> transactions;

  /// Hash the next transaction must link to.
  const Digest& tail_hash() const {
    return transactions.empty() ? header_hash : transactions.back().transaction_hash;
  }
  bool operator==(const Block&) const = default;
};

enum class LedgerErrorKind {
  UnknownDevice,
  DuplicateDevice,
  WrongGateway,
  TimestampRegression,
  BrokenLink,
  SequenceMismatch,
  HashMismatch,
  BadSignature,
  InsufficientCertificate,
};

std::string_view to_string(LedgerErrorKind kind);

class LedgerError : public std::runtime_error {
 public:
  LedgerError(LedgerErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}
  LedgerErrorKind kind() const noexcept { return kind_; }

 private:
  LedgerErrorKind kind_;
};

/// Single-threaded ledger value. Every mutating call either leaves the
/// ledger untouched (and throws LedgerError) or preserves all invariants.
/// Gateways wrap it with their own locking; see gateway.hpp.
class Ledger {
 public:
  explicit Ledger(Membership membership);

  /// Builds a ledger from possibly tampered parts without checking anything.
  /// Only for loaders and audits; run validate_ledger() on the result.
  static Ledger from_untrusted(Membership membership, std::vector<Block> blocks);

  const Membership& membership() const { return membership_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t size() const { return blocks_.size(); }
  bool empty() const { return blocks_.empty(); }
  /// header_hash of the last block, or 32 zero bytes.
  Digest tip_hash() const;

  const Block* find_block(const PublicKey& device) const;
  std::optional<std::size_t> block_index(const PublicKey& device) const;

  /// Header linked to the current tip. Throws DuplicateDevice.
  BlockHeader build_block_header(const PublicKey& device, std::uint64_t created_at_ms,
                                 const PublicKey& managing_gateway) const;

  /// Appends a certified header. Requires a fresh device, a link to the
  /// current tip and a quorum of valid COMMIT signatures.
  const Block& insert_block(BlockHeader certified);

  /// Swaps in another valid certificate for the same header (replicas adopt
  /// the managing gateway's certificate so serialisations converge).
  void replace_certificate(const PublicKey& device, std::vector<CertificateEntry> certificate);

  /// Computes hash and signature for the next transaction (no mutation).
  Transaction prepare_transaction(const PublicKey& device, const TransactionPayload& payload,
                                  const DeviceIdentity& gateway) const;

  /// Verifies and appends a fully formed transaction: next sequence number,
  /// hash link, recomputed hash, managing-gateway signature and timestamp
  /// order. Used both for local appends and replica updates.
  const Transaction& commit_transaction(const PublicKey& device, Transaction tx);

  const Transaction& append_transaction(const PublicKey& device, const TransactionPayload& payload,
                                        const DeviceIdentity& gateway);

  bool operator==(const Ledger& other) const {
    return membership_ == other.membership_ && blocks_ == other.blocks_;
  }

 private:
  Ledger() = default;
  Block& mutable_block(const PublicKey& device);

  Membership membership_;
  std::vector<Block> blocks_;
  std::unordered_map<PublicKey, std::size_t> index_;
};

}  // namespace vidledger::ledger
