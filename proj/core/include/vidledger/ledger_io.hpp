// SPDX-License-Identifier: Apache-2.0
#pragma once

// Ledger file format.
//
//   file   = "VLG1" record*
//   record = u32 BE length (= 1 + body size) | u8 type | body
//
//   CONFIG 0x01  u64 f | u64 n | n x field(peer key)
//   BLOCK  0x02  header encoding | u64 cert count | count x (field(gateway) | field(signature))
//   TX     0x03  field(device key) | transaction encoding
//
//   header encoding      = field(device) | field(prev header hash) | u64 created_at_ms | field(managing gateway)
//   transaction encoding = field(prev tx hash) | u64 sequence | field(payload encoding)
//                          | field(signature) | field(transaction hash)
//
// The file is append-only. Gateways append a BLOCK record when a certified
// block is inserted and a TX record per transaction, so records of different
// blocks may interleave. A later BLOCK record for an already known header
// replaces that header's certificate. serialize_ledger() writes the canonical
// grouped form (CONFIG, then each BLOCK followed by its TXs), which is what
// replicas compare byte for byte.

#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <string>

#include "vidledger/ledger.hpp"
#include "vidledger/validate.hpp"

namespace vidledger::ledger {

inline constexpr std::array<std::uint8_t, 4> kLedgerMagic{'V', 'L', 'G', '1'};

enum class RecordType : std::uint8_t { Config = 0x01, Block = 0x02, Tx = 0x03 };

/// Size of a transaction encoding; every field is fixed width.
inline constexpr std::size_t kTransactionEncodingBytes = (4 + 32) + (4 + 8) + (4 + 84) + (4 + 64) + (4 + 32);

/// Unreadable ledger structure; `offset` is the byte position in the file.
class LedgerFormatError : public std::runtime_error {
 public:
  LedgerFormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

Bytes encode_transaction(const Transaction& tx);
Transaction decode_transaction(ByteView data);

/// Header encoding followed by the certificate.
Bytes encode_certified_header(const BlockHeader& header);
BlockHeader decode_certified_header(ByteView data);

Bytes encode_membership(const Membership& m);
Membership decode_membership(ByteView data);

Bytes encode_record(RecordType type, ByteView body);
Bytes block_record(const BlockHeader& header);
Bytes transaction_record(const PublicKey& device, const Transaction& tx);

/// Canonical grouped serialisation (see file comment).
Bytes serialize_ledger(const Ledger& ledger);
void save_ledger_file(const Ledger& ledger, const std::filesystem::path& path);

struct TransactionSpan {
  PublicKey device;
  std::uint64_t position = 0;
  /// Byte range of the transaction encoding inside the loaded buffer.
  std::size_t offset = 0;
  std::size_t length = 0;
};

struct LoadedLedger {
  Ledger ledger;
  /// Encoding-level defects found while loading (malformed fixed-width
  /// fields, transactions for unknown devices, duplicate blocks).
  std::vector<Violation> defects;
  /// Where each transaction encoding sits in the input, in file order.
  std::vector<TransactionSpan> transaction_spans;
};

/// Loads any valid record order. Transaction records are decoded by their
/// fixed layout so a corrupted length prefix inside a transaction is reported
/// as a defect at that transaction instead of aborting the load. Throws
/// LedgerFormatError for damage that makes the record stream unreadable.
LoadedLedger load_ledger(ByteView data);
/// Accepts the binary format or the JSON export.
LoadedLedger load_ledger_file(const std::filesystem::path& path);

std::string export_json(const Ledger& ledger);
/// Throws LedgerFormatError; offset is the JSON byte position when known.
Ledger import_json(std::string_view json);

/// Append-only on-disk log used by a running gateway.
class LedgerLog {
 public:
  /// Creates the file (writing CONFIG) or opens an existing one for append
  /// after checking its CONFIG matches `membership`.
  LedgerLog(std::filesystem::path path, const Membership& membership);

  void append_block(const BlockHeader& certified_header);
  void append_transaction(const PublicKey& device, const Transaction& tx);
  void flush();
  const std::filesystem::path& path() const { return path_; }

 private:
  void write(const Bytes& record);

  std::filesystem::path path_;
  std::mutex mutex_;
  std::ofstream out_;
};

}  // namespace vidledger::ledger
