// SPDX-License-Identifier: Apache-2.0
#include "vidledger/ledger.hpp"

#include "vidledger/sha256.hpp"

namespace vidledger::ledger {

std::string_view to_string(LedgerErrorKind kind) {
  switch (kind) {
    case LedgerErrorKind::UnknownDevice: return "unknown-device";
    case LedgerErrorKind::DuplicateDevice: return "duplicate-device";
    case LedgerErrorKind::WrongGateway: return "wrong-gateway";
    case LedgerErrorKind::TimestampRegression: return "timestamp-regression";
    case LedgerErrorKind::BrokenLink: return "broken-link";
    case LedgerErrorKind::SequenceMismatch: return "sequence-mismatch";
    case LedgerErrorKind::HashMismatch: return "hash-mismatch";
    case LedgerErrorKind::BadSignature: return "bad-signature";
    case LedgerErrorKind::InsufficientCertificate: return "insufficient-certificate";
  }
  return "unknown";
}

Bytes BlockHeader::canonical_encoding() const {
  CanonicalWriter w;
  w.field(device_public_key.bytes).field(previous_header_hash).u64(created_at_ms).field(managing_gateway.bytes);
  return std::move(w).take();
}

Digest BlockHeader::hash() const { return sha256(canonical_encoding()); }

BlockHeader build_block_header(const PublicKey& device_public_key, const Digest& previous_header_hash,
                               std::uint64_t created_at_ms, const PublicKey& managing_gateway) {
  BlockHeader h;
  h.device_public_key = device_public_key;
  h.previous_header_hash = previous_header_hash;
  h.created_at_ms = created_at_ms;
  h.managing_gateway = managing_gateway;
  return h;
}

Bytes TransactionPayload::canonical_encoding() const {
  CanonicalWriter w;
  w.field(storage_address.digest).field(metadata_hash).u64(timestamp_ms);
  return std::move(w).take();
}

Digest Transaction::compute_hash(const Digest& previous, std::uint64_t sequence, const TransactionPayload& payload) {
  CanonicalWriter w;
  w.field(previous).u64(sequence).field(payload.canonical_encoding());
  return sha256(w.bytes());
}

Ledger::Ledger(Membership membership) : membership_(std::move(membership)) { membership_.validate(); }

Ledger Ledger::from_untrusted(Membership membership, std::vector<Block> blocks) {
  Ledger l;
  l.membership_ = std::move(membership);
  l.blocks_ = std::move(blocks);
  for (std::size_t i = 0; i < l.blocks_.size(); ++i) l.index_.try_emplace(l.blocks_[i].header.device_public_key, i);
  return l;
}

Digest Ledger::tip_hash() const { return blocks_.empty() ? Digest{} : blocks_.back().header_hash; }

const Block* Ledger::find_block(const PublicKey& device) const {
  auto it = index_.find(device);
  return it == index_.end() ? nullptr : &blocks_[it->second];
}

std::optional<std::size_t> Ledger::block_index(const PublicKey& device) const {
  auto it = index_.find(device);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Block& Ledger::mutable_block(const PublicKey& device) {
  auto it = index_.find(device);
  if (it == index_.end()) throw LedgerError(LedgerErrorKind::UnknownDevice, device.hex());
  return blocks_[it->second];
}

BlockHeader Ledger::build_block_header(const PublicKey& device, std::uint64_t created_at_ms,
                                       const PublicKey& managing_gateway) const {
  if (find_block(device)) throw LedgerError(LedgerErrorKind::DuplicateDevice, device.hex());
  return ledger::build_block_header(device, tip_hash(), created_at_ms, managing_gateway);
}

const Block& Ledger::insert_block(BlockHeader certified) {
  if (find_block(certified.device_public_key))
    throw LedgerError(LedgerErrorKind::DuplicateDevice, certified.device_public_key.hex());
  if (certified.previous_header_hash != tip_hash())
    throw LedgerError(LedgerErrorKind::BrokenLink, "header does not link to the current tip");
  Block block;
  block.header_hash = certified.hash();
  const CertificateCheck check = check_certificate(block.header_hash, certified.consensus_certificate, membership_);
  if (!check.meets(membership_.quorum()))
    throw LedgerError(LedgerErrorKind::InsufficientCertificate,
                      std::to_string(check.valid_distinct) + " valid signatures, need " +
                          std::to_string(membership_.quorum()));
  block.header = std::move(certified);
  index_.emplace(block.header.device_public_key, blocks_.size());
  blocks_.push_back(std::move(block));
  return blocks_.back();
}

void Ledger::replace_certificate(const PublicKey& device, std::vector<CertificateEntry> certificate) {
  Block& block = mutable_block(device);
  const CertificateCheck check = check_certificate(block.header_hash, certificate, membership_);
  if (!check.meets(membership_.quorum()) || !check.problems.empty())
    throw LedgerError(LedgerErrorKind::InsufficientCertificate, "replacement certificate rejected");
  block.header.consensus_certificate = std::move(certificate);
}

Transaction Ledger::prepare_transaction(const PublicKey& device, const TransactionPayload& payload,
                                        const DeviceIdentity& gateway) const {
  const Block* block = find_block(device);
  if (!block) throw LedgerError(LedgerErrorKind::UnknownDevice, device.hex());
  if (gateway.public_key() != block->header.managing_gateway)
    throw LedgerError(LedgerErrorKind::WrongGateway,
                      gateway.device_id() + " does not manage " + device.hex());
  Transaction tx;
  tx.previous_transaction_hash = block->tail_hash();
  tx.sequence_number = block->transactions.size();
  tx.payload = payload;
  tx.transaction_hash = tx.computed_hash();
  tx.gateway_signature = gateway.sign(tx.transaction_hash);
  return tx;
}

const Transaction& Ledger::commit_transaction(const PublicKey& device, Transaction tx) {
  Block& block = mutable_block(device);
  if (tx.sequence_number != block.transactions.size())
    throw LedgerError(LedgerErrorKind::SequenceMismatch, "expected sequence " + std::to_string(block.transactions.size()) +
                                                             ", got " + std::to_string(tx.sequence_number));
  if (tx.previous_transaction_hash != block.tail_hash())
    throw LedgerError(LedgerErrorKind::BrokenLink, "previous_transaction_hash does not match block tail");
  if (tx.computed_hash() != tx.transaction_hash)
    throw LedgerError(LedgerErrorKind::HashMismatch, "transaction_hash does not match contents");
  if (!verify(block.header.managing_gateway, tx.transaction_hash, tx.gateway_signature))
    throw LedgerError(LedgerErrorKind::BadSignature, "not signed by managing gateway");
  if (!block.transactions.empty() && tx.payload.timestamp_ms < block.transactions.back().payload.timestamp_ms)
    throw LedgerError(LedgerErrorKind::TimestampRegression,
                      std::to_string(tx.payload.timestamp_ms) + " < " +
                          std::to_string(block.transactions.back().payload.timestamp_ms));
  block.transactions.push_back(std::move(tx));
  return block.transactions.back();
}

const Transaction& Ledger::append_transaction(const PublicKey& device, const TransactionPayload& payload,
                                              const DeviceIdentity& gateway) {
  return commit_transaction(device, prepare_transaction(device, payload, gateway));
}

}  // namespace vidledger::ledger
