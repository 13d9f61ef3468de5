// SPDX-License-Identifier: Apache-2.0
#include "vidledger/validate.hpp"

#include <algorithm>
#include <set>

namespace vidledger::ledger {

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::HeaderLink: return "header-link";
    case ViolationKind::DuplicateDevice: return "duplicate-device";
    case ViolationKind::CertificateQuorum: return "certificate-quorum";
    case ViolationKind::CertificateSignature: return "certificate-signature";
    case ViolationKind::TransactionHash: return "hash-mismatch";
    case ViolationKind::TransactionLink: return "hash-chain-break";
    case ViolationKind::SequenceGap: return "sequence-gap";
    case ViolationKind::TransactionSignature: return "signature-invalid";
    case ViolationKind::TimestampRegression: return "timestamp-regression";
    case ViolationKind::MalformedEncoding: return "malformed-encoding";
    case ViolationKind::OrphanTransaction: return "orphan-transaction";
  }
  return "unknown";
}

std::size_t ValidationReport::count(ViolationKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; }));
}

namespace {

void validate_transactions(const Block& block, std::size_t block_index, ValidationReport& report) {
  auto add = [&](ViolationKind kind, std::uint64_t pos, std::string detail) {
    report.violations.push_back({kind, block_index, block.header.device_public_key, pos, std::move(detail)});
  };

  const Digest recomputed_header = block.header.hash();
  const bool header_consistent = recomputed_header == block.header_hash;
  bool prev_consistent = header_consistent;

  for (std::size_t k = 0; k < block.transactions.size(); ++k) {
    const Transaction& tx = block.transactions[k];
    bool consistent = true;

    if (tx.computed_hash() != tx.transaction_hash) {
      add(ViolationKind::TransactionHash, k, "stored transaction_hash does not match contents");
      consistent = false;
    }
    if (!verify(block.header.managing_gateway, tx.transaction_hash, tx.gateway_signature)) {
      add(ViolationKind::TransactionSignature, k, "signature does not verify under managing gateway");
      consistent = false;
    }

    if (k == 0) {
      if (tx.sequence_number != 0) {
        add(ViolationKind::SequenceGap, k, "first transaction has sequence " + std::to_string(tx.sequence_number));
        consistent = false;
      }
      if (tx.previous_transaction_hash != recomputed_header) {
        add(ViolationKind::TransactionLink, k, "does not link to header hash");
        consistent = false;
      }
    } else if (prev_consistent) {
      const Transaction& prev = block.transactions[k - 1];
      if (tx.sequence_number != prev.sequence_number + 1) {
        add(ViolationKind::SequenceGap, k,
            "sequence " + std::to_string(tx.sequence_number) + " follows " + std::to_string(prev.sequence_number));
        consistent = false;
      }
      if (tx.previous_transaction_hash != prev.transaction_hash) {
        add(ViolationKind::TransactionLink, k, "previous_transaction_hash does not match predecessor");
        consistent = false;
      }
      if (tx.payload.timestamp_ms < prev.payload.timestamp_ms) {
        add(ViolationKind::TimestampRegression, k,
            std::to_string(tx.payload.timestamp_ms) + " < " + std::to_string(prev.payload.timestamp_ms));
        consistent = false;
      }
    }
    prev_consistent = consistent;
  }
}

}  // namespace

ValidationReport validate_ledger(const Ledger& ledger) {
  ValidationReport report;
  const Membership& membership = ledger.membership();
  std::set<PublicKey> devices;
  Digest expected_prev{};

  for (std::size_t i = 0; i < ledger.blocks().size(); ++i) {
    const Block& block = ledger.blocks()[i];
    const BlockHeader& h = block.header;
    auto add = [&](ViolationKind kind, std::string detail) {
      report.violations.push_back({kind, i, h.device_public_key, std::nullopt, std::move(detail)});
    };

    const Digest header_hash = h.hash();
    if (header_hash != block.header_hash) add(ViolationKind::HeaderLink, "stored header hash does not match header");
    if (h.previous_header_hash != expected_prev)
      add(ViolationKind::HeaderLink, i == 0 ? "first block must link to zero hash" : "does not link to previous block");
    if (!devices.insert(h.device_public_key).second)
      add(ViolationKind::DuplicateDevice, "second block for device " + h.device_public_key.hex());

    const CertificateCheck cert = check_certificate(header_hash, h.consensus_certificate, membership);
    for (const auto& problem : cert.problems) add(ViolationKind::CertificateSignature, problem);
    if (!cert.meets(membership.quorum()))
      add(ViolationKind::CertificateQuorum, std::to_string(cert.valid_distinct) + " valid distinct signatures, need " +
                                                std::to_string(membership.quorum()));

    validate_transactions(block, i, report);
    expected_prev = header_hash;
  }
  return report;
}

}  // namespace vidledger::ledger
