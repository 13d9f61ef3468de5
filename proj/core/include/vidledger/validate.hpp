// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vidledger/ledger.hpp"

namespace vidledger::ledger {

enum class ViolationKind {
  HeaderLink,
  DuplicateDevice,
  CertificateQuorum,
  CertificateSignature,
  TransactionHash,
  TransactionLink,
  SequenceGap,
  TransactionSignature,
  TimestampRegression,
  MalformedEncoding,
  OrphanTransaction,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::size_t block_index = 0;
  PublicKey device;
  /// Position of the offending transaction inside its block; absent for
  /// header-level violations. For an honest block position == sequence.
  std::optional<std::uint64_t> position;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(ViolationKind kind) const;
};

/// Checks every structural invariant: header links, device uniqueness,
/// certificate quorum and signatures, per-block hash chains, sequence
/// contiguity, gateway signatures and timestamp order. Never throws.
///
/// Checks that compare a transaction with its predecessor (link, sequence,
/// timestamp) are skipped when the predecessor is itself inconsistent, so a
/// single tampered transaction is reported at its own position only.
ValidationReport validate_ledger(const Ledger& ledger);

}  // namespace vidledger::ledger
