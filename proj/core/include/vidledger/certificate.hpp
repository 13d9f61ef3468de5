// SPDX-License-Identifier: Apache-2.0
#pragma once

// Gateway membership and consensus vote signatures. Shared between the
// consensus state machine (which produces votes) and ledger validation
// (which re-verifies the COMMIT votes stored as a block's certificate).

#include <cstdint>
#include <string>
#include <vector>

#include "vidledger/bytes.hpp"

namespace vidledger {

/// Static gateway set. n >= 3f + 1, quorum = 2f + 1.
struct Membership {
  std::vector<PublicKey> peers;
  std::uint32_t f = 0;

  std::size_t n() const { return peers.size(); }
  std::size_t quorum() const { return 2 * static_cast<std::size_t>(f) + 1; }
  bool contains(const PublicKey& key) const;
  /// Throws std::invalid_argument on n < 3f+1, duplicates or an empty set.
  void validate() const;

  bool operator==(const Membership&) const = default;
};

enum class Phase : std::uint8_t { PrePrepare = 1, Prepare = 2, Commit = 3 };

std::string_view to_string(Phase phase);

/// Bytes a gateway signs for a consensus vote: canonical (u8 phase, header_hash).
Bytes vote_signing_bytes(Phase phase, const Digest& header_hash);

struct CertificateEntry {
  PublicKey gateway;
  Signature signature;

  bool operator==(const CertificateEntry&) const = default;
};

struct CertificateCheck {
  std::size_t valid_distinct = 0;
  /// Entries that are from non-members, duplicated, or fail verification.
  std::vector<std::string> problems;

  bool meets(std::size_t quorum) const { return valid_distinct >= quorum; }
};

/// Verifies each entry as a COMMIT vote over `header_hash` by a member.
CertificateCheck check_certificate(const Digest& header_hash, const std::vector<CertificateEntry>& entries,
                                   const Membership& membership);

}  // namespace vidledger
