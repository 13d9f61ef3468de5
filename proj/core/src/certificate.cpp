// SPDX-License-Identifier: Apache-2.0
#include "vidledger/certificate.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "vidledger/identity.hpp"

namespace vidledger {

bool Membership::contains(const PublicKey& key) const {
  return std::find(peers.begin(), peers.end(), key) != peers.end();
}

void Membership::validate() const {
  if (peers.empty()) throw std::invalid_argument("membership has no peers");
  if (peers.size() < 3 * static_cast<std::size_t>(f) + 1)
    throw std::invalid_argument("n=" + std::to_string(peers.size()) + " < 3f+1 with f=" + std::to_string(f));
  std::set<PublicKey> unique(peers.begin(), peers.end());
  if (unique.size() != peers.size()) throw std::invalid_argument("duplicate peer in membership");
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::PrePrepare: return "PRE_PREPARE";
    case Phase::Prepare: return "PREPARE";
    case Phase::Commit: return "COMMIT";
  }
  return "UNKNOWN";
}

Bytes vote_signing_bytes(Phase phase, const Digest& header_hash) {
  CanonicalWriter w;
  w.u8(static_cast<std::uint8_t>(phase)).field(header_hash);
  return std::move(w).take();
}

CertificateCheck check_certificate(const Digest& header_hash, const std::vector<CertificateEntry>& entries,
                                   const Membership& membership) {
  CertificateCheck check;
  const Bytes message = vote_signing_bytes(Phase::Commit, header_hash);
  std::set<PublicKey> seen;
  for (const auto& entry : entries) {
    if (!membership.contains(entry.gateway)) {
      check.problems.push_back("signer " + entry.gateway.hex() + " is not a member");
      continue;
    }
    if (!seen.insert(entry.gateway).second) {
      check.problems.push_back("duplicate signer " + entry.gateway.hex());
      continue;
    }
    if (!verify(entry.gateway, message, entry.signature)) {
      check.problems.push_back("bad signature from " + entry.gateway.hex());
      continue;
    }
    ++check.valid_distinct;
  }
  return check;
}

}  // namespace vidledger
