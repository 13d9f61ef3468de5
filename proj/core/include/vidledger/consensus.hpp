// SPDX-License-Identifier: Apache-2.0
#pragma once

// Single-shot PBFT agreement on one device block header among a static
// gateway set. One instance per camera bootstrap; no view change.
//
//   proposer   --PRE_PREPARE(header)-->  all
//   each peer  --PREPARE(h)------------>  all    once it accepts the proposal
//   each peer  --COMMIT(h)------------->  all    after 2f+1 matching PREPAREs
//   decide h                                      after 2f+1 matching COMMITs
//
// The PRE_PREPARE counts as the proposer's PREPARE. The decided header
// carries the collected COMMIT signatures as its consensus certificate.

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "vidledger/certificate.hpp"
#include "vidledger/identity.hpp"
#include "vidledger/ledger.hpp"

namespace vidledger::consensus {

struct ConsensusConfig {
  Membership membership;
  std::chrono::milliseconds timeout{2000};
};

struct ConsensusMessage {
  Phase phase = Phase::Prepare;
  Digest header_hash{};
  /// PRE_PREPARE only.
  std::optional<ledger::BlockHeader> proposed_header;
  PublicKey sender;
  /// Over vote_signing_bytes(phase, header_hash).
  Signature signature;

  static ConsensusMessage make(Phase phase, const Digest& header_hash,
                               std::optional<ledger::BlockHeader> proposed_header, const DeviceIdentity& signer);

  /// Signature check plus, for PRE_PREPARE, that the carried header hashes
  /// to header_hash.
  bool well_formed() const;

  Bytes encode() const;
  /// Throws DecodeError.
  static ConsensusMessage decode(ByteView data);

  bool operator==(const ConsensusMessage&) const = default;
};

enum class Acceptance { Accept, Defer, Reject };

/// Application check on a proposed header, e.g. "links to my current tip".
/// Defer keeps the proposal parked until reevaluate() is called.
using ProposalValidator = std::function<Acceptance(const ledger::BlockHeader&)>;

struct StepResult {
  std::vector<ConsensusMessage> outbound;
  std::optional<ledger::BlockHeader> decided;
};

class ConsensusInstance {
 public:
  ConsensusInstance(Membership membership, PublicKey device, DeviceIdentity self, ProposalValidator validator = {});

  /// Records `header` as this node's proposal. The outbound list holds the
  /// PRE_PREPARE (plus a COMMIT when the quorum is 1). Throws
  /// std::logic_error on a second call.
  StepResult propose(const ledger::BlockHeader& header);

  /// Feeds one message. Malformed, non-member, or wrong-instance messages are
  /// counted in rejected(); duplicates in ignored(). Neither changes state.
  StepResult step(const ConsensusMessage& msg);

  /// Re-runs the validator on a deferred proposal.
  StepResult reevaluate();

  const PublicKey& device() const { return device_; }
  bool decided() const { return decided_; }
  bool has_proposal() const { return proposal_.has_value(); }
  bool has_deferred() const { return deferred_.has_value(); }
  std::optional<Digest> accepted_hash() const;
  std::size_t prepare_votes(const Digest& h) const;
  std::size_t commit_votes(const Digest& h) const;
  std::size_t rejected() const { return rejected_; }
  std::size_t ignored() const { return ignored_; }

 private:
  StepResult accept(const ConsensusMessage& pre_prepare);
  void advance(StepResult& out);

  Membership membership_;
  PublicKey device_;
  DeviceIdentity self_;
  ProposalValidator validator_;

  std::optional<ledger::BlockHeader> proposal_;
  Digest proposal_hash_{};
  std::optional<ConsensusMessage> deferred_;
  std::map<Digest, std::map<PublicKey, Signature>> prepares_;
  std::map<Digest, std::map<PublicKey, Signature>> commits_;
  bool sent_commit_ = false;
  bool decided_ = false;
  std::size_t rejected_ = 0;
  std::size_t ignored_ = 0;
};

}  // namespace vidledger::consensus
