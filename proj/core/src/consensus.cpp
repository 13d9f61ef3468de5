// SPDX-License-Identifier: Apache-2.0
#include "vidledger/consensus.hpp"

#include <stdexcept>

#include "vidledger/ledger_io.hpp"

namespace vidledger::consensus {

ConsensusMessage ConsensusMessage::make(Phase phase, const Digest& header_hash,
                                        std::optional<ledger::BlockHeader> proposed_header,
                                        const DeviceIdentity& signer) {
  ConsensusMessage m;
  m.phase = phase;
  m.header_hash = header_hash;
  m.proposed_header = std::move(proposed_header);
  m.sender = signer.public_key();
  m.signature = signer.sign(vote_signing_bytes(phase, header_hash));
  return m;
}

bool ConsensusMessage::well_formed() const {
  if (phase == Phase::PrePrepare) {
    if (!proposed_header || proposed_header->hash() != header_hash) return false;
  } else if (proposed_header) {
    return false;
  }
  return verify(sender, vote_signing_bytes(phase, header_hash), signature);
}

Bytes ConsensusMessage::encode() const {
  CanonicalWriter w;
  w.u8(static_cast<std::uint8_t>(phase)).field(header_hash).u8(proposed_header ? 1 : 0);
  if (proposed_header) w.field(ledger::encode_certified_header(*proposed_header));
  w.field(sender.bytes).field(signature.bytes);
  return std::move(w).take();
}

ConsensusMessage ConsensusMessage::decode(ByteView data) {
  CanonicalReader r(data);
  ConsensusMessage m;
  const std::uint8_t phase = r.u8();
  if (phase < 1 || phase > 3) throw DecodeError("unknown phase " + std::to_string(phase), 0);
  m.phase = static_cast<Phase>(phase);
  m.header_hash = r.fixed<32>();
  const std::uint8_t has_header = r.u8();
  if (has_header > 1) throw DecodeError("bad header flag", r.offset());
  if (has_header) m.proposed_header = ledger::decode_certified_header(r.field());
  m.sender.bytes = r.fixed<32>();
  m.signature.bytes = r.fixed<64>();
  r.expect_done();
  return m;
}

ConsensusInstance::ConsensusInstance(Membership membership, PublicKey device, DeviceIdentity self,
                                     ProposalValidator validator)
    : membership_(std::move(membership)),
      device_(device),
      self_(std::move(self)),
      validator_(std::move(validator)) {
  membership_.validate();
  if (!membership_.contains(self_.public_key())) throw std::invalid_argument("self is not a member");
}

std::optional<Digest> ConsensusInstance::accepted_hash() const {
  if (!proposal_) return std::nullopt;
  return proposal_hash_;
}

std::size_t ConsensusInstance::prepare_votes(const Digest& h) const {
  auto it = prepares_.find(h);
  return it == prepares_.end() ? 0 : it->second.size();
}

std::size_t ConsensusInstance::commit_votes(const Digest& h) const {
  auto it = commits_.find(h);
  return it == commits_.end() ? 0 : it->second.size();
}

StepResult ConsensusInstance::propose(const ledger::BlockHeader& header) {
  if (proposal_ || deferred_) throw std::logic_error("instance already has a proposal");
  if (header.device_public_key != device_) throw std::invalid_argument("header is for another device");
  if (header.managing_gateway != self_.public_key())
    throw std::invalid_argument("proposer must be the header's managing gateway");
  proposal_ = header;
  proposal_->consensus_certificate.clear();
  proposal_hash_ = proposal_->hash();
  ConsensusMessage pp = ConsensusMessage::make(Phase::PrePrepare, proposal_hash_, *proposal_, self_);
  prepares_[proposal_hash_][self_.public_key()] = pp.signature;
  StepResult out;
  out.outbound.push_back(std::move(pp));
  advance(out);
  return out;
}

StepResult ConsensusInstance::step(const ConsensusMessage& msg) {
  StepResult out;
  if (!membership_.contains(msg.sender) || !msg.well_formed()) {
    ++rejected_;
    return out;
  }

  switch (msg.phase) {
    case Phase::PrePrepare: {
      const ledger::BlockHeader& h = *msg.proposed_header;
      if (h.device_public_key != device_ || h.managing_gateway != msg.sender) {
        ++rejected_;
        return out;
      }
      if (proposal_ || deferred_) {
        ++ignored_;
        return out;
      }
      const Acceptance verdict = validator_ ? validator_(h) : Acceptance::Accept;
      if (verdict == Acceptance::Reject) {
        ++rejected_;
        return out;
      }
      if (verdict == Acceptance::Defer) {
        deferred_ = msg;
        return out;
      }
      return accept(msg);
    }
    case Phase::Prepare: {
      if (!prepares_[msg.header_hash].emplace(msg.sender, msg.signature).second) {
        ++ignored_;
        return out;
      }
      break;
    }
    case Phase::Commit: {
      if (!commits_[msg.header_hash].emplace(msg.sender, msg.signature).second) {
        ++ignored_;
        return out;
      }
      break;
    }
  }
  advance(out);
  return out;
}

StepResult ConsensusInstance::reevaluate() {
  if (!deferred_ || proposal_) return {};
  const Acceptance verdict = validator_ ? validator_(*deferred_->proposed_header) : Acceptance::Accept;
  if (verdict == Acceptance::Defer) return {};
  ConsensusMessage pp = std::move(*deferred_);
  deferred_.reset();
  if (verdict == Acceptance::Reject) {
    ++rejected_;
    return {};
  }
  return accept(pp);
}

StepResult ConsensusInstance::accept(const ConsensusMessage& pre_prepare) {
  StepResult out;
  proposal_ = *pre_prepare.proposed_header;
  proposal_->consensus_certificate.clear();
  proposal_hash_ = pre_prepare.header_hash;
  auto& votes = prepares_[proposal_hash_];
  votes.emplace(pre_prepare.sender, pre_prepare.signature);
  if (pre_prepare.sender != self_.public_key()) {
    ConsensusMessage prepare = ConsensusMessage::make(Phase::Prepare, proposal_hash_, std::nullopt, self_);
    votes.emplace(self_.public_key(), prepare.signature);
    out.outbound.push_back(std::move(prepare));
  }
  advance(out);
  return out;
}

void ConsensusInstance::advance(StepResult& out) {
  if (!proposal_) return;
  const std::size_t quorum = membership_.quorum();

  if (!sent_commit_ && prepare_votes(proposal_hash_) >= quorum) {
    sent_commit_ = true;
    ConsensusMessage commit = ConsensusMessage::make(Phase::Commit, proposal_hash_, std::nullopt, self_);
    commits_[proposal_hash_].emplace(self_.public_key(), commit.signature);
    out.outbound.push_back(std::move(commit));
  }

  if (!decided_ && commit_votes(proposal_hash_) >= quorum) {
    decided_ = true;
    ledger::BlockHeader decided = *proposal_;
    for (const auto& [gateway, sig] : commits_[proposal_hash_]) decided.consensus_certificate.push_back({gateway, sig});
    out.decided = std::move(decided);
  }
}

}  // namespace vidledger::consensus
