// SPDX-License-Identifier: Apache-2.0
#include "vidledger/peer_protocol.hpp"

#include "vidledger/ledger_io.hpp"
#include "vidledger/sha256.hpp"

namespace vidledger::gateway {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Bytes signed_bytes_for(PeerKind kind, ByteView body) {
  CanonicalWriter w;
  w.u8(static_cast<std::uint8_t>(kind)).field(body);
  return std::move(w).take();
}

constexpr std::uint64_t kMaxListEntries = 1u << 20;
}  // namespace

std::string_view to_string(PeerKind kind) {
  switch (kind) {
    case PeerKind::HelloAnnounce: return "HELLO_ANNOUNCE";
    case PeerKind::Consensus: return "CONSENSUS";
    case PeerKind::TxUpdate: return "TX_UPDATE";
    case PeerKind::SyncRequest: return "SYNC_REQUEST";
    case PeerKind::SyncResponse: return "SYNC_RESPONSE";
  }
  return "UNKNOWN";
}

PeerKind kind_of(const PeerBody& body) {
  return std::visit(overloaded{
                        [](const HelloAnnounce&) { return PeerKind::HelloAnnounce; },
                        [](const ConsensusEnvelope&) { return PeerKind::Consensus; },
                        [](const TxUpdate&) { return PeerKind::TxUpdate; },
                        [](const SyncRequest&) { return PeerKind::SyncRequest; },
                        [](const SyncResponse&) { return PeerKind::SyncResponse; },
                    },
                    body);
}

Bytes encode_body(const PeerBody& body) {
  CanonicalWriter w;
  std::visit(overloaded{
                 [&](const HelloAnnounce& b) {
                   w.u64(b.blocks.size());
                   for (const auto& e : b.blocks) w.field(e.device.bytes).u64(e.tx_count).field(e.certificate_digest);
                 },
                 [&](const ConsensusEnvelope& b) { w.field(b.device.bytes).field(b.message.encode()); },
                 [&](const TxUpdate& b) { w.field(b.device.bytes).field(ledger::encode_transaction(b.tx)); },
                 [&](const SyncRequest& b) { w.field(b.device.bytes).u64(b.from_sequence); },
                 [&](const SyncResponse& b) {
                   w.field(b.device.bytes).u8(b.header ? 1 : 0);
                   if (b.header) w.field(ledger::encode_certified_header(*b.header));
                   w.u64(b.from_sequence).u64(b.transactions.size());
                   for (const auto& tx : b.transactions) w.field(ledger::encode_transaction(tx));
                 },
             },
             body);
  return std::move(w).take();
}

PeerBody decode_body(PeerKind kind, ByteView data) {
  CanonicalReader r(data);
  PeerBody out;
  switch (kind) {
    case PeerKind::HelloAnnounce: {
      HelloAnnounce b;
      const std::uint64_t n = r.u64();
      if (n > kMaxListEntries) throw DecodeError("announce too long", 0);
      for (std::uint64_t i = 0; i < n; ++i) {
        ChainSummaryEntry e;
        e.device.bytes = r.fixed<32>();
        e.tx_count = r.u64();
        e.certificate_digest = r.fixed<32>();
        b.blocks.push_back(e);
      }
      out = std::move(b);
      break;
    }
    case PeerKind::Consensus: {
      ConsensusEnvelope b;
      b.device.bytes = r.fixed<32>();
      b.message = consensus::ConsensusMessage::decode(r.field());
      out = std::move(b);
      break;
    }
    case PeerKind::TxUpdate: {
      TxUpdate b;
      b.device.bytes = r.fixed<32>();
      b.tx = ledger::decode_transaction(r.field());
      out = std::move(b);
      break;
    }
    case PeerKind::SyncRequest: {
      SyncRequest b;
      b.device.bytes = r.fixed<32>();
      b.from_sequence = r.u64();
      out = b;
      break;
    }
    case PeerKind::SyncResponse: {
      SyncResponse b;
      b.device.bytes = r.fixed<32>();
      const std::uint8_t has_header = r.u8();
      if (has_header > 1) throw DecodeError("bad header flag", r.offset());
      if (has_header) b.header = ledger::decode_certified_header(r.field());
      b.from_sequence = r.u64();
      const std::uint64_t n = r.u64();
      if (n > kMaxListEntries) throw DecodeError("sync response too long", r.offset());
      for (std::uint64_t i = 0; i < n; ++i) b.transactions.push_back(ledger::decode_transaction(r.field()));
      out = std::move(b);
      break;
    }
    default:
      throw DecodeError("unknown peer message kind " + std::to_string(static_cast<int>(kind)), 0);
  }
  r.expect_done();
  return out;
}

Digest certificate_digest(const std::vector<CertificateEntry>& certificate) {
  CanonicalWriter w;
  w.u64(certificate.size());
  for (const auto& e : certificate) w.field(e.gateway.bytes).field(e.signature.bytes);
  return sha256(std::move(w).take());
}

PeerMessage PeerMessage::make(PeerBody body, const DeviceIdentity& signer) {
  PeerMessage m;
  m.body = std::move(body);
  m.sender = signer.public_key();
  m.signed_bytes_ = signed_bytes_for(m.kind(), encode_body(m.body));
  m.signature = signer.sign(m.signed_bytes_);
  return m;
}

bool PeerMessage::signature_valid() const {
  if (!signed_bytes_.empty()) return verify(sender, signed_bytes_, signature);
  return verify(sender, signed_bytes_for(kind(), encode_body(body)), signature);
}

Bytes PeerMessage::encode() const {
  CanonicalWriter w;
  w.u8(static_cast<std::uint8_t>(kind())).field(encode_body(body)).field(sender.bytes).field(signature.bytes);
  return std::move(w).take();
}

PeerMessage PeerMessage::decode(ByteView data) {
  CanonicalReader r(data);
  const std::uint8_t raw_kind = r.u8();
  if (raw_kind < 1 || raw_kind > 5) throw DecodeError("unknown peer message kind " + std::to_string(raw_kind), 0);
  const auto kind = static_cast<PeerKind>(raw_kind);
  const ByteView body = r.field();
  PeerMessage m;
  m.body = decode_body(kind, body);
  m.sender.bytes = r.fixed<32>();
  m.signature.bytes = r.fixed<64>();
  r.expect_done();
  m.signed_bytes_ = signed_bytes_for(kind, body);
  return m;
}

}  // namespace vidledger::gateway
