// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "ledger_fixture.hpp"
#include "vidledger/validate.hpp"

using namespace vidledger;
using namespace vidledger::ledger;
using vidledger::testing::identity_for;
using vidledger::testing::LedgerFixture;

namespace {
LedgerErrorKind error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const LedgerError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no LedgerError";
  return LedgerErrorKind::UnknownDevice;
}
}  // namespace

TEST(Header, HashIsSha256OfDocumentedEncoding) {
  PublicKey dev, gw;
  dev.bytes.fill(0x11);
  gw.bytes.fill(0x22);
  const auto h = build_block_header(dev, Digest{}, 1700000000000ULL, gw);
  // Hand-built: field(dev) | field(prev) | field(u64 BE) | field(gw).
  Bytes enc;
  auto field = [&](ByteView b) {
    put_u32be(enc, static_cast<std::uint32_t>(b.size()));
    enc.insert(enc.end(), b.begin(), b.end());
  };
  field(dev.bytes);
  field(Digest{});
  Bytes ts;
  put_u64be(ts, 1700000000000ULL);
  field(ts);
  field(gw.bytes);
  EXPECT_EQ(h.canonical_encoding(), enc);
  EXPECT_EQ(h.hash(), sha256(enc));
}

TEST(Ledger, SequentialAppends) {
  LedgerFixture fx;
  const auto l = fx.build(1, 180);
  const auto& txs = l.blocks().front().transactions;
  ASSERT_EQ(txs.size(), 180u);
  for (std::size_t k = 0; k < txs.size(); ++k) EXPECT_EQ(txs[k].sequence_number, k);
  EXPECT_EQ(txs.front().previous_transaction_hash, l.blocks().front().header_hash);
  for (std::size_t k = 1; k < txs.size(); ++k) EXPECT_EQ(txs[k].previous_transaction_hash, txs[k - 1].transaction_hash);
  EXPECT_TRUE(validate_ledger(l).ok());
}

TEST(Ledger, BlocksLinkByHeaderHash) {
  LedgerFixture fx;
  const auto l = fx.build(3, 1);
  EXPECT_EQ(l.blocks()[0].header.previous_header_hash, Digest{});
  EXPECT_EQ(l.blocks()[1].header.previous_header_hash, l.blocks()[0].header_hash);
  EXPECT_EQ(l.tip_hash(), l.blocks()[2].header_hash);
}

TEST(Ledger, InsertRules) {
  LedgerFixture fx;
  Ledger l(fx.membership);
  const auto cam = identity_for("cam", 0).public_key();
  EXPECT_EQ(error_of([&] { l.insert_block(fx.certified_header(l, cam, 1, 0, 2)); }),
            LedgerErrorKind::InsufficientCertificate);
  l.insert_block(fx.certified_header(l, cam, 1));
  EXPECT_EQ(error_of([&] { l.build_block_header(cam, 2, fx.gateways[0].public_key()); }),
            LedgerErrorKind::DuplicateDevice);

  // Stale link: a header built before another block was inserted.
  const auto cam1 = identity_for("cam", 1).public_key();
  const auto cam2 = identity_for("cam", 2).public_key();
  auto stale = fx.certified_header(l, cam2, 3);
  l.insert_block(fx.certified_header(l, cam1, 2));
  EXPECT_EQ(error_of([&] { l.insert_block(stale); }), LedgerErrorKind::BrokenLink);
  EXPECT_EQ(l.size(), 2u);
}

TEST(Ledger, AppendRules) {
  LedgerFixture fx;
  Ledger l(fx.membership);
  const auto cam = identity_for("cam", 0).public_key();
  EXPECT_EQ(error_of([&] { l.append_transaction(cam, LedgerFixture::payload(0, 5), fx.gateways[0]); }),
            LedgerErrorKind::UnknownDevice);
  l.insert_block(fx.certified_header(l, cam, 1));
  EXPECT_EQ(error_of([&] { l.append_transaction(cam, LedgerFixture::payload(0, 5), fx.gateways[1]); }),
            LedgerErrorKind::WrongGateway);
  l.append_transaction(cam, LedgerFixture::payload(0, 50), fx.gateways[0]);
  EXPECT_EQ(error_of([&] { l.append_transaction(cam, LedgerFixture::payload(1, 49), fx.gateways[0]); }),
            LedgerErrorKind::TimestampRegression);

  auto tx = l.prepare_transaction(cam, LedgerFixture::payload(1, 60), fx.gateways[0]);
  auto forged = tx;
  forged.sequence_number = 5;
  EXPECT_EQ(error_of([&] { l.commit_transaction(cam, forged); }), LedgerErrorKind::SequenceMismatch);
  forged = tx;
  forged.gateway_signature.bytes[0] ^= 1;
  EXPECT_EQ(error_of([&] { l.commit_transaction(cam, forged); }), LedgerErrorKind::BadSignature);
  forged = tx;
  forged.payload.timestamp_ms++;
  EXPECT_EQ(error_of([&] { l.commit_transaction(cam, forged); }), LedgerErrorKind::HashMismatch);
  forged = tx;
  forged.previous_transaction_hash[0] ^= 1;
  EXPECT_EQ(error_of([&] { l.commit_transaction(cam, forged); }), LedgerErrorKind::BrokenLink);
  l.commit_transaction(cam, tx);
  EXPECT_EQ(l.find_block(cam)->transactions.size(), 2u);
}

TEST(Ledger, FailedAppendLeavesLedgerUnchanged) {
  LedgerFixture fx;
  auto l = fx.build(1, 3);
  const Ledger before = l;
  const auto cam = l.blocks().front().header.device_public_key;
  EXPECT_THROW(l.append_transaction(cam, LedgerFixture::payload(9, 1), fx.gateways[0]), LedgerError);
  EXPECT_EQ(l, before);
}

TEST(Validate, SingleBytePayloadFlipsAreLocalisedHashMismatches) {
  LedgerFixture fx;
  const Ledger clean = fx.build(1, 3);
  ASSERT_TRUE(validate_ledger(clean).ok());
  std::size_t cases = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    // 32 address bytes, 32 metadata hash bytes, 8 timestamp bytes.
    for (std::size_t i = 0; i < 72; ++i) {
      for (std::uint8_t mask : {std::uint8_t{0x01}, std::uint8_t{0x80}, std::uint8_t{0xFF}}) {
        auto blocks = clean.blocks();
        auto& p = blocks[0].transactions[k].payload;
        if (i < 32) {
          p.storage_address.digest[i] ^= mask;
        } else if (i < 64) {
          p.metadata_hash[i - 32] ^= mask;
        } else {
          p.timestamp_ms ^= std::uint64_t{mask} << (8 * (71 - i));
        }
        const auto report = validate_ledger(Ledger::from_untrusted(fx.membership, blocks));
        ++cases;
        ASSERT_FALSE(report.ok()) << "tx " << k << " byte " << i;
        // A timestamp flip may add a regression finding; both sit at k.
        EXPECT_EQ(report.count(ViolationKind::TransactionHash), 1u) << "tx " << k << " byte " << i;
        for (const auto& v : report.violations) {
          EXPECT_EQ(v.block_index, 0u);
          EXPECT_EQ(v.position, k) << to_string(v.kind);
        }
      }
    }
  }
  EXPECT_EQ(cases, 3u * 72u * 3u);
  EXPECT_EQ(to_string(ViolationKind::TransactionHash), "hash-mismatch");
}

TEST(Validate, StoredHashEditBreaksOnlyThatPosition) {
  LedgerFixture fx;
  auto blocks = fx.build(1, 4).blocks();
  blocks[0].transactions[1].transaction_hash[3] ^= 0x10;
  const auto report = validate_ledger(Ledger::from_untrusted(fx.membership, blocks));
  ASSERT_FALSE(report.ok());
  for (const auto& v : report.violations) EXPECT_EQ(v.position, 1u) << to_string(v.kind);
}

TEST(Validate, RemovedTransactionIsSequenceGap) {
  LedgerFixture fx;
  auto blocks = fx.build(1, 4).blocks();
  blocks[0].transactions.erase(blocks[0].transactions.begin() + 1);
  const auto report = validate_ledger(Ledger::from_untrusted(fx.membership, blocks));
  EXPECT_GE(report.count(ViolationKind::SequenceGap) + report.count(ViolationKind::TransactionLink), 1u);
}

TEST(Validate, HeaderAndCertificateProblems) {
  LedgerFixture fx;
  auto blocks = fx.build(2, 1).blocks();
  blocks[1].header.previous_header_hash[0] ^= 1;
  blocks[0].header.consensus_certificate.pop_back();
  blocks[0].header.consensus_certificate.front().signature.bytes[0] ^= 1;
  const auto report = validate_ledger(Ledger::from_untrusted(fx.membership, blocks));
  EXPECT_GE(report.count(ViolationKind::HeaderLink), 1u);
  EXPECT_GE(report.count(ViolationKind::CertificateQuorum) + report.count(ViolationKind::CertificateSignature), 1u);
}

TEST(Validate, DuplicateDevice) {
  LedgerFixture fx;
  auto blocks = fx.build(1, 0).blocks();
  auto copy = blocks[0];
  copy.header.previous_header_hash = blocks[0].header_hash;
  copy.header_hash = copy.header.hash();
  copy.header.consensus_certificate = fx.certify(copy.header_hash, 3);
  blocks.push_back(copy);
  EXPECT_EQ(validate_ledger(Ledger::from_untrusted(fx.membership, blocks)).count(ViolationKind::DuplicateDevice), 1u);
}

TEST(Certificate, CheckCountsDistinctValidMembers) {
  LedgerFixture fx;
  const Digest h = sha256(as_bytes("h"));
  auto cert = fx.certify(h, 3);
  EXPECT_EQ(check_certificate(h, cert, fx.membership).valid_distinct, 3u);
  cert.push_back(cert.front());
  const auto dup = check_certificate(h, cert, fx.membership);
  EXPECT_EQ(dup.valid_distinct, 3u);
  EXPECT_FALSE(dup.problems.empty());
  const auto outsider = identity_for("outsider", 0);
  std::vector<CertificateEntry> bad{{outsider.public_key(), outsider.sign(vote_signing_bytes(Phase::Commit, h))}};
  EXPECT_EQ(check_certificate(h, bad, fx.membership).valid_distinct, 0u);
  // A PREPARE signature is not a COMMIT vote.
  std::vector<CertificateEntry> prep{{fx.gateways[0].public_key(), fx.gateways[0].sign(vote_signing_bytes(Phase::Prepare, h))}};
  EXPECT_EQ(check_certificate(h, prep, fx.membership).valid_distinct, 0u);
}

TEST(Membership, Validate) {
  Membership m;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  LedgerFixture fx;
  EXPECT_NO_THROW(fx.membership.validate());
  m = fx.membership;
  m.f = 2;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = fx.membership;
  m.peers[1] = m.peers[0];
  EXPECT_THROW(m.validate(), std::invalid_argument);
  EXPECT_EQ(fx.membership.quorum(), 3u);
}
