// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>

#include "ledger_fixture.hpp"
#include "test_support.hpp"
#include "vidledger/audit.hpp"
#include "vidledger/ledger_io.hpp"

using namespace vidledger;
using namespace vidledger::audit;
using vidledger::testing::identity_for;
using vidledger::testing::LedgerFixture;
using vidledger::testing::TempDir;

namespace {

struct Recorded {
  TempDir dir{"audit"};
  cas::FileStore store{dir.path() / "store"};
  LedgerFixture fx;
  PublicKey cam = identity_for("audit-camera", 0).public_key();
  std::vector<Bytes> frames;
  ledger::Ledger ledger{fx.membership};

  /// `lie_at` records a metadata hash that does not match the frame.
  explicit Recorded(std::size_t n = 5, std::optional<std::size_t> lie_at = std::nullopt) {
    ledger.insert_block(fx.certified_header(ledger, cam, 1'000));
    chunk::SyntheticCamera src(11, 300);
    for (std::size_t k = 0; k < n; ++k) {
      frames.push_back(src.next_frame());
      ledger::TransactionPayload p;
      p.storage_address = store.put(frames.back());
      p.metadata_hash = chunk::hash_metadata(chunk::extract_metadata(chunk::parse_chunk(frames.back())));
      if (lie_at == k) p.metadata_hash[0] ^= 1;
      p.timestamp_ms = 2'000 + k;
      ledger.append_transaction(cam, p, fx.gateways[0]);
    }
  }
  ledger::LoadedLedger loaded() const { return ledger::load_ledger(ledger::serialize_ledger(ledger)); }
  std::filesystem::path object(std::size_t k) const {
    return store.object_path(ledger.find_block(cam)->transactions[k].payload.storage_address);
  }
};

}  // namespace

TEST(Audit, CleanRecording) {
  Recorded r;
  const auto chain = verify_chain(r.loaded());
  EXPECT_EQ(chain.verdict, Verdict::Clean);
  EXPECT_EQ(chain.count(CheckStatus::Pass), chain.checks.size());
  const auto video = verify_video(r.loaded(), r.store, r.cam);
  EXPECT_EQ(video.verdict, Verdict::Clean);
  EXPECT_EQ(video.exit_code(), 0);
  std::size_t chunk_rows = 0;
  for (const auto& c : video.checks) chunk_rows += c.name == "chunk";
  EXPECT_EQ(chunk_rows, 5u);
}

TEST(Audit, AlteredChunkIsTamperedAtThatSequence) {
  Recorded r;
  {
    std::fstream f(r.object(2), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(40);
    f.put('\x5a');
  }
  const auto video = verify_video(r.loaded(), r.store, r.cam);
  EXPECT_EQ(video.verdict, Verdict::Tampered);
  EXPECT_EQ(video.exit_code(), 1);
  EXPECT_EQ(video.failing_sequences(), std::vector<std::uint64_t>{2});
  EXPECT_EQ(verify_chain(r.loaded()).verdict, Verdict::Clean);
}

TEST(Audit, MetadataMismatchIsTampered) {
  Recorded r(5, 3);
  EXPECT_EQ(verify_chain(r.loaded()).verdict, Verdict::Clean);
  const auto video = verify_video(r.loaded(), r.store, r.cam);
  EXPECT_EQ(video.verdict, Verdict::Tampered);
  EXPECT_EQ(video.failing_sequences(), std::vector<std::uint64_t>{3});
}

TEST(Audit, MissingChunkIsIncomplete) {
  Recorded r;
  std::filesystem::remove(r.object(1));
  const auto video = verify_video(r.loaded(), r.store, r.cam);
  EXPECT_EQ(video.verdict, Verdict::Incomplete);
  EXPECT_EQ(video.exit_code(), 2);
  EXPECT_EQ(video.missing_sequences(), std::vector<std::uint64_t>{1});
  EXPECT_TRUE(video.failing_sequences().empty());
}

TEST(Audit, FailureOutranksMissing) {
  const auto row = [](CheckStatus s) {
    Check c;
    c.status = s;
    return c;
  };
  EXPECT_EQ(verdict_for({row(CheckStatus::Unavailable), row(CheckStatus::Fail)}), Verdict::Tampered);
  EXPECT_EQ(verdict_for({row(CheckStatus::Unavailable), row(CheckStatus::Pass)}), Verdict::Incomplete);
  EXPECT_EQ(verdict_for({}), Verdict::Clean);
}

TEST(Audit, RangeSelection) {
  Recorded r;
  const auto video = verify_video(r.loaded(), r.store, r.cam, 1, 2);
  for (const auto& c : video.checks)
    if (c.sequence) {
      EXPECT_GE(*c.sequence, 1u);
      EXPECT_LE(*c.sequence, 2u);
    }
  EXPECT_THROW(verify_video(r.loaded(), r.store, r.cam, 3, 2), std::invalid_argument);
  EXPECT_THROW(verify_video(r.loaded(), r.store, r.cam, 0, 5), std::invalid_argument);
  EXPECT_THROW(verify_video(r.loaded(), r.store, identity_for("audit-camera", 9).public_key()), std::invalid_argument);
}

TEST(Audit, ChainTamperFoundAtSequence) {
  Recorded r;
  auto blocks = r.ledger.blocks();
  blocks[0].transactions[4].payload.timestamp_ms += 7;
  const ledger::LoadedLedger loaded{ledger::Ledger::from_untrusted(r.fx.membership, blocks), {}, {}};
  const auto chain = verify_chain(loaded);
  EXPECT_EQ(chain.verdict, Verdict::Tampered);
  EXPECT_EQ(chain.failing_sequences(), std::vector<std::uint64_t>{4});
}

TEST(Audit, JsonExport) {
  Recorded r;
  std::filesystem::remove(r.object(4));
  const auto video = verify_video(r.loaded(), r.store, r.cam);
  const auto j = nlohmann::json::parse(export_report(video, ReportFormat::Json));
  EXPECT_EQ(j["format"], "vidledger-audit/1");
  EXPECT_EQ(j["verdict"], "INCOMPLETE");
  EXPECT_EQ(j["exit_code"], 2);
  EXPECT_EQ(j["missing_sequences"], nlohmann::json::array({4}));
  EXPECT_EQ(j["summary"]["unavailable"], 1);
  EXPECT_EQ(j["checks"].size(), video.checks.size());
  EXPECT_EQ(export_report(video, ReportFormat::Json), export_report(video, ReportFormat::Json));
}

TEST(Audit, TextExportEndsWithVerdict) {
  Recorded r;
  const auto text = export_report(verify_chain(r.loaded()), ReportFormat::Text);
  EXPECT_NE(text.find("scope: ledger, 1 blocks"), std::string::npos);
  EXPECT_NE(text.find("verdict: CLEAN (exit code 0)\n"), std::string::npos);
}
