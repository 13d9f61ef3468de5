// SPDX-License-Identifier: Apache-2.0
#pragma once

// Auditor checks over an exported ledger and the chunk store.
//
// verify_chain  one "block" row per block (header link, device uniqueness,
//               certificate) and one "transaction" row per transaction
//               (hash, link, sequence, signature, timestamp, encoding).
// verify_video  the chain rows of one device's block plus one "chunk" row
//               per sequence in range: fetch by address, check the bytes
//               hash to it, parse the frame, recompute HashVM and compare
//               with the recorded metadata_hash.
//
// Verdict: TAMPERED if any row fails; otherwise INCOMPLETE if any chunk
// could not be fetched; otherwise CLEAN. Exit codes 0 CLEAN, 1 TAMPERED,
// 2 INCOMPLETE; tools use 3 for usage and I/O errors.

#include <optional>
#include <string>
#include <vector>

#include "vidledger/cas_store.hpp"
#include "vidledger/ledger_io.hpp"

namespace vidledger::audit {

enum class CheckStatus { Pass, Fail, Unavailable };
enum class Verdict { Clean, Tampered, Incomplete };

std::string_view to_string(CheckStatus status);
std::string_view to_string(Verdict verdict);
int exit_code(Verdict verdict);
inline constexpr int kExitError = 3;

struct Check {
  std::string name;
  std::string target;
  CheckStatus status = CheckStatus::Pass;
  std::string detail;
  std::optional<std::size_t> block_index;
  /// Position inside the block; equals the sequence number when honest.
  std::optional<std::uint64_t> sequence;
};

struct AuditReport {
  std::string scope;
  std::vector<Check> checks;
  Verdict verdict = Verdict::Clean;

  std::size_t count(CheckStatus status) const;
  /// Sequences of failing rows, sorted and unique.
  std::vector<std::uint64_t> failing_sequences() const;
  /// Sequences whose chunk could not be fetched.
  std::vector<std::uint64_t> missing_sequences() const;
  int exit_code() const { return audit::exit_code(verdict); }
};

Verdict verdict_for(const std::vector<Check>& checks);

AuditReport verify_chain(const ledger::LoadedLedger& loaded);

/// Throws std::invalid_argument when the device has no block or the range
/// is empty. `to` is inclusive and defaults to the last transaction.
AuditReport verify_video(const ledger::LoadedLedger& loaded, cas::ChunkStore& store, const PublicKey& device,
                         std::optional<std::uint64_t> from = std::nullopt,
                         std::optional<std::uint64_t> to = std::nullopt);

enum class ReportFormat { Text, Json };

/// Deterministic rendering. JSON schema ("vidledger-audit/1"):
///   { format, scope, verdict, exit_code,
///     summary: { pass, fail, unavailable },
///     failing_sequences: [u64], missing_sequences: [u64],
///     checks: [ { name, target, status, detail, block?, sequence? } ] }
std::string export_report(const AuditReport& report, ReportFormat format);

}  // namespace vidledger::audit
