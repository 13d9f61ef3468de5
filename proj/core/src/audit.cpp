// SPDX-License-Identifier: Apache-2.0
#include "vidledger/audit.hpp"

#include <algorithm>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "vidledger/chunk.hpp"
#include "vidledger/validate.hpp"

namespace vidledger::audit {

namespace {
using ledger::Violation;

std::string block_target(std::size_t i) { return "block " + std::to_string(i); }
std::string tx_target(std::size_t i, std::uint64_t seq) {
  return "block " + std::to_string(i) + " seq " + std::to_string(seq);
}

void append_detail(std::string& detail, const Violation& v) {
  if (!detail.empty()) detail += "; ";
  detail += std::string(ledger::to_string(v.kind)) + ": " + v.detail;
}

/// Chain rows for the blocks selected by `want`.
template <class Pred>
std::vector<Check> chain_rows(const ledger::LoadedLedger& loaded, Pred want) {
  std::vector<Violation> all = ledger::validate_ledger(loaded.ledger).violations;
  all.insert(all.end(), loaded.defects.begin(), loaded.defects.end());

  const auto& blocks = loaded.ledger.blocks();
  std::map<std::size_t, std::string> block_fail;
  std::map<std::pair<std::size_t, std::uint64_t>, std::string> tx_fail;
  std::string stray;
  for (const Violation& v : all) {
    const bool located = v.block_index < blocks.size();
    if (located && !want(v.block_index)) continue;
    if (!located) {
      append_detail(stray, v);
    } else if (v.position && *v.position < blocks[v.block_index].transactions.size()) {
      append_detail(tx_fail[{v.block_index, *v.position}], v);
    } else {
      append_detail(block_fail[v.block_index], v);
    }
  }

  std::vector<Check> rows;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (!want(i)) continue;
    const auto& b = blocks[i];
    Check c{"block", block_target(i) + " device " + b.header.device_public_key.hex(), CheckStatus::Pass, "", i,
            std::nullopt};
    if (auto it = block_fail.find(i); it != block_fail.end()) {
      c.status = CheckStatus::Fail;
      c.detail = it->second;
    } else {
      c.detail = std::to_string(b.header.consensus_certificate.size()) + " certificate signatures";
    }
    rows.push_back(std::move(c));
    for (std::uint64_t k = 0; k < b.transactions.size(); ++k) {
      Check t{"transaction", tx_target(i, k), CheckStatus::Pass, "", i, k};
      if (auto it = tx_fail.find({i, k}); it != tx_fail.end()) {
        t.status = CheckStatus::Fail;
        t.detail = it->second;
      }
      rows.push_back(std::move(t));
    }
  }
  if (!stray.empty()) rows.push_back({"ledger", "ledger", CheckStatus::Fail, stray, std::nullopt, std::nullopt});
  return rows;
}

Check chunk_row(cas::ChunkStore& store, std::size_t block_index, const ledger::Transaction& tx, std::uint64_t k) {
  Check c{"chunk", tx_target(block_index, k), CheckStatus::Pass, "", block_index, k};
  const cas::ContentAddress& address = tx.payload.storage_address;
  std::optional<Bytes> bytes;
  try {
    bytes = store.get(address);
  } catch (const cas::IntegrityError&) {
    c.status = CheckStatus::Fail;
    c.detail = "stored bytes do not hash to address " + address.hex();
    return c;
  } catch (const cas::StoreError& e) {
    c.status = CheckStatus::Unavailable;
    c.detail = std::string("store unreachable: ") + e.what();
    return c;
  }
  if (!bytes) {
    c.status = CheckStatus::Unavailable;
    c.detail = "chunk " + address.hex() + " not found";
    return c;
  }
  if (!cas::verify_address(address, *bytes)) {
    c.status = CheckStatus::Fail;
    c.detail = "fetched bytes do not hash to address " + address.hex();
    return c;
  }
  try {
    const Digest recomputed = chunk::hash_metadata(chunk::extract_metadata(chunk::parse_chunk(*bytes)));
    if (recomputed != tx.payload.metadata_hash) {
      c.status = CheckStatus::Fail;
      c.detail = "HashVM " + to_hex(recomputed) + " != recorded " + to_hex(tx.payload.metadata_hash);
    } else {
      c.detail = "HashVM " + to_hex(recomputed);
    }
  } catch (const chunk::ChunkParseError& e) {
    c.status = CheckStatus::Fail;
    c.detail = std::string("stored frame does not parse: ") + e.what();
  }
  return c;
}
}  // namespace

std::string_view to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Unavailable: return "UNAVAILABLE";
  }
  return "?";
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Clean: return "CLEAN";
    case Verdict::Tampered: return "TAMPERED";
    case Verdict::Incomplete: return "INCOMPLETE";
  }
  return "?";
}

int exit_code(Verdict verdict) {
  switch (verdict) {
    case Verdict::Clean: return 0;
    case Verdict::Tampered: return 1;
    case Verdict::Incomplete: return 2;
  }
  return kExitError;
}

std::size_t AuditReport::count(CheckStatus status) const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [&](const Check& c) { return c.status == status; }));
}

namespace {
std::vector<std::uint64_t> sequences_with(const std::vector<Check>& checks, CheckStatus status) {
  std::set<std::uint64_t> s;
  for (const auto& c : checks)
    if (c.status == status && c.sequence) s.insert(*c.sequence);
  return {s.begin(), s.end()};
}
}  // namespace

std::vector<std::uint64_t> AuditReport::failing_sequences() const { return sequences_with(checks, CheckStatus::Fail); }

std::vector<std::uint64_t> AuditReport::missing_sequences() const {
  return sequences_with(checks, CheckStatus::Unavailable);
}

Verdict verdict_for(const std::vector<Check>& checks) {
  bool missing = false;
  for (const auto& c : checks) {
    if (c.status == CheckStatus::Fail) return Verdict::Tampered;
    if (c.status == CheckStatus::Unavailable) missing = true;
  }
  return missing ? Verdict::Incomplete : Verdict::Clean;
}

AuditReport verify_chain(const ledger::LoadedLedger& loaded) {
  AuditReport r;
  r.scope = "ledger, " + std::to_string(loaded.ledger.size()) + " blocks";
  r.checks = chain_rows(loaded, [](std::size_t) { return true; });
  r.verdict = verdict_for(r.checks);
  return r;
}

AuditReport verify_video(const ledger::LoadedLedger& loaded, cas::ChunkStore& store, const PublicKey& device,
                         std::optional<std::uint64_t> from, std::optional<std::uint64_t> to) {
  const auto index = loaded.ledger.block_index(device);
  if (!index) throw std::invalid_argument("no block for device " + device.hex());
  const ledger::Block& block = loaded.ledger.blocks()[*index];
  const std::uint64_t n = block.transactions.size();
  if (n == 0) throw std::invalid_argument("device " + device.hex() + " has no transactions");
  const std::uint64_t lo = from.value_or(0);
  const std::uint64_t hi = to.value_or(n - 1);
  if (lo > hi || hi >= n)
    throw std::invalid_argument("sequence range " + std::to_string(lo) + ".." + std::to_string(hi) +
                                " outside 0.." + std::to_string(n - 1));

  AuditReport r;
  r.scope = "device " + device.hex() + " seq " + std::to_string(lo) + ".." + std::to_string(hi);
  for (Check& c : chain_rows(loaded, [&](std::size_t i) { return i == *index; }))
    if (!c.sequence || (*c.sequence >= lo && *c.sequence <= hi)) r.checks.push_back(std::move(c));
  for (std::uint64_t k = lo; k <= hi; ++k) r.checks.push_back(chunk_row(store, *index, block.transactions[k], k));
  r.verdict = verdict_for(r.checks);
  return r;
}

std::string export_report(const AuditReport& report, ReportFormat format) {
  if (format == ReportFormat::Json) {
    nlohmann::ordered_json j;
    j["format"] = "vidledger-audit/1";
    j["scope"] = report.scope;
    j["verdict"] = std::string(to_string(report.verdict));
    j["exit_code"] = report.exit_code();
    j["summary"] = {{"pass", report.count(CheckStatus::Pass)},
                    {"fail", report.count(CheckStatus::Fail)},
                    {"unavailable", report.count(CheckStatus::Unavailable)}};
    j["failing_sequences"] = report.failing_sequences();
    j["missing_sequences"] = report.missing_sequences();
    auto checks = nlohmann::ordered_json::array();
    for (const auto& c : report.checks) {
      nlohmann::ordered_json row;
      row["name"] = c.name;
      row["target"] = c.target;
      row["status"] = std::string(to_string(c.status));
      row["detail"] = c.detail;
      if (c.block_index) row["block"] = *c.block_index;
      if (c.sequence) row["sequence"] = *c.sequence;
      checks.push_back(std::move(row));
    }
    j["checks"] = std::move(checks);
    return j.dump(2) + "\n";
  }

  std::ostringstream out;
  out << "scope: " << report.scope << '\n';
  for (const auto& c : report.checks) {
    out << to_string(c.status) << "  " << c.name << "  " << c.target;
    if (!c.detail.empty()) out << "  " << c.detail;
    out << '\n';
  }
  out << "summary: " << report.count(CheckStatus::Pass) << " pass, " << report.count(CheckStatus::Fail) << " fail, "
      << report.count(CheckStatus::Unavailable) << " unavailable\n";
  const auto missing = report.missing_sequences();
  if (!missing.empty()) {
    out << "missing sequences:";
    for (auto s : missing) out << ' ' << s;
    out << '\n';
  }
  out << "verdict: " << to_string(report.verdict) << " (exit code " << report.exit_code() << ")\n";
  return out.str();
}

}  // namespace vidledger::audit
