// SPDX-License-Identifier: Apache-2.0
// audit: offline verification of an exported ledger and the chunk store.
//
// Exit codes: 0 CLEAN, 1 TAMPERED, 2 INCOMPLETE, 3 usage or I/O error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "tool_common.hpp"
#include "vidledger/audit.hpp"
#include "vidledger/cas_service.hpp"
#include "vidledger/cas_store.hpp"
#include "vidledger/ledger_io.hpp"

using namespace vidledger;

namespace {

/// A directory is opened in place; anything else is a casd address.
std::unique_ptr<cas::ChunkStore> open_store(const std::string& where) {
  std::error_code ec;
  if (std::filesystem::is_directory(where, ec)) return std::make_unique<cas::FileStore>(where);
  return std::make_unique<cas::RemoteStore>(net::Endpoint::parse(where));
}

int emit(const audit::AuditReport& report, const std::string& format) {
  std::cout << audit::export_report(report, format == "json" ? audit::ReportFormat::Json : audit::ReportFormat::Text);
  if (format == "json") std::cout << '\n';
  return report.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Video ledger auditor"};
  app.require_subcommand(1);
  std::string ledger_path, store, device_hex, format = "text", out;
  std::optional<std::uint64_t> from, to;
  const std::vector<std::string> formats{"text", "json"};

  auto* chain = app.add_subcommand("verify-chain", "Check blocks, certificates and transaction chains");
  chain->add_option("--ledger", ledger_path, "Ledger file (binary log or JSON export)")->required();
  chain->add_option("--format", format)->check(CLI::IsMember(formats));

  auto* video = app.add_subcommand("verify-video", "Check one camera's chunks against the ledger");
  video->add_option("--ledger", ledger_path, "Ledger file (binary log or JSON export)")->required();
  video->add_option("--store", store, "casd host:port, or a store directory")->required();
  video->add_option("--device", device_hex, "Camera public key (64 hex)")->required();
  video->add_option("--from", from, "First sequence number");
  video->add_option("--to", to, "Last sequence number, inclusive");
  video->add_option("--format", format)->check(CLI::IsMember(formats));

  auto* exp = app.add_subcommand("export-json", "Write the JSON export of a ledger file");
  exp->add_option("--ledger", ledger_path)->required();
  exp->add_option("--out", out, "Output file; stdout when omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : audit::kExitError;
  }
  spdlog::set_level(spdlog::level::warn);

  try {
    const auto loaded = ledger::load_ledger_file(ledger_path);
    if (*chain) return emit(audit::verify_chain(loaded), format);
    if (*video) {
      const auto device = PublicKey::from_hex(device_hex);
      if (!device) throw std::invalid_argument("--device must be 64 hex characters");
      auto chunk_store = open_store(store);
      return emit(audit::verify_video(loaded, *chunk_store, *device, from, to), format);
    }
    const std::string json = ledger::export_json(loaded.ledger);
    if (out.empty()) {
      std::cout << json << '\n';
    } else {
      std::ofstream f(out);
      f << json << '\n';
      if (!f) throw std::runtime_error("cannot write " + out);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "audit: " << e.what() << '\n';
    return audit::kExitError;
  }
}
