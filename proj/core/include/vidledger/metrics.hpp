// SPDX-License-Identifier: Apache-2.0
#pragma once

// Per-transaction timing export. One row per appended transaction:
//
//   camera,seq,extract_ms,store_ms,sign_ms,append_ms,total_ms
//
// total_ms runs from "frame fully received" to "appended locally and
// TX_UPDATE handed to the transport"; append_ms covers append plus broadcast.

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include "vidledger/bytes.hpp"

namespace vidledger::metrics {

struct StepTimings {
  double extract_ms = 0;
  double store_ms = 0;
  double sign_ms = 0;
  double append_ms = 0;
  double total_ms = 0;
};

struct TransactionTiming {
  PublicKey camera;
  std::uint64_t sequence = 0;
  StepTimings steps;
};

class MetricsSink {
 public:
  virtual ~MetricsSink() = default;
  virtual void record(const TransactionTiming& row) = 0;
};

inline constexpr std::string_view kCsvHeader = "camera,seq,extract_ms,store_ms,sign_ms,append_ms,total_ms";

std::string csv_row(const TransactionTiming& row);
/// Parses rows written by CsvMetrics (header line skipped). Throws
/// std::runtime_error naming the bad line.
std::vector<TransactionTiming> parse_csv(std::string_view text);

class CsvMetrics final : public MetricsSink {
 public:
  /// Truncates `path` and writes the header.
  explicit CsvMetrics(const std::filesystem::path& path);
  void record(const TransactionTiming& row) override;
  void flush();

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

class MemoryMetrics final : public MetricsSink {
 public:
  void record(const TransactionTiming& row) override;
  std::vector<TransactionTiming> rows() const;
  void clear();

 private:
  mutable std::mutex mutex_;
  std::vector<TransactionTiming> rows_;
};

}  // namespace vidledger::metrics
