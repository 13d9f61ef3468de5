// SPDX-License-Identifier: Apache-2.0
#pragma once

// Transaction-creation latency experiment. For each camera count the harness
// starts a fresh cluster in process (gateways over LocalNetwork, a chunk
// store either in process or behind casd's protocol on loopback), attaches
// every camera to gateway 0, streams synthetic chunks and collects the
// gateway's per-transaction timings.
//
// Plan file (JSON), all keys optional:
//   { "camera_counts": [1,2,4,8,16,32], "chunks_per_camera": 180,
//     "chunk_duration_ms": 10000, "payload_bytes": 524288, "gateways": 4,
//     "pacing": "max-rate" | "realtime", "store": "loopback" | "inproc",
//     "seed": 1, "work_dir": "" }
//
// Result CSV: camera_count,txn_count,mean_ms,median_ms,p95_ms,extract_ms,store_ms,sign_ms,append_ms

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace vidledger::bench {

enum class Pacing { MaxRate, Realtime };
enum class StoreMode { Loopback, InProcess };

struct ExperimentPlan {
  std::vector<std::uint32_t> camera_counts{1, 2, 4, 8, 16, 32};
  std::uint32_t chunks_per_camera = 180;
  std::uint64_t chunk_duration_ms = 10'000;
  /// Arbitrary default; the source hardware's bitrate is unknown.
  std::uint64_t payload_bytes = 512 * 1024;
  std::uint32_t gateways = 4;
  Pacing pacing = Pacing::MaxRate;
  StoreMode store = StoreMode::Loopback;
  std::uint64_t seed = 1;
  /// Scratch space for the chunk store; a fresh temp dir when empty.
  std::filesystem::path work_dir;

  /// Throws std::invalid_argument on zero or empty counts.
  void validate() const;
};

/// Throws std::invalid_argument on unknown keys or bad values.
ExperimentPlan parse_plan_json(std::string_view text);
std::string plan_to_json(const ExperimentPlan& plan);

struct ResultRow {
  std::uint32_t camera_count = 0;
  std::uint64_t txn_count = 0;
  double mean_ms = 0;
  double median_ms = 0;
  double p95_ms = 0;
  double extract_ms = 0;
  double store_ms = 0;
  double sign_ms = 0;
  double append_ms = 0;

  // Not exported to CSV.
  std::uint64_t expected_txns = 0;
  std::uint64_t failed = 0;
  /// Every camera's block holds sequences 0..chunks-1 in order.
  bool sequences_ok = false;
  /// All gateways ended with byte-identical serialised ledgers.
  bool replicas_converged = false;
  double wall_seconds = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  /// Some transaction failed; its timing is excluded.
  bool dirty = false;
  std::vector<std::string> warnings;
};

using Progress = std::function<void(const std::string&)>;

ResultRow run_single(const ExperimentPlan& plan, std::uint32_t camera_count, const Progress& progress = {});
ExperimentResult run_experiment(const ExperimentPlan& plan, const Progress& progress = {});

/// Nearest-rank percentile, p in (0, 100]. Throws on empty input.
double percentile(std::vector<double> values, double p);

inline constexpr std::string_view kResultCsvHeader =
    "camera_count,txn_count,mean_ms,median_ms,p95_ms,extract_ms,store_ms,sign_ms,append_ms";

std::string result_csv(const ExperimentResult& result);
/// Throws std::runtime_error naming the bad line.
ExperimentResult parse_result_csv(std::string_view text);

struct ScalingRow {
  std::uint32_t camera_count = 0;
  double mean_ms = 0;
  /// mean_ms / mean_ms at the baseline count.
  double ratio = 0;
};

/// Sorted by camera count. Throws std::invalid_argument when the baseline
/// count is absent or its mean is zero.
std::vector<ScalingRow> summarize(const ExperimentResult& result, std::uint32_t baseline_count);
std::string render_summary(const std::vector<ScalingRow>& rows, std::uint32_t baseline_count);

/// Latency against camera count (mean and p95), as a standalone SVG.
std::string plot_svg(const ExperimentResult& result);

}  // namespace vidledger::bench
