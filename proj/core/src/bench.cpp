// SPDX-License-Identifier: Apache-2.0
#include "vidledger/bench.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "vidledger/cas_service.hpp"
#include "vidledger/gateway.hpp"
#include "vidledger/local_network.hpp"
#include "vidledger/sha256.hpp"

namespace vidledger::bench {

namespace {
using Clock = std::chrono::steady_clock;

DeviceIdentity derived_identity(std::uint64_t seed, std::string_view role, std::uint64_t index) {
  CanonicalWriter w;
  w.field(std::string_view("vidledger-bench")).u64(seed).field(role).u64(index);
  const Digest d = sha256(std::move(w).take());
  return DeviceIdentity::from_seed(d);
}

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Removes the directory it made on scope exit.
struct ScratchDir {
  std::filesystem::path path;
  bool owned = false;

  explicit ScratchDir(const std::filesystem::path& requested, std::uint32_t cameras) {
    if (!requested.empty()) {
      path = requested / ("run-" + std::to_string(cameras));
    } else {
      std::random_device rd;
      path = std::filesystem::temp_directory_path() /
             ("vidledger-bench-" + std::to_string(rd()) + "-" + std::to_string(cameras));
    }
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
    owned = true;
  }
  ~ScratchDir() {
    std::error_code ec;
    if (owned) std::filesystem::remove_all(path, ec);
  }
};
}  // namespace

void ExperimentPlan::validate() const {
  if (camera_counts.empty()) throw std::invalid_argument("camera_counts must not be empty");
  for (auto c : camera_counts)
    if (c == 0) throw std::invalid_argument("camera_counts entries must be > 0");
  if (chunks_per_camera == 0) throw std::invalid_argument("chunks_per_camera must be > 0");
  if (chunk_duration_ms == 0) throw std::invalid_argument("chunk_duration_ms must be > 0");
  if (payload_bytes == 0) throw std::invalid_argument("payload_bytes must be > 0");
  if (gateways == 0) throw std::invalid_argument("gateways must be > 0");
}

ExperimentPlan parse_plan_json(std::string_view text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("plan is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("plan must be a JSON object");
  ExperimentPlan plan;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "camera_counts") {
        plan.camera_counts = value.get<std::vector<std::uint32_t>>();
      } else if (key == "chunks_per_camera") {
        plan.chunks_per_camera = value.get<std::uint32_t>();
      } else if (key == "chunk_duration_ms") {
        plan.chunk_duration_ms = value.get<std::uint64_t>();
      } else if (key == "payload_bytes") {
        plan.payload_bytes = value.get<std::uint64_t>();
      } else if (key == "gateways") {
        plan.gateways = value.get<std::uint32_t>();
      } else if (key == "seed") {
        plan.seed = value.get<std::uint64_t>();
      } else if (key == "work_dir") {
        plan.work_dir = value.get<std::string>();
      } else if (key == "pacing") {
        const auto s = value.get<std::string>();
        if (s == "max-rate")
          plan.pacing = Pacing::MaxRate;
        else if (s == "realtime")
          plan.pacing = Pacing::Realtime;
        else
          throw std::invalid_argument("pacing must be max-rate or realtime");
      } else if (key == "store") {
        const auto s = value.get<std::string>();
        if (s == "loopback")
          plan.store = StoreMode::Loopback;
        else if (s == "inproc")
          plan.store = StoreMode::InProcess;
        else
          throw std::invalid_argument("store must be loopback or inproc");
      } else {
        throw std::invalid_argument("unknown plan key " + key);
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad plan value: ") + e.what());
  }
  plan.validate();
  return plan;
}

std::string plan_to_json(const ExperimentPlan& plan) {
  nlohmann::ordered_json j;
  j["camera_counts"] = plan.camera_counts;
  j["chunks_per_camera"] = plan.chunks_per_camera;
  j["chunk_duration_ms"] = plan.chunk_duration_ms;
  j["payload_bytes"] = plan.payload_bytes;
  j["gateways"] = plan.gateways;
  j["pacing"] = plan.pacing == Pacing::MaxRate ? "max-rate" : "realtime";
  j["store"] = plan.store == StoreMode::Loopback ? "loopback" : "inproc";
  j["seed"] = plan.seed;
  j["work_dir"] = plan.work_dir.string();
  return j.dump(2) + "\n";
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty sample");
  if (!(p > 0 && p <= 100)) throw std::invalid_argument("percentile must be in (0, 100]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

ResultRow run_single(const ExperimentPlan& plan, std::uint32_t camera_count, const Progress& progress) {
  plan.validate();
  if (camera_count == 0) throw std::invalid_argument("camera_count must be > 0");
  const auto started = Clock::now();
  ScratchDir scratch(plan.work_dir, camera_count);

  auto file_store = std::make_shared<cas::FileStore>(scratch.path / "store");
  std::unique_ptr<cas::StoreServer> store_server;
  if (plan.store == StoreMode::Loopback)
    store_server = std::make_unique<cas::StoreServer>(file_store, net::Endpoint{"127.0.0.1", 0});

  Membership membership;
  membership.f = (plan.gateways - 1) / 3;
  std::vector<DeviceIdentity> ids;
  for (std::uint32_t i = 0; i < plan.gateways; ++i) {
    ids.push_back(derived_identity(plan.seed, "gateway", i));
    membership.peers.push_back(ids.back().public_key());
  }

  gateway::LocalNetwork network;
  auto metrics = std::make_shared<metrics::MemoryMetrics>();
  std::vector<std::unique_ptr<gateway::Gateway>> gateways;
  for (std::uint32_t i = 0; i < plan.gateways; ++i) {
    gateway::GatewayOptions opt;
    opt.membership = membership;
    if (store_server)
      opt.store = std::make_shared<cas::RemoteStore>(store_server->endpoint());
    else
      opt.store = file_store;
    opt.chunking.interval_ms = plan.chunk_duration_ms;
    opt.announce_interval = std::chrono::milliseconds(250);
    opt.seed = plan.seed * 1000 + i + 1;
    if (i == 0) opt.metrics = metrics;
    gateways.push_back(
        std::make_unique<gateway::Gateway>(ids[i], std::move(opt), network.transport_for(ids[i].public_key())));
    network.attach(*gateways.back());
  }
  for (auto& g : gateways) g->start();
  gateway::Gateway& front = *gateways.front();

  std::vector<DeviceIdentity> cameras;
  for (std::uint32_t c = 0; c < camera_count; ++c) cameras.push_back(derived_identity(plan.seed, "camera", c));

  std::atomic<std::uint64_t> failed{0};
  std::vector<std::thread> clients;
  const auto paced_start = Clock::now() + std::chrono::seconds(1);
  for (std::uint32_t c = 0; c < camera_count; ++c) {
    clients.emplace_back([&, c] {
      const PublicKey cam = cameras[c].public_key();
      bool ready = false;
      for (int attempt = 0; attempt < 10 && !ready; ++attempt)
        ready = front.handle_camera_hello(cam, std::chrono::seconds(5)).status == gateway::HelloStatus::Ready;
      if (!ready) {
        failed += plan.chunks_per_camera;
        spdlog::warn("bench: camera {} never admitted", c);
        return;
      }
      chunk::ChunkingConfig chunking{plan.chunk_duration_ms};
      chunk::SyntheticCamera source(plan.seed * 100'003 + c, plan.payload_bytes, chunking);
      // Realtime: cameras are phase-shifted across one interval, as
      // independently booted cameras would be.
      const auto phase = std::chrono::microseconds(plan.chunk_duration_ms * 1000 * c / camera_count);
      for (std::uint32_t k = 0; k < plan.chunks_per_camera; ++k) {
        const Bytes frame = source.next_frame();
        if (plan.pacing == Pacing::Realtime)
          std::this_thread::sleep_until(paced_start + phase + std::chrono::milliseconds(plan.chunk_duration_ms * (k + 1)));
        try {
          front.process_chunk(cam, frame);
        } catch (const std::exception& e) {
          ++failed;
          spdlog::warn("bench: camera {} chunk {} failed: {}", c, k, e.what());
        }
      }
    });
  }
  for (auto& t : clients) t.join();

  ResultRow row;
  row.camera_count = camera_count;
  row.expected_txns = static_cast<std::uint64_t>(camera_count) * plan.chunks_per_camera;
  row.failed = failed;

  const ledger::Ledger snapshot = front.ledger_snapshot();
  row.sequences_ok = true;
  for (const auto& cam : cameras) {
    const ledger::Block* b = snapshot.find_block(cam.public_key());
    if (!b) {
      row.sequences_ok = false;
      continue;
    }
    row.txn_count += b->transactions.size();
    for (std::size_t k = 0; k < b->transactions.size(); ++k)
      if (b->transactions[k].sequence_number != k) row.sequences_ok = false;
    if (b->transactions.size() != plan.chunks_per_camera) row.sequences_ok = false;
  }

  // Replicas catch up through TX_UPDATE and anti-entropy.
  const auto converge_deadline = Clock::now() + std::chrono::seconds(60);
  while (true) {
    const Bytes reference = front.serialized_ledger();
    bool same = true;
    for (std::size_t i = 1; i < gateways.size() && same; ++i) same = gateways[i]->serialized_ledger() == reference;
    if (same) {
      row.replicas_converged = true;
      break;
    }
    if (Clock::now() > converge_deadline) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }

  for (auto& g : gateways) {
    g->stop();
    network.detach(g->public_key());
  }
  if (store_server) store_server->stop();

  std::vector<double> total, extract, store, sign, append;
  for (const auto& t : metrics->rows()) {
    total.push_back(t.steps.total_ms);
    extract.push_back(t.steps.extract_ms);
    store.push_back(t.steps.store_ms);
    sign.push_back(t.steps.sign_ms);
    append.push_back(t.steps.append_ms);
  }
  if (!total.empty()) {
    row.mean_ms = mean_of(total);
    row.median_ms = percentile(total, 50);
    row.p95_ms = percentile(total, 95);
    row.extract_ms = mean_of(extract);
    row.store_ms = mean_of(store);
    row.sign_ms = mean_of(sign);
    row.append_ms = mean_of(append);
  }
  row.wall_seconds = std::chrono::duration<double>(Clock::now() - started).count();
  if (progress)
    progress(std::to_string(camera_count) + " cameras: " + std::to_string(row.txn_count) + " transactions, mean " +
             fmt(row.mean_ms, 3) + " ms, p95 " + fmt(row.p95_ms, 3) + " ms, " + fmt(row.wall_seconds, 1) + " s");
  return row;
}

ExperimentResult run_experiment(const ExperimentPlan& plan, const Progress& progress) {
  plan.validate();
  ExperimentResult result;
  for (auto count : plan.camera_counts) {
    ResultRow row = run_single(plan, count, progress);
    if (row.failed > 0) {
      result.dirty = true;
      result.warnings.push_back(std::to_string(count) + " cameras: " + std::to_string(row.failed) +
                                " transactions failed and were excluded");
    }
    if (!row.replicas_converged)
      result.warnings.push_back(std::to_string(count) + " cameras: replicas did not converge");
    result.rows.push_back(row);
  }
  std::sort(result.rows.begin(), result.rows.end(),
            [](const ResultRow& a, const ResultRow& b) { return a.camera_count < b.camera_count; });
  return result;
}

std::string result_csv(const ExperimentResult& result) {
  std::string out(kResultCsvHeader);
  out += '\n';
  for (const auto& r : result.rows) {
    out += std::to_string(r.camera_count) + ',' + std::to_string(r.txn_count);
    for (double v : {r.mean_ms, r.median_ms, r.p95_ms, r.extract_ms, r.store_ms, r.sign_ms, r.append_ms})
      out += ',' + fmt(v);
    out += '\n';
  }
  return out;
}

ExperimentResult parse_result_csv(std::string_view text) {
  ExperimentResult result;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == kResultCsvHeader) continue;
    std::vector<std::string> cols;
    std::stringstream ls(line);
    for (std::string col; std::getline(ls, col, ',');) cols.push_back(col);
    if (cols.size() != 9) throw std::runtime_error("results line " + std::to_string(lineno) + ": expected 9 columns");
    try {
      ResultRow r;
      std::size_t used = 0;
      const unsigned long cams = std::stoul(cols[0], &used);
      if (used != cols[0].size()) throw std::invalid_argument("trailing");
      r.camera_count = static_cast<std::uint32_t>(cams);
      r.txn_count = std::stoull(cols[1]);
      double* fields[] = {&r.mean_ms, &r.median_ms, &r.p95_ms, &r.extract_ms, &r.store_ms, &r.sign_ms, &r.append_ms};
      for (std::size_t i = 0; i < 7; ++i) *fields[i] = std::stod(cols[2 + i]);
      result.rows.push_back(r);
    } catch (const std::exception&) {
      throw std::runtime_error("results line " + std::to_string(lineno) + ": bad number");
    }
  }
  return result;
}

std::vector<ScalingRow> summarize(const ExperimentResult& result, std::uint32_t baseline_count) {
  auto base = std::find_if(result.rows.begin(), result.rows.end(),
                           [&](const ResultRow& r) { return r.camera_count == baseline_count; });
  if (base == result.rows.end())
    throw std::invalid_argument("baseline camera count " + std::to_string(baseline_count) + " not in result");
  if (base->mean_ms <= 0) throw std::invalid_argument("baseline mean latency is zero");
  std::vector<ScalingRow> rows;
  for (const auto& r : result.rows) rows.push_back({r.camera_count, r.mean_ms, r.mean_ms / base->mean_ms});
  std::sort(rows.begin(), rows.end(), [](const ScalingRow& a, const ScalingRow& b) { return a.camera_count < b.camera_count; });
  return rows;
}

std::string render_summary(const std::vector<ScalingRow>& rows, std::uint32_t baseline_count) {
  std::ostringstream out;
  out << "cameras  mean_ms  ratio_vs_" << baseline_count << '\n';
  for (const auto& r : rows) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%7u  %7.3f  %8.3f\n", r.camera_count, r.mean_ms, r.ratio);
    out << buf;
  }
  return out.str();
}

std::string plot_svg(const ExperimentResult& result) {
  constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 60;
  std::vector<ResultRow> rows = result.rows;
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) { return a.camera_count < b.camera_count; });

  double ymax = 1;
  for (const auto& r : rows) ymax = std::max({ymax, r.mean_ms, r.p95_ms});
  ymax *= 1.1;
  const double xmin = rows.empty() ? 0 : std::log2(static_cast<double>(rows.front().camera_count));
  const double xmax = rows.empty() ? 1 : std::max(xmin + 1, std::log2(static_cast<double>(rows.back().camera_count)));
  auto px = [&](std::uint32_t cams) { return L + (std::log2(static_cast<double>(cams)) - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double ms) { return H - B - ms / ymax * (H - T - B); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">Transaction creation latency</text>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = ymax * i / 5;
    s << "<text x=\"" << L - 6 << "\" y=\"" << fmt(py(v) + 4, 1) << "\" text-anchor=\"end\">" << fmt(v, 1) << "</text>\n";
    s << "<line x1=\"" << L << "\" y1=\"" << fmt(py(v), 1) << "\" x2=\"" << W - R << "\" y2=\"" << fmt(py(v), 1)
      << "\" stroke=\"#ddd\"/>\n";
  }
  for (const auto& r : rows)
    s << "<text x=\"" << fmt(px(r.camera_count), 1) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
      << r.camera_count << "</text>\n";
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">cameras per gateway</text>\n";
  s << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << (T + H - B) / 2
    << ")\">milliseconds</text>\n";

  auto series = [&](auto value, const char* colour, const char* label, double legend_y) {
    std::string pts;
    for (const auto& r : rows) pts += fmt(px(r.camera_count), 1) + "," + fmt(py(value(r)), 1) + " ";
    s << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"" << pts << "\"/>\n";
    for (const auto& r : rows)
      s << "<circle cx=\"" << fmt(px(r.camera_count), 1) << "\" cy=\"" << fmt(py(value(r)), 1) << "\" r=\"3\" fill=\""
        << colour << "\"/>\n";
    s << "<text x=\"" << W - R - 90 << "\" y=\"" << legend_y << "\" fill=\"" << colour << "\">" << label << "</text>\n";
  };
  series([](const ResultRow& r) { return r.mean_ms; }, "#1f77b4", "mean", T + 10);
  series([](const ResultRow& r) { return r.p95_ms; }, "#d62728", "p95", T + 26);
  s << "</svg>\n";
  return s.str();
}

}  // namespace vidledger::bench
