// SPDX-License-Identifier: Apache-2.0
#pragma once

// Gateway node: camera bootstrap through consensus, per-chunk ingestion
// (parse and hash, store, sign, append and broadcast) and replica
// synchronisation with the other gateways.
//
// Bootstrap ordering. Blocks form a single chain, so two cameras bootstrapped
// at once on different gateways would both try to link to the same tip. Each
// gateway therefore prepares at most one proposal per previous_header_hash
// (the tip lock). A proposal that links to an older tip is rejected; one that
// links to a tip we have not seen yet is deferred until we catch up. The lock
// is released when a block is inserted or when the instance times out. There
// is no view change, so release on timeout is where safety rests on timing:
// a proposal that reached a quorum of PREPAREs just before the timeout could
// in principle still be decided after a competing one was accepted.
//
// Threads: one inbox worker handles peer messages in arrival order, one
// ticker drives timeouts, retries and the periodic HELLO_ANNOUNCE. Camera
// sessions call handle_camera_hello() and process_chunk() from their own
// threads. Hashing and storing run without the state lock; signing and
// appending take it briefly.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "vidledger/cas_store.hpp"
#include "vidledger/chunk.hpp"
#include "vidledger/consensus.hpp"
#include "vidledger/ledger.hpp"
#include "vidledger/ledger_io.hpp"
#include "vidledger/metrics.hpp"
#include "vidledger/peer_protocol.hpp"

namespace vidledger::gateway {

/// Best-effort delivery of signed peer messages. Implementations must not
/// block on the receiver and must not throw.
class PeerTransport {
 public:
  virtual ~PeerTransport() = default;
  virtual void send(const PublicKey& to, const PeerMessage& message) = 0;
};

struct GatewayOptions {
  Membership membership;
  std::shared_ptr<cas::ChunkStore> store;
  chunk::ChunkingConfig chunking;
  std::chrono::milliseconds consensus_timeout{2000};
  std::chrono::milliseconds announce_interval{1000};
  /// Store retries back off from initial to max until the deadline passes.
  std::chrono::milliseconds store_retry_initial{20};
  std::chrono::milliseconds store_retry_max{1000};
  std::chrono::milliseconds store_retry_deadline{30000};
  /// Append-only ledger log; none when empty.
  std::filesystem::path ledger_file;
  std::shared_ptr<metrics::MetricsSink> metrics;
  /// Unix milliseconds for headers and transaction timestamps.
  std::function<std::uint64_t()> wall_clock_ms;
  /// Seeds proposal retry jitter; 0 draws from std::random_device.
  std::uint64_t seed = 0;
};

enum class HelloStatus { Ready, ManagedElsewhere, Timeout };

struct HelloResult {
  HelloStatus status = HelloStatus::Timeout;
  std::optional<PublicKey> managing_gateway;
};

/// The camera has no block here, or another gateway manages it.
class NotManagedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The store stayed unreachable past the retry deadline (or failed
/// permanently). No transaction was created.
class StoreUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProcessedChunk {
  ledger::Transaction tx;
  metrics::StepTimings timings;
};

struct GatewayCounters {
  std::uint64_t messages_in = 0;
  std::uint64_t decode_errors = 0;
  std::uint64_t non_member = 0;
  std::uint64_t bad_signature = 0;
  /// Replica transactions that failed verification (byzantine evidence).
  std::uint64_t invalid_transactions = 0;
  /// Same sequence number, different transaction.
  std::uint64_t conflicting_transactions = 0;
  std::uint64_t invalid_headers = 0;
  std::uint64_t replica_transactions = 0;
  std::uint64_t blocks_inserted = 0;
  std::uint64_t certificate_merges = 0;
  std::uint64_t consensus_timeouts = 0;
  std::uint64_t sync_requests_sent = 0;
  std::uint64_t sync_responses_sent = 0;
  std::uint64_t store_retries = 0;
};

class Gateway {
 public:
  Gateway(DeviceIdentity identity, GatewayOptions options, std::shared_ptr<PeerTransport> transport);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  void start();
  void stop();

  const PublicKey& public_key() const { return identity_.public_key(); }
  const Membership& membership() const { return options_.membership; }

  /// Blocks until the camera's block exists or `wait` elapses. Starts a
  /// bootstrap when no block is known; the bootstrap keeps going after a
  /// Timeout so a retried HELLO usually finds the block ready.
  HelloResult handle_camera_hello(const PublicKey& camera, std::chrono::milliseconds wait);

  /// Steps 1-4 for one frame. Throws chunk::ChunkParseError (rejected, no
  /// transaction), NotManagedError or StoreUnavailable.
  ProcessedChunk process_chunk(const PublicKey& camera, ByteView frame);

  /// Transport entry point: queues an encoded PeerMessage for the worker.
  void deliver(Bytes encoded);
  /// Handles one message synchronously (the worker calls this).
  void on_peer_message(const PeerMessage& message);
  /// Broadcasts a HELLO_ANNOUNCE now.
  void announce();

  ledger::Ledger ledger_snapshot() const;
  Bytes serialized_ledger() const;
  std::size_t transaction_count(const PublicKey& camera) const;
  GatewayCounters counters() const;
  /// Nothing queued, no consensus in flight, no buffered replica updates.
  bool quiescent() const;

 private:
  struct Outgoing {
    std::optional<PublicKey> to;  // broadcast when empty
    PeerBody body;
  };
  using Outbox = std::vector<Outgoing>;

  struct Slot {
    std::unique_ptr<consensus::ConsensusInstance> instance;
    std::chrono::steady_clock::time_point deadline;
    bool own = false;
  };

  struct TipLock {
    Digest previous{};
    Digest header_hash{};
    PublicKey device;
    std::chrono::steady_clock::time_point deadline;
  };

  using Clock = std::chrono::steady_clock;

  void worker_loop();
  void ticker_loop();
  void flush(Outbox& out);
  std::uint64_t wall_ms() const;

  // All *_locked members require mutex_.
  Slot& slot_locked(const PublicKey& device);
  consensus::Acceptance validate_proposal_locked(const ledger::BlockHeader& header);
  bool tip_busy_locked(const Digest& except_hash) const;
  void absorb_locked(const PublicKey& device, consensus::StepResult result, Outbox& out);
  void on_decided_locked(ledger::BlockHeader header, Outbox& out);
  bool insert_locked(ledger::BlockHeader header, Outbox& out);
  void merge_certificate_locked(const PublicKey& device, const std::vector<CertificateEntry>& incoming);
  void settle_locked(Outbox& out);
  void try_propose_locked(Outbox& out);
  void expire_locked(Outbox& out);
  void apply_replica_tx_locked(const PublicKey& from, const PublicKey& device, const ledger::Transaction& tx,
                               Outbox& out);
  bool commit_locked(const PublicKey& device, const ledger::Transaction& tx);
  void drain_buffer_locked(const PublicKey& device);
  void request_sync_locked(const PublicKey& from, const PublicKey& device, std::uint64_t from_sequence,
                           Outbox& out);
  HelloResult hello_result_locked(const PublicKey& camera) const;
  std::mutex& session_lock(const PublicKey& camera);

  void on_announce_locked(const PublicKey& from, const HelloAnnounce& body, Outbox& out);
  void on_consensus_locked(const PublicKey& from, const ConsensusEnvelope& body, Outbox& out);
  void on_sync_request_locked(const PublicKey& from, const SyncRequest& body, Outbox& out);
  void on_sync_response_locked(const PublicKey& from, const SyncResponse& body, Outbox& out);

  cas::ContentAddress store_with_retry(ByteView frame);

  DeviceIdentity identity_;
  GatewayOptions options_;
  std::shared_ptr<PeerTransport> transport_;
  std::unique_ptr<ledger::LedgerLog> log_;

  mutable std::mutex mutex_;
  std::condition_variable state_cv_;
  ledger::Ledger ledger_;
  std::map<PublicKey, Slot> instances_;
  std::optional<TipLock> tip_lock_;
  std::vector<PublicKey> wanted_;
  Clock::time_point next_propose_at_{};
  std::map<Digest, ledger::BlockHeader> pending_headers_;
  std::map<PublicKey, std::map<std::uint64_t, ledger::Transaction>> tx_buffer_;
  std::map<std::pair<PublicKey, std::uint64_t>, Clock::time_point> sync_requested_;
  std::map<PublicKey, std::unique_ptr<std::mutex>> session_locks_;
  GatewayCounters counters_;
  std::mt19937_64 rng_;

  mutable std::mutex inbox_mutex_;
  std::condition_variable inbox_cv_;
  std::deque<Bytes> inbox_;
  bool worker_busy_ = false;
  std::atomic<bool> stopping_{false};
  bool started_ = false;
  std::thread worker_;
  std::thread ticker_;
};

}  // namespace vidledger::gateway
