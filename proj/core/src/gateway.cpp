// SPDX-License-Identifier: Apache-2.0
#include "vidledger/gateway.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>

namespace vidledger::gateway {

namespace {
using Clock = std::chrono::steady_clock;

constexpr std::size_t kMaxSyncBatch = 256;
constexpr std::size_t kMaxBufferedPerDevice = 8192;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

std::string short_hex(const PublicKey& k) { return k.hex().substr(0, 12); }

/// Valid distinct COMMIT votes, sorted by gateway key.
std::vector<CertificateEntry> sanitize(const Digest& header_hash, const std::vector<CertificateEntry>& entries,
                                       const Membership& membership) {
  std::map<PublicKey, Signature> kept;
  const Bytes msg = vote_signing_bytes(Phase::Commit, header_hash);
  for (const auto& e : entries) {
    if (!membership.contains(e.gateway) || kept.count(e.gateway)) continue;
    if (verify(e.gateway, msg, e.signature)) kept.emplace(e.gateway, e.signature);
  }
  std::vector<CertificateEntry> out;
  for (const auto& [g, s] : kept) out.push_back({g, s});
  return out;
}
}  // namespace

Gateway::Gateway(DeviceIdentity identity, GatewayOptions options, std::shared_ptr<PeerTransport> transport)
    : identity_(std::move(identity)),
      options_(std::move(options)),
      transport_(std::move(transport)),
      ledger_(options_.membership) {
  if (!identity_.has_secret()) throw std::invalid_argument("gateway identity needs a secret key");
  if (!options_.membership.contains(identity_.public_key()))
    throw std::invalid_argument("gateway key is not in the membership");
  if (!options_.store) throw std::invalid_argument("gateway needs a chunk store");
  if (!transport_) throw std::invalid_argument("gateway needs a peer transport");
  options_.chunking.validate();
  if (options_.consensus_timeout.count() <= 0) throw std::invalid_argument("consensus timeout must be > 0");
  if (!options_.ledger_file.empty())
    log_ = std::make_unique<ledger::LedgerLog>(options_.ledger_file, options_.membership);
  rng_.seed(options_.seed ? options_.seed : std::random_device{}());
}

Gateway::~Gateway() { stop(); }

void Gateway::start() {
  std::lock_guard lock(inbox_mutex_);
  if (started_) return;
  started_ = true;
  worker_ = std::thread([this] { worker_loop(); });
  ticker_ = std::thread([this] { ticker_loop(); });
}

void Gateway::stop() {
  {
    std::lock_guard lock(inbox_mutex_);
    stopping_ = true;
  }
  inbox_cv_.notify_all();
  {
    std::lock_guard lock(mutex_);
  }
  state_cv_.notify_all();
  if (worker_.joinable()) worker_.join();
  if (ticker_.joinable()) ticker_.join();
  if (log_) log_->flush();
}

std::uint64_t Gateway::wall_ms() const {
  if (options_.wall_clock_ms) return options_.wall_clock_ms();
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                        std::chrono::system_clock::now().time_since_epoch())
                                        .count());
}

void Gateway::flush(Outbox& out) {
  for (auto& o : out) {
    const PeerMessage msg = PeerMessage::make(std::move(o.body), identity_);
    if (o.to) {
      transport_->send(*o.to, msg);
      continue;
    }
    for (const auto& peer : options_.membership.peers)
      if (peer != identity_.public_key()) transport_->send(peer, msg);
  }
  out.clear();
}

// ---------------------------------------------------------------- inbox

void Gateway::deliver(Bytes encoded) {
  {
    std::lock_guard lock(inbox_mutex_);
    if (stopping_) return;
    inbox_.push_back(std::move(encoded));
  }
  inbox_cv_.notify_one();
}

void Gateway::worker_loop() {
  while (true) {
    Bytes item;
    {
      std::unique_lock lock(inbox_mutex_);
      inbox_cv_.wait(lock, [&] { return stopping_ || !inbox_.empty(); });
      if (stopping_) return;
      item = std::move(inbox_.front());
      inbox_.pop_front();
      worker_busy_ = true;
    }
    try {
      on_peer_message(PeerMessage::decode(item));
    } catch (const DecodeError& e) {
      std::lock_guard lock(mutex_);
      ++counters_.decode_errors;
      spdlog::warn("gateway {}: undecodable peer message: {}", short_hex(public_key()), e.what());
    } catch (const std::exception& e) {
      spdlog::error("gateway {}: peer message handling failed: {}", short_hex(public_key()), e.what());
    }
    std::lock_guard lock(inbox_mutex_);
    worker_busy_ = false;
  }
}

void Gateway::ticker_loop() {
  const auto tick = std::min<std::chrono::milliseconds>(std::chrono::milliseconds(25), options_.announce_interval);
  auto next_announce = Clock::now() + options_.announce_interval;
  while (true) {
    {
      std::unique_lock lock(inbox_mutex_);
      if (inbox_cv_.wait_for(lock, tick, [&] { return stopping_.load(); })) return;
    }
    Outbox out;
    {
      std::lock_guard lock(mutex_);
      expire_locked(out);
      settle_locked(out);
    }
    flush(out);
    if (Clock::now() >= next_announce) {
      announce();
      next_announce = Clock::now() + options_.announce_interval;
      if (log_) log_->flush();
    }
  }
}

void Gateway::announce() {
  HelloAnnounce body;
  {
    std::lock_guard lock(mutex_);
    for (const auto& b : ledger_.blocks())
      body.blocks.push_back({b.header.device_public_key, b.transactions.size(),
                             certificate_digest(b.header.consensus_certificate)});
  }
  Outbox out;
  out.push_back({std::nullopt, std::move(body)});
  flush(out);
}

void Gateway::on_peer_message(const PeerMessage& message) {
  Outbox out;
  {
    std::lock_guard lock(mutex_);
    ++counters_.messages_in;
    if (!options_.membership.contains(message.sender)) {
      ++counters_.non_member;
      spdlog::warn("gateway {}: dropped message from non-member {}", short_hex(public_key()),
                   short_hex(message.sender));
      return;
    }
    if (message.sender == public_key()) return;
    if (!message.signature_valid()) {
      ++counters_.bad_signature;
      spdlog::warn("gateway {}: dropped {} with bad signature from {}", short_hex(public_key()),
                   to_string(message.kind()), short_hex(message.sender));
      return;
    }
    const PublicKey& from = message.sender;
    std::visit(
        [&](const auto& body) {
          using T = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<T, HelloAnnounce>) on_announce_locked(from, body, out);
          if constexpr (std::is_same_v<T, ConsensusEnvelope>) on_consensus_locked(from, body, out);
          if constexpr (std::is_same_v<T, TxUpdate>) apply_replica_tx_locked(from, body.device, body.tx, out);
          if constexpr (std::is_same_v<T, SyncRequest>) on_sync_request_locked(from, body, out);
          if constexpr (std::is_same_v<T, SyncResponse>) on_sync_response_locked(from, body, out);
        },
        message.body);
    settle_locked(out);
  }
  flush(out);
}

// ------------------------------------------------------------ consensus

Gateway::Slot& Gateway::slot_locked(const PublicKey& device) {
  auto it = instances_.find(device);
  if (it != instances_.end()) return it->second;
  Slot slot;
  slot.instance = std::make_unique<consensus::ConsensusInstance>(
      options_.membership, device, identity_,
      [this](const ledger::BlockHeader& h) { return validate_proposal_locked(h); });
  slot.deadline = Clock::now() + options_.consensus_timeout;
  return instances_.emplace(device, std::move(slot)).first->second;
}

bool Gateway::tip_busy_locked(const Digest& except_hash) const {
  return tip_lock_ && tip_lock_->previous == ledger_.tip_hash() && tip_lock_->header_hash != except_hash &&
         Clock::now() < tip_lock_->deadline;
}

consensus::Acceptance Gateway::validate_proposal_locked(const ledger::BlockHeader& header) {
  using consensus::Acceptance;
  if (ledger_.find_block(header.device_public_key)) return Acceptance::Reject;
  const Digest tip = ledger_.tip_hash();
  if (header.previous_header_hash != tip) {
    const bool stale = is_zero(header.previous_header_hash) ||
                       std::any_of(ledger_.blocks().begin(), ledger_.blocks().end(),
                                   [&](const ledger::Block& b) { return b.header_hash == header.previous_header_hash; });
    return stale ? Acceptance::Reject : Acceptance::Defer;
  }
  const Digest h = header.hash();
  if (tip_busy_locked(h)) return Acceptance::Defer;
  tip_lock_ = TipLock{tip, h, header.device_public_key, Clock::now() + options_.consensus_timeout};
  return Acceptance::Accept;
}

void Gateway::absorb_locked(const PublicKey& device, consensus::StepResult result, Outbox& out) {
  for (auto& m : result.outbound) out.push_back({std::nullopt, ConsensusEnvelope{device, std::move(m)}});
  if (result.decided) on_decided_locked(std::move(*result.decided), out);
}

void Gateway::on_consensus_locked(const PublicKey& from, const ConsensusEnvelope& body, Outbox& out) {
  if (body.message.sender != from) {
    ++counters_.bad_signature;
    return;
  }
  if (ledger_.find_block(body.device)) return;  // late vote for a settled block
  Slot& slot = slot_locked(body.device);
  absorb_locked(body.device, slot.instance->step(body.message), out);
}

void Gateway::on_decided_locked(ledger::BlockHeader header, Outbox& out) {
  const PublicKey device = header.device_public_key;
  instances_.erase(device);
  if (ledger_.find_block(device)) {
    merge_certificate_locked(device, header.consensus_certificate);
    return;
  }
  if (header.previous_header_hash == ledger_.tip_hash()) {
    insert_locked(std::move(header), out);
  } else {
    const Digest prev = header.previous_header_hash;
    pending_headers_.emplace(prev, std::move(header));
  }
}

bool Gateway::insert_locked(ledger::BlockHeader header, Outbox& out) {
  const PublicKey device = header.device_public_key;
  header.consensus_certificate = sanitize(header.hash(), header.consensus_certificate, options_.membership);
  try {
    ledger_.insert_block(header);
  } catch (const ledger::LedgerError& e) {
    ++counters_.invalid_headers;
    spdlog::warn("gateway {}: rejected block for {}: {}", short_hex(public_key()), short_hex(device), e.what());
    return false;
  }
  ++counters_.blocks_inserted;
  if (log_) log_->append_block(header);
  instances_.erase(device);
  if (tip_lock_ && tip_lock_->device == device) tip_lock_.reset();
  std::erase(wanted_, device);
  if (header.managing_gateway == public_key()) out.push_back({std::nullopt, SyncResponse{device, header, 0, {}}});
  drain_buffer_locked(device);
  state_cv_.notify_all();

  auto next = pending_headers_.find(ledger_.tip_hash());
  if (next != pending_headers_.end()) {
    ledger::BlockHeader h = std::move(next->second);
    pending_headers_.erase(next);
    insert_locked(std::move(h), out);
  }
  return true;
}

void Gateway::merge_certificate_locked(const PublicKey& device, const std::vector<CertificateEntry>& incoming) {
  const ledger::Block* block = ledger_.find_block(device);
  if (!block) return;
  std::vector<CertificateEntry> all = block->header.consensus_certificate;
  all.insert(all.end(), incoming.begin(), incoming.end());
  std::vector<CertificateEntry> merged = sanitize(block->header_hash, all, options_.membership);
  if (merged == block->header.consensus_certificate) return;
  if (merged.size() < options_.membership.quorum()) return;
  ledger_.replace_certificate(device, merged);
  ++counters_.certificate_merges;
  if (log_) log_->append_block(ledger_.find_block(device)->header);
}

void Gateway::settle_locked(Outbox& out) {
  bool progressed = true;
  while (progressed) {
    progressed = false;
    std::vector<PublicKey> deferred;
    for (const auto& [device, slot] : instances_)
      if (slot.instance->has_deferred()) deferred.push_back(device);
    for (const auto& device : deferred) {
      auto it = instances_.find(device);
      if (it == instances_.end() || !it->second.instance->has_deferred()) continue;
      consensus::StepResult r = it->second.instance->reevaluate();
      if (!it->second.instance->has_deferred()) progressed = true;
      absorb_locked(device, std::move(r), out);
    }
  }
  try_propose_locked(out);
}

void Gateway::try_propose_locked(Outbox& out) {
  if (wanted_.empty() || Clock::now() < next_propose_at_) return;
  if (tip_busy_locked(Digest{})) return;
  for (const PublicKey& camera : wanted_) {
    if (ledger_.find_block(camera)) continue;
    auto existing = instances_.find(camera);
    if (existing != instances_.end() &&
        (existing->second.instance->has_proposal() || existing->second.instance->has_deferred()))
      continue;  // someone is already bootstrapping this camera
    Slot& slot = slot_locked(camera);
    slot.own = true;
    slot.deadline = Clock::now() + options_.consensus_timeout;
    const ledger::BlockHeader header = ledger_.build_block_header(camera, wall_ms(), public_key());
    tip_lock_ = TipLock{ledger_.tip_hash(), header.hash(), camera, slot.deadline};
    spdlog::debug("gateway {}: proposing block for camera {}", short_hex(public_key()), short_hex(camera));
    absorb_locked(camera, slot.instance->propose(header), out);
    return;
  }
}

void Gateway::expire_locked(Outbox&) {
  const auto now = Clock::now();
  for (auto it = instances_.begin(); it != instances_.end();) {
    if (it->second.deadline > now) {
      ++it;
      continue;
    }
    const PublicKey device = it->first;
    if (it->second.own) {
      ++counters_.consensus_timeouts;
      // Jitter so two gateways that collided on one tip do not collide again.
      const auto span = std::max<std::int64_t>(1, options_.consensus_timeout.count() / 2);
      const auto jitter = std::chrono::milliseconds(options_.consensus_timeout.count() / 4 +
                                                    static_cast<std::int64_t>(rng_() % span));
      next_propose_at_ = now + jitter;
      spdlog::info("gateway {}: bootstrap of {} timed out, retrying", short_hex(public_key()), short_hex(device));
    }
    if (tip_lock_ && tip_lock_->device == device) tip_lock_.reset();
    it = instances_.erase(it);
  }
  if (tip_lock_ && tip_lock_->deadline <= now) tip_lock_.reset();
  for (auto it = sync_requested_.begin(); it != sync_requested_.end();)
    it = it->second <= now ? sync_requested_.erase(it) : std::next(it);
}

// ------------------------------------------------------- replication

void Gateway::request_sync_locked(const PublicKey& from, const PublicKey& device, std::uint64_t from_sequence,
                                  Outbox& out) {
  const auto key = std::make_pair(device, from_sequence);
  const auto now = Clock::now();
  auto it = sync_requested_.find(key);
  if (it != sync_requested_.end() && it->second > now) return;
  sync_requested_[key] = now + std::max<std::chrono::milliseconds>(options_.announce_interval / 2,
                                                                    std::chrono::milliseconds(50));
  ++counters_.sync_requests_sent;
  out.push_back({from, SyncRequest{device, from_sequence}});
}

bool Gateway::commit_locked(const PublicKey& device, const ledger::Transaction& tx) {
  try {
    ledger_.commit_transaction(device, tx);
  } catch (const ledger::LedgerError& e) {
    ++counters_.invalid_transactions;
    spdlog::warn("gateway {}: rejected replica transaction {} for {}: {}", short_hex(public_key()),
                 tx.sequence_number, short_hex(device), e.what());
    return false;
  }
  ++counters_.replica_transactions;
  if (log_) log_->append_transaction(device, tx);
  return true;
}

void Gateway::drain_buffer_locked(const PublicKey& device) {
  auto buf = tx_buffer_.find(device);
  if (buf == tx_buffer_.end()) return;
  const ledger::Block* block = ledger_.find_block(device);
  if (!block) return;
  auto& pending = buf->second;
  while (!pending.empty()) {
    const std::uint64_t next = block->transactions.size();
    auto first = pending.begin();
    if (first->first < next) {
      pending.erase(first);
      continue;
    }
    if (first->first != next) break;
    const ledger::Transaction tx = std::move(first->second);
    pending.erase(first);
    if (!commit_locked(device, tx)) break;
  }
  if (pending.empty()) tx_buffer_.erase(buf);
  state_cv_.notify_all();
}

void Gateway::apply_replica_tx_locked(const PublicKey& from, const PublicKey& device, const ledger::Transaction& tx,
                                      Outbox& out) {
  const ledger::Block* block = ledger_.find_block(device);
  auto buffer = [&] {
    auto& pending = tx_buffer_[device];
    if (pending.size() < kMaxBufferedPerDevice) pending.emplace(tx.sequence_number, tx);
  };
  if (!block) {
    buffer();
    request_sync_locked(from, device, 0, out);
    return;
  }
  const std::uint64_t next = block->transactions.size();
  if (tx.sequence_number < next) {
    if (block->transactions[tx.sequence_number] != tx) {
      ++counters_.conflicting_transactions;
      spdlog::warn("gateway {}: conflicting transaction {} for {} from {}", short_hex(public_key()),
                   tx.sequence_number, short_hex(device), short_hex(from));
    }
    return;
  }
  if (tx.sequence_number > next) {
    buffer();
    request_sync_locked(from, device, next, out);
    return;
  }
  if (commit_locked(device, tx)) drain_buffer_locked(device);
}

void Gateway::on_announce_locked(const PublicKey& from, const HelloAnnounce& body, Outbox& out) {
  for (const auto& e : body.blocks) {
    const ledger::Block* block = ledger_.find_block(e.device);
    if (!block) {
      request_sync_locked(from, e.device, 0, out);
      continue;
    }
    const std::uint64_t have = block->transactions.size();
    if (e.tx_count > have || certificate_digest(block->header.consensus_certificate) != e.certificate_digest)
      request_sync_locked(from, e.device, have, out);
  }
}

void Gateway::on_sync_request_locked(const PublicKey& from, const SyncRequest& body, Outbox& out) {
  const ledger::Block* block = ledger_.find_block(body.device);
  if (!block) return;
  SyncResponse resp;
  resp.device = body.device;
  resp.header = block->header;
  resp.from_sequence = body.from_sequence;
  const std::size_t n = block->transactions.size();
  for (std::size_t i = body.from_sequence; i < n && resp.transactions.size() < kMaxSyncBatch; ++i)
    resp.transactions.push_back(block->transactions[i]);
  ++counters_.sync_responses_sent;
  out.push_back({from, std::move(resp)});
}

void Gateway::on_sync_response_locked(const PublicKey& from, const SyncResponse& body, Outbox& out) {
  if (body.header) {
    const ledger::BlockHeader& h = *body.header;
    if (h.device_public_key != body.device) {
      ++counters_.invalid_headers;
      return;
    }
    const ledger::Block* block = ledger_.find_block(body.device);
    if (block) {
      if (block->header_hash == h.hash()) {
        merge_certificate_locked(body.device, h.consensus_certificate);
      } else {
        ++counters_.invalid_headers;
        spdlog::warn("gateway {}: {} sent a different header for {}", short_hex(public_key()), short_hex(from),
                     short_hex(body.device));
      }
    } else if (check_certificate(h.hash(), h.consensus_certificate, options_.membership)
                   .meets(options_.membership.quorum())) {
      instances_.erase(body.device);
      if (h.previous_header_hash == ledger_.tip_hash())
        insert_locked(h, out);
      else
        pending_headers_.emplace(h.previous_header_hash, h);
    } else {
      ++counters_.invalid_headers;
    }
  }
  for (const auto& tx : body.transactions) apply_replica_tx_locked(from, body.device, tx, out);
}

// -------------------------------------------------------------- cameras

HelloResult Gateway::hello_result_locked(const PublicKey& camera) const {
  const ledger::Block* block = ledger_.find_block(camera);
  if (!block) return {HelloStatus::Timeout, std::nullopt};
  const PublicKey& mgr = block->header.managing_gateway;
  return {mgr == public_key() ? HelloStatus::Ready : HelloStatus::ManagedElsewhere, mgr};
}

HelloResult Gateway::handle_camera_hello(const PublicKey& camera, std::chrono::milliseconds wait) {
  const auto deadline = Clock::now() + wait;
  Outbox out;
  {
    std::lock_guard lock(mutex_);
    if (ledger_.find_block(camera)) return hello_result_locked(camera);
    if (std::find(wanted_.begin(), wanted_.end(), camera) == wanted_.end()) wanted_.push_back(camera);
    try_propose_locked(out);
  }
  flush(out);
  std::unique_lock lock(mutex_);
  state_cv_.wait_until(lock, deadline, [&] { return stopping_ || ledger_.find_block(camera) != nullptr; });
  return hello_result_locked(camera);
}

std::mutex& Gateway::session_lock(const PublicKey& camera) {
  std::lock_guard lock(mutex_);
  auto& m = session_locks_[camera];
  if (!m) m = std::make_unique<std::mutex>();
  return *m;
}

cas::ContentAddress Gateway::store_with_retry(ByteView frame) {
  const auto deadline = Clock::now() + options_.store_retry_deadline;
  auto backoff = options_.store_retry_initial;
  while (true) {
    try {
      return options_.store->put(frame);
    } catch (const cas::StoreIoError& e) {
      if (!e.transient()) throw StoreUnavailable(std::string("store failed permanently: ") + e.what());
      if (Clock::now() + backoff > deadline || stopping_)
        throw StoreUnavailable(std::string("store unreachable: ") + e.what());
      {
        std::lock_guard lock(mutex_);
        ++counters_.store_retries;
      }
      spdlog::debug("gateway {}: store put failed ({}), retrying in {} ms", short_hex(public_key()), e.what(),
                    backoff.count());
      std::this_thread::sleep_for(backoff);
      backoff = std::min(backoff * 2, options_.store_retry_max);
    }
  }
}

ProcessedChunk Gateway::process_chunk(const PublicKey& camera, ByteView frame) {
  const auto t0 = Clock::now();
  {
    std::lock_guard lock(mutex_);
    const ledger::Block* block = ledger_.find_block(camera);
    if (!block) throw NotManagedError("camera " + camera.hex() + " has no block");
    if (block->header.managing_gateway != public_key())
      throw NotManagedError("camera " + camera.hex() + " is managed by " + block->header.managing_gateway.hex());
  }

  // Step 1: metadata and HashVM.
  const chunk::VideoChunk parsed = chunk::parse_chunk(frame);
  const Digest hash_vm = chunk::hash_metadata(chunk::extract_metadata(parsed));
  const auto t1 = Clock::now();

  // Step 2: the full container frame goes to the store.
  const cas::ContentAddress address = store_with_retry(frame);
  const auto t2 = Clock::now();

  // Step 3: signed transaction. The session lock keeps prepare and commit
  // of one camera's transactions paired.
  std::lock_guard session(session_lock(camera));
  ledger::Transaction tx;
  {
    std::lock_guard lock(mutex_);
    const ledger::Block* block = ledger_.find_block(camera);
    std::uint64_t ts = wall_ms();
    if (!block->transactions.empty()) ts = std::max(ts, block->transactions.back().payload.timestamp_ms);
    tx = ledger_.prepare_transaction(camera, {address, hash_vm, ts}, identity_);
  }
  const auto t3 = Clock::now();

  // Step 4: append locally, then notify peers.
  Outbox out;
  {
    std::lock_guard lock(mutex_);
    ledger_.commit_transaction(camera, tx);
    if (log_) log_->append_transaction(camera, tx);
    state_cv_.notify_all();
  }
  out.push_back({std::nullopt, TxUpdate{camera, tx}});
  flush(out);
  const auto t4 = Clock::now();

  ProcessedChunk result{std::move(tx), {}};
  result.timings.extract_ms = ms_between(t0, t1);
  result.timings.store_ms = ms_between(t1, t2);
  result.timings.sign_ms = ms_between(t2, t3);
  result.timings.append_ms = ms_between(t3, t4);
  result.timings.total_ms = ms_between(t0, t4);
  if (options_.metrics) options_.metrics->record({camera, result.tx.sequence_number, result.timings});
  return result;
}

// ----------------------------------------------------------- inspection

ledger::Ledger Gateway::ledger_snapshot() const {
  std::lock_guard lock(mutex_);
  return ledger_;
}

Bytes Gateway::serialized_ledger() const {
  std::lock_guard lock(mutex_);
  return ledger::serialize_ledger(ledger_);
}

std::size_t Gateway::transaction_count(const PublicKey& camera) const {
  std::lock_guard lock(mutex_);
  const ledger::Block* block = ledger_.find_block(camera);
  return block ? block->transactions.size() : 0;
}

GatewayCounters Gateway::counters() const {
  std::lock_guard lock(mutex_);
  return counters_;
}

bool Gateway::quiescent() const {
  {
    std::lock_guard lock(inbox_mutex_);
    if (!inbox_.empty() || worker_busy_) return false;
  }
  std::lock_guard lock(mutex_);
  return instances_.empty() && tx_buffer_.empty() && pending_headers_.empty() && wanted_.empty();
}

}  // namespace vidledger::gateway
