// SPDX-License-Identifier: Apache-2.0
#include "vidledger/ledger_io.hpp"

#include <json.hpp>

#include <cctype>
#include <iterator>
#include <map>

namespace vidledger::ledger {

namespace {

using json = nlohmann::json;

constexpr std::size_t kPayloadEncodingBytes = (4 + 32) + (4 + 32) + (4 + 8);
constexpr std::size_t kTxBodyBytes = (4 + 32) + kTransactionEncodingBytes;
static_assert(kPayloadEncodingBytes == 84);

void write_header_fields(CanonicalWriter& w, const BlockHeader& h) {
  w.field(h.device_public_key.bytes).field(h.previous_header_hash).u64(h.created_at_ms).field(h.managing_gateway.bytes);
}

BlockHeader read_certified_header(CanonicalReader& r) {
  BlockHeader h;
  h.device_public_key.bytes = r.fixed<32>();
  h.previous_header_hash = r.fixed<32>();
  h.created_at_ms = r.u64();
  h.managing_gateway.bytes = r.fixed<32>();
  const std::uint64_t count = r.u64();
  if (count > 4096) throw DecodeError("implausible certificate size " + std::to_string(count), r.offset());
  for (std::uint64_t i = 0; i < count; ++i) {
    CertificateEntry e;
    e.gateway.bytes = r.fixed<32>();
    e.signature.bytes = r.fixed<64>();
    h.consensus_certificate.push_back(e);
  }
  return h;
}

TransactionPayload read_payload(ByteView data) {
  CanonicalReader r(data);
  TransactionPayload p;
  p.storage_address.digest = r.fixed<32>();
  p.metadata_hash = r.fixed<32>();
  p.timestamp_ms = r.u64();
  r.expect_done();
  return p;
}

/// Reads a fixed-layout structure, noting length prefixes that disagree with
/// the layout instead of trusting them.
class FixedLayoutReader {
 public:
  explicit FixedLayoutReader(ByteView data) : data_(data) {}

  ByteView field(std::size_t expected) {
    const std::uint32_t declared = get_u32be(data_.data() + pos_);
    if (declared != expected) {
      defects_.push_back("length prefix at +" + std::to_string(pos_) + " is " + std::to_string(declared) +
                         ", layout requires " + std::to_string(expected));
    }
    ByteView out = data_.subspan(pos_ + 4, expected);
    pos_ += 4 + expected;
    return out;
  }

  template <std::size_t N>
  std::array<std::uint8_t, N> fixed() {
    ByteView f = field(N);
    std::array<std::uint8_t, N> out{};
    std::copy(f.begin(), f.end(), out.begin());
    return out;
  }

  void note(std::string defect) { defects_.push_back(std::move(defect)); }
  const std::vector<std::string>& defects() const { return defects_; }

 private:
  ByteView data_;
  std::size_t pos_ = 0;
  std::vector<std::string> defects_;
};

Transaction read_transaction_fixed(FixedLayoutReader& r) {
  Transaction tx;
  tx.previous_transaction_hash = r.fixed<32>();
  tx.sequence_number = get_u64be(r.field(8).data());
  const ByteView payload = r.field(kPayloadEncodingBytes);
  FixedLayoutReader pr(payload);
  tx.payload.storage_address.digest = pr.fixed<32>();
  tx.payload.metadata_hash = pr.fixed<32>();
  tx.payload.timestamp_ms = get_u64be(pr.field(8).data());
  tx.gateway_signature.bytes = r.fixed<64>();
  tx.transaction_hash = r.fixed<32>();
  for (const auto& d : pr.defects()) r.note("payload " + d);
  return tx;
}

}  // namespace

Bytes encode_transaction(const Transaction& tx) {
  CanonicalWriter w;
  w.field(tx.previous_transaction_hash)
      .u64(tx.sequence_number)
      .field(tx.payload.canonical_encoding())
      .field(tx.gateway_signature.bytes)
      .field(tx.transaction_hash);
  return std::move(w).take();
}

Transaction decode_transaction(ByteView data) {
  CanonicalReader r(data);
  Transaction tx;
  tx.previous_transaction_hash = r.fixed<32>();
  tx.sequence_number = r.u64();
  const std::size_t payload_at = r.offset();
  try {
    tx.payload = read_payload(r.field());
  } catch (const DecodeError& e) {
    throw DecodeError(std::string("payload: ") + e.what(), payload_at + 4 + e.offset());
  }
  tx.gateway_signature.bytes = r.fixed<64>();
  tx.transaction_hash = r.fixed<32>();
  r.expect_done();
  return tx;
}

Bytes encode_certified_header(const BlockHeader& header) {
  CanonicalWriter w;
  write_header_fields(w, header);
  w.u64(header.consensus_certificate.size());
  for (const auto& e : header.consensus_certificate) w.field(e.gateway.bytes).field(e.signature.bytes);
  return std::move(w).take();
}

BlockHeader decode_certified_header(ByteView data) {
  CanonicalReader r(data);
  BlockHeader h = read_certified_header(r);
  r.expect_done();
  return h;
}

Bytes encode_membership(const Membership& m) {
  CanonicalWriter w;
  w.u64(m.f).u64(m.peers.size());
  for (const auto& p : m.peers) w.field(p.bytes);
  return std::move(w).take();
}

Membership decode_membership(ByteView data) {
  CanonicalReader r(data);
  Membership m;
  const std::uint64_t f = r.u64();
  if (f > 1000) throw DecodeError("implausible f " + std::to_string(f), 0);
  m.f = static_cast<std::uint32_t>(f);
  const std::uint64_t n = r.u64();
  if (n > 4096) throw DecodeError("implausible peer count " + std::to_string(n), 0);
  for (std::uint64_t i = 0; i < n; ++i) m.peers.push_back(PublicKey{r.fixed<32>()});
  r.expect_done();
  return m;
}

Bytes encode_record(RecordType type, ByteView body) {
  Bytes out;
  out.reserve(5 + body.size());
  put_u32be(out, static_cast<std::uint32_t>(body.size() + 1));
  out.push_back(static_cast<std::uint8_t>(type));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

Bytes block_record(const BlockHeader& header) { return encode_record(RecordType::Block, encode_certified_header(header)); }

Bytes transaction_record(const PublicKey& device, const Transaction& tx) {
  CanonicalWriter w;
  w.field(device.bytes);
  Bytes body = std::move(w).take();
  const Bytes enc = encode_transaction(tx);
  body.insert(body.end(), enc.begin(), enc.end());
  return encode_record(RecordType::Tx, body);
}

Bytes serialize_ledger(const Ledger& ledger) {
  Bytes out(kLedgerMagic.begin(), kLedgerMagic.end());
  auto append = [&out](const Bytes& rec) { out.insert(out.end(), rec.begin(), rec.end()); };
  append(encode_record(RecordType::Config, encode_membership(ledger.membership())));
  for (const Block& b : ledger.blocks()) {
    append(block_record(b.header));
    for (const Transaction& tx : b.transactions) append(transaction_record(b.header.device_public_key, tx));
  }
  return out;
}

void save_ledger_file(const Ledger& ledger, const std::filesystem::path& path) {
  const Bytes data = serialize_ledger(ledger);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

LoadedLedger load_ledger(ByteView data) {
  if (data.size() < kLedgerMagic.size() || !std::equal(kLedgerMagic.begin(), kLedgerMagic.end(), data.begin()))
    throw LedgerFormatError("missing VLG1 magic", 0);

  std::optional<Membership> membership;
  std::vector<Block> blocks;
  std::map<PublicKey, std::size_t> index;
  std::vector<Violation> defects;
  std::vector<TransactionSpan> spans;

  std::size_t pos = kLedgerMagic.size();
  while (pos < data.size()) {
    const std::size_t record_at = pos;
    if (data.size() - pos < 5) throw LedgerFormatError("truncated record header", record_at);
    const std::uint32_t len = get_u32be(data.data() + pos);
    if (len == 0 || len > data.size() - pos - 4)
      throw LedgerFormatError("record length " + std::to_string(len) + " overruns file", record_at);
    const auto type = data[pos + 4];
    const std::size_t body_at = pos + 5;
    const ByteView body = data.subspan(body_at, len - 1);
    pos += 4 + len;

    try {
      switch (static_cast<RecordType>(type)) {
        case RecordType::Config:
          if (membership) throw LedgerFormatError("second CONFIG record", record_at);
          membership = decode_membership(body);
          break;

        case RecordType::Block: {
          if (!membership) throw LedgerFormatError("BLOCK before CONFIG", record_at);
          BlockHeader header = decode_certified_header(body);
          const Digest hash = header.hash();
          auto it = index.find(header.device_public_key);
          if (it != index.end() && blocks[it->second].header_hash == hash) {
            blocks[it->second].header.consensus_certificate = std::move(header.consensus_certificate);
            break;
          }
          if (it != index.end()) {
            defects.push_back({ViolationKind::DuplicateDevice, blocks.size(), header.device_public_key, std::nullopt,
                               "second BLOCK record with a different header"});
          } else {
            index.emplace(header.device_public_key, blocks.size());
          }
          Block b;
          b.header = std::move(header);
          b.header_hash = hash;
          blocks.push_back(std::move(b));
          break;
        }

        case RecordType::Tx: {
          if (!membership) throw LedgerFormatError("TX before CONFIG", record_at);
          if (body.size() != kTxBodyBytes)
            throw LedgerFormatError("TX record body is " + std::to_string(body.size()) + " bytes, expected " +
                                        std::to_string(kTxBodyBytes),
                                    record_at);
          FixedLayoutReader r(body);
          const PublicKey device{r.fixed<32>()};
          Transaction tx = read_transaction_fixed(r);
          auto it = index.find(device);
          if (it == index.end()) {
            defects.push_back({ViolationKind::OrphanTransaction, blocks.size(), device, tx.sequence_number,
                               "transaction for a device without a block"});
            break;
          }
          Block& block = blocks[it->second];
          const std::uint64_t position = block.transactions.size();
          if (!r.defects().empty()) {
            std::string detail;
            for (const auto& d : r.defects()) detail += (detail.empty() ? "" : "; ") + d;
            defects.push_back({ViolationKind::MalformedEncoding, it->second, device, position, detail});
          }
          spans.push_back({device, position, body_at + (4 + 32), kTransactionEncodingBytes});
          block.transactions.push_back(std::move(tx));
          break;
        }

        default:
          throw LedgerFormatError("unknown record type " + std::to_string(type), record_at);
      }
    } catch (const DecodeError& e) {
      throw LedgerFormatError(std::string("bad record: ") + e.what(), body_at + e.offset());
    }
  }
  if (!membership) throw LedgerFormatError("no CONFIG record", kLedgerMagic.size());

  return LoadedLedger{Ledger::from_untrusted(std::move(*membership), std::move(blocks)), std::move(defects),
                      std::move(spans)};
}

LoadedLedger load_ledger_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LedgerFormatError("cannot open " + path.string(), 0);
  const Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t first = 0;
  while (first < data.size() && std::isspace(data[first])) ++first;
  if (first < data.size() && data[first] == '{') {
    return LoadedLedger{import_json(std::string_view(reinterpret_cast<const char*>(data.data()), data.size())), {},
                        {}};
  }
  return load_ledger(data);
}

std::string export_json(const Ledger& ledger) {
  json doc;
  doc["format"] = "vidledger-ledger/1";
  json peers = json::array();
  for (const auto& p : ledger.membership().peers) peers.push_back(p.hex());
  doc["membership"] = {{"f", ledger.membership().f}, {"peers", peers}};
  json blocks = json::array();
  for (const Block& b : ledger.blocks()) {
    json cert = json::array();
    for (const auto& e : b.header.consensus_certificate)
      cert.push_back({{"gateway", e.gateway.hex()}, {"signature", to_hex(e.signature.bytes)}});
    json txs = json::array();
    for (const Transaction& tx : b.transactions) {
      txs.push_back({{"sequence", tx.sequence_number},
                     {"previous_transaction_hash", to_hex(tx.previous_transaction_hash)},
                     {"storage_address", tx.payload.storage_address.hex()},
                     {"metadata_hash", to_hex(tx.payload.metadata_hash)},
                     {"timestamp_ms", tx.payload.timestamp_ms},
                     {"gateway_signature", to_hex(tx.gateway_signature.bytes)},
                     {"transaction_hash", to_hex(tx.transaction_hash)}});
    }
    blocks.push_back({{"device", b.header.device_public_key.hex()},
                      {"previous_header_hash", to_hex(b.header.previous_header_hash)},
                      {"created_at_ms", b.header.created_at_ms},
                      {"managing_gateway", b.header.managing_gateway.hex()},
                      {"header_hash", to_hex(b.header_hash)},
                      {"certificate", cert},
                      {"transactions", txs}});
  }
  doc["blocks"] = blocks;
  return doc.dump(2) + "\n";
}

namespace {
template <std::size_t N>
std::array<std::uint8_t, N> hex_field(const json& obj, const char* key) {
  auto v = array_from_hex<N>(obj.at(key).get<std::string>());
  if (!v) throw std::invalid_argument(std::string("field '") + key + "' is not " + std::to_string(N) + " hex bytes");
  return *v;
}
}  // namespace

Ledger import_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw LedgerFormatError(std::string("invalid JSON: ") + e.what(), e.byte);
  }
  try {
    Membership m;
    m.f = doc.at("membership").at("f").get<std::uint32_t>();
    for (const auto& p : doc.at("membership").at("peers")) {
      auto key = PublicKey::from_hex(p.get<std::string>());
      if (!key) throw std::invalid_argument("bad peer key");
      m.peers.push_back(*key);
    }
    std::vector<Block> blocks;
    for (const auto& jb : doc.at("blocks")) {
      Block b;
      b.header.device_public_key.bytes = hex_field<32>(jb, "device");
      b.header.previous_header_hash = hex_field<32>(jb, "previous_header_hash");
      b.header.created_at_ms = jb.at("created_at_ms").get<std::uint64_t>();
      b.header.managing_gateway.bytes = hex_field<32>(jb, "managing_gateway");
      b.header_hash = hex_field<32>(jb, "header_hash");
      for (const auto& je : jb.at("certificate"))
        b.header.consensus_certificate.push_back({PublicKey{hex_field<32>(je, "gateway")},
                                                  Signature{hex_field<64>(je, "signature")}});
      for (const auto& jt : jb.at("transactions")) {
        Transaction tx;
        tx.sequence_number = jt.at("sequence").get<std::uint64_t>();
        tx.previous_transaction_hash = hex_field<32>(jt, "previous_transaction_hash");
        tx.payload.storage_address.digest = hex_field<32>(jt, "storage_address");
        tx.payload.metadata_hash = hex_field<32>(jt, "metadata_hash");
        tx.payload.timestamp_ms = jt.at("timestamp_ms").get<std::uint64_t>();
        tx.gateway_signature.bytes = hex_field<64>(jt, "gateway_signature");
        tx.transaction_hash = hex_field<32>(jt, "transaction_hash");
        b.transactions.push_back(tx);
      }
      blocks.push_back(std::move(b));
    }
    return Ledger::from_untrusted(std::move(m), std::move(blocks));
  } catch (const json::exception& e) {
    throw LedgerFormatError(std::string("ledger JSON schema: ") + e.what(), 0);
  } catch (const std::invalid_argument& e) {
    throw LedgerFormatError(std::string("ledger JSON schema: ") + e.what(), 0);
  }
}

LedgerLog::LedgerLog(std::filesystem::path path, const Membership& membership) : path_(std::move(path)) {
  std::error_code ec;
  const bool existing = std::filesystem::exists(path_, ec) && std::filesystem::file_size(path_, ec) > 0;
  if (existing) {
    const LoadedLedger loaded = load_ledger_file(path_);
    if (!(loaded.ledger.membership() == membership))
      throw std::runtime_error("ledger log " + path_.string() + " was written for a different membership");
    out_.open(path_, std::ios::binary | std::ios::app);
  } else {
    out_.open(path_, std::ios::binary | std::ios::trunc);
    Bytes head(kLedgerMagic.begin(), kLedgerMagic.end());
    const Bytes config = encode_record(RecordType::Config, encode_membership(membership));
    head.insert(head.end(), config.begin(), config.end());
    write(head);
    flush();
  }
  if (!out_) throw std::runtime_error("cannot open ledger log " + path_.string());
}

void LedgerLog::write(const Bytes& record) {
  out_.write(reinterpret_cast<const char*>(record.data()), static_cast<std::streamsize>(record.size()));
}

void LedgerLog::append_block(const BlockHeader& certified_header) {
  std::lock_guard lock(mutex_);
  write(block_record(certified_header));
  out_.flush();
}

void LedgerLog::append_transaction(const PublicKey& device, const Transaction& tx) {
  std::lock_guard lock(mutex_);
  write(transaction_record(device, tx));
  out_.flush();
}

void LedgerLog::flush() { out_.flush(); }

}  // namespace vidledger::ledger
