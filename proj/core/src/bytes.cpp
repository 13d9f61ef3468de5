// SPDX-License-Identifier: Apache-2.0
#include "vidledger/bytes.hpp"

#include <algorithm>

namespace vidledger {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

std::string to_hex(ByteView data) {
  std::string out;
  out.resize(data.size() * 2);
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[2 * i] = kHexDigits[data[i] >> 4];
    out[2 * i + 1] = kHexDigits[data[i] & 0x0f];
  }
  return out;
}

std::optional<Bytes> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) return std::nullopt;
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

bool is_zero(ByteView data) {
  return std::all_of(data.begin(), data.end(), [](std::uint8_t b) { return b == 0; });
}

void put_u32be(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_u64be(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32be(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

std::uint64_t get_u64be(const std::uint8_t* p) {
  return (std::uint64_t{get_u32be(p)} << 32) | get_u32be(p + 4);
}

std::optional<PublicKey> PublicKey::from_hex(std::string_view hex) {
  auto raw = array_from_hex<32>(hex);
  if (!raw) return std::nullopt;
  return PublicKey{*raw};
}

CanonicalWriter& CanonicalWriter::field(ByteView data) {
  put_u32be(out_, static_cast<std::uint32_t>(data.size()));
  out_.insert(out_.end(), data.begin(), data.end());
  return *this;
}

CanonicalWriter& CanonicalWriter::u64(std::uint64_t v) {
  put_u32be(out_, 8);
  put_u64be(out_, v);
  return *this;
}

CanonicalWriter& CanonicalWriter::u8(std::uint8_t v) {
  put_u32be(out_, 1);
  out_.push_back(v);
  return *this;
}

ByteView CanonicalReader::field() {
  if (data_.size() - pos_ < 4) throw DecodeError("truncated length prefix", pos_);
  const std::uint32_t len = get_u32be(data_.data() + pos_);
  if (data_.size() - pos_ - 4 < len) throw DecodeError("field overruns buffer", pos_);
  ByteView out = data_.subspan(pos_ + 4, len);
  pos_ += 4 + len;
  return out;
}

std::uint64_t CanonicalReader::u64() {
  const std::size_t at = pos_;
  ByteView f = field();
  if (f.size() != 8) throw DecodeError("u64 field has length " + std::to_string(f.size()), at);
  return get_u64be(f.data());
}

std::uint8_t CanonicalReader::u8() {
  const std::size_t at = pos_;
  ByteView f = field();
  if (f.size() != 1) throw DecodeError("u8 field has length " + std::to_string(f.size()), at);
  return f[0];
}

void CanonicalReader::expect_done() const {
  if (!done()) throw DecodeError("trailing bytes", pos_);
}

}  // namespace vidledger
