// SPDX-License-Identifier: Apache-2.0
#pragma once

// Byte containers, hex rendering and the canonical field encoding used for
// every hashed or signed structure.
//
// Canonical encoding: fields are written in declaration order, each one as a
// 4-byte big-endian length prefix followed by the field bytes. Integer fields
// are fixed width big-endian (u64 -> 8 bytes, u8 -> 1 byte) and carry the same
// prefix, so a u64 field is always 00 00 00 08 followed by 8 bytes.

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vidledger {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// 32-byte SHA-256 digest.
using Digest = std::array<std::uint8_t, 32>;

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::string to_hex(ByteView data);
std::optional<Bytes> from_hex(std::string_view hex);

template <std::size_t N>
std::optional<std::array<std::uint8_t, N>> array_from_hex(std::string_view hex) {
  auto raw = from_hex(hex);
  if (!raw || raw->size() != N) return std::nullopt;
  std::array<std::uint8_t, N> out{};
  std::copy(raw->begin(), raw->end(), out.begin());
  return out;
}

bool is_zero(ByteView data);

void put_u32be(Bytes& out, std::uint32_t v);
void put_u64be(Bytes& out, std::uint64_t v);
std::uint32_t get_u32be(const std::uint8_t* p);
std::uint64_t get_u64be(const std::uint8_t* p);

/// Ed25519 public key. Doubles as the device / gateway identifier.
struct PublicKey {
  std::array<std::uint8_t, 32> bytes{};

  std::string hex() const { return to_hex(bytes); }
  static std::optional<PublicKey> from_hex(std::string_view hex);

  auto operator<=>(const PublicKey&) const = default;
  bool operator==(const PublicKey&) const = default;
};

struct Signature {
  std::array<std::uint8_t, 64> bytes{};

  auto operator<=>(const Signature&) const = default;
  bool operator==(const Signature&) const = default;
};

/// Thrown when canonical bytes cannot be decoded. `offset` is relative to
/// the start of the buffer handed to the reader.
class DecodeError : public std::runtime_error {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

struct DigestHash {
  std::size_t operator()(const Digest& d) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t); ++i) h = (h << 8) | d[i];
    return h;
  }
};

class CanonicalWriter {
 public:
  CanonicalWriter& field(ByteView data);
  CanonicalWriter& field(std::string_view text) { return field(as_bytes(text)); }
  CanonicalWriter& u64(std::uint64_t v);
  CanonicalWriter& u8(std::uint8_t v);
  template <std::size_t N>
  CanonicalWriter& field(const std::array<std::uint8_t, N>& a) {
    return field(ByteView{a.data(), a.size()});
  }

  const Bytes& bytes() const& { return out_; }
  Bytes take() && { return std::move(out_); }

 private:
  Bytes out_;
};

class CanonicalReader {
 public:
  explicit CanonicalReader(ByteView data) : data_(data) {}

  ByteView field();
  std::uint64_t u64();
  std::uint8_t u8();

  template <std::size_t N>
  std::array<std::uint8_t, N> fixed() {
    const std::size_t at = pos_;
    ByteView f = field();
    if (f.size() != N) throw DecodeError("field length " + std::to_string(f.size()) + " != " + std::to_string(N), at);
    std::array<std::uint8_t, N> out{};
    std::copy(f.begin(), f.end(), out.begin());
    return out;
  }

  bool done() const { return pos_ == data_.size(); }
  std::size_t offset() const { return pos_; }
  void expect_done() const;

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace vidledger

template <>
struct std::hash<vidledger::PublicKey> {
  std::size_t operator()(const vidledger::PublicKey& k) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t); ++i) h = (h << 8) | k.bytes[i];
    return h;
  }
};
