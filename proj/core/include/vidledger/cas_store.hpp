// SPDX-License-Identifier: Apache-2.0
#pragma once

// Content-addressed chunk storage.
//
// INVARIANTS (every backend):
//   1. address(c) = SHA-256(c), rendered as 64 lowercase hex characters.
//   2. put() is idempotent: identical content maps to one stored object.
//   3. get() self-verifies; bytes that no longer hash to their address are
//      never returned, an IntegrityError is raised instead.
//   4. Nothing is ever deleted by the store itself.

#include <atomic>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "vidledger/bytes.hpp"

namespace vidledger::cas {

struct ContentAddress {
  Digest digest{};

  static ContentAddress of(ByteView content);
  static std::optional<ContentAddress> parse(std::string_view hex);
  std::string hex() const { return to_hex(digest); }

  auto operator<=>(const ContentAddress&) const = default;
  bool operator==(const ContentAddress&) const = default;
};

/// True iff SHA-256(content) equals the address.
bool verify_address(const ContentAddress& address, ByteView content);

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// I/O failure. Transient failures (store unreachable, interrupted) are worth
/// retrying; permanent ones (permissions, read-only media) are not.
class StoreIoError : public StoreError {
 public:
  StoreIoError(const std::string& what, bool transient) : StoreError(what), transient_(transient) {}
  bool transient() const noexcept { return transient_; }

 private:
  bool transient_;
};

/// Stored bytes no longer match their address: evidence of storage tampering.
class IntegrityError : public StoreError {
 public:
  explicit IntegrityError(const ContentAddress& address)
      : StoreError("stored object " + address.hex() + " does not match its address"), address_(address) {}
  const ContentAddress& address() const noexcept { return address_; }

 private:
  ContentAddress address_;
};

class ChunkStore {
 public:
  virtual ~ChunkStore() = default;
  /// Throws std::invalid_argument on empty content, StoreIoError on I/O.
  virtual ContentAddress put(ByteView content) = 0;
  /// nullopt when absent; throws IntegrityError / StoreIoError.
  virtual std::optional<Bytes> get(const ContentAddress& address) = 0;
};

/// Local backend. Objects live at <root>/<first two hex chars>/<full hex>;
/// writes go to a temp file in the same directory and are renamed into place.
class FileStore final : public ChunkStore {
 public:
  struct Options {
    bool fsync = false;
  };

  explicit FileStore(std::filesystem::path root) : FileStore(std::move(root), Options{}) {}
  FileStore(std::filesystem::path root, Options options);

  ContentAddress put(ByteView content) override;
  std::optional<Bytes> get(const ContentAddress& address) override;

  std::filesystem::path object_path(const ContentAddress& address) const;
  const std::filesystem::path& root() const { return root_; }
  /// Number of stored objects (walks the tree).
  std::size_t object_count() const;

 private:
  std::filesystem::path root_;
  Options options_;
  std::atomic<std::uint64_t> temp_counter_{0};
};

}  // namespace vidledger::cas
