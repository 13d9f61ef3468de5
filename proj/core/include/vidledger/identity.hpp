// SPDX-License-Identifier: Apache-2.0
#pragma once

// Ed25519 identities for cameras and gateways. A camera is identified by its
// public key only; gateways additionally hold the seed and sign transactions
// and consensus votes.

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "vidledger/bytes.hpp"

namespace vidledger {

inline constexpr std::size_t kSeedBytes = 32;

class IdentityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DeviceIdentity {
 public:
  /// Random identity from the OS CSPRNG.
  static DeviceIdentity generate();
  /// Deterministic identity; throws IdentityError unless `seed` is 32 bytes.
  static DeviceIdentity from_seed(ByteView seed);
  /// Verification-only identity for a peer we know by key.
  static DeviceIdentity remote(const PublicKey& key);

  /// Reads a 32-byte raw seed file.
  static DeviceIdentity load(const std::filesystem::path& path);
  /// Writes the raw seed with owner-only permissions.
  void save(const std::filesystem::path& path) const;

  DeviceIdentity(const DeviceIdentity&) = default;
  DeviceIdentity& operator=(const DeviceIdentity&) = default;
  DeviceIdentity(DeviceIdentity&&) noexcept = default;
  DeviceIdentity& operator=(DeviceIdentity&&) noexcept = default;
  ~DeviceIdentity();

  const PublicKey& public_key() const { return public_key_; }
  bool has_secret() const { return secret_.has_value(); }
  /// Lowercase hex of the public key, 64 characters.
  std::string device_id() const { return public_key_.hex(); }

  /// Throws IdentityError when this is a remote identity.
  Signature sign(ByteView message) const;

 private:
  DeviceIdentity() = default;

  struct Secret {
    std::array<std::uint8_t, kSeedBytes> seed{};
    std::array<std::uint8_t, 64> expanded{};
  };

  PublicKey public_key_;
  std::optional<Secret> secret_;
};

/// `seed` absent draws a fresh random identity.
DeviceIdentity generate_identity(std::optional<ByteView> seed = std::nullopt);

/// Total: malformed key or signature lengths yield false.
bool verify(ByteView public_key, ByteView message, ByteView signature);
bool verify(const PublicKey& key, ByteView message, const Signature& signature);

}  // namespace vidledger
