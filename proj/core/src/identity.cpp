// SPDX-License-Identifier: Apache-2.0
#include "vidledger/identity.hpp"

#include <sodium.h>

#include <fstream>
#include <iterator>

namespace vidledger {

namespace {
void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw IdentityError("libsodium initialisation failed");
}
}  // namespace

DeviceIdentity::~DeviceIdentity() {
  if (secret_) sodium_memzero(&*secret_, sizeof(Secret));
}

DeviceIdentity DeviceIdentity::generate() {
  ensure_sodium();
  std::array<std::uint8_t, kSeedBytes> seed{};
  randombytes_buf(seed.data(), seed.size());
  DeviceIdentity id = from_seed(seed);
  sodium_memzero(seed.data(), seed.size());
  return id;
}

DeviceIdentity DeviceIdentity::from_seed(ByteView seed) {
  ensure_sodium();
  if (seed.size() != kSeedBytes)
    throw IdentityError("seed must be 32 bytes, got " + std::to_string(seed.size()));
  DeviceIdentity id;
  Secret secret;
  std::copy(seed.begin(), seed.end(), secret.seed.begin());
  if (crypto_sign_ed25519_seed_keypair(id.public_key_.bytes.data(), secret.expanded.data(),
                                       secret.seed.data()) != 0)
    throw IdentityError("ed25519 keypair derivation failed");
  id.secret_ = secret;
  sodium_memzero(&secret, sizeof(secret));
  return id;
}

DeviceIdentity DeviceIdentity::remote(const PublicKey& key) {
  DeviceIdentity id;
  id.public_key_ = key;
  return id;
}

DeviceIdentity DeviceIdentity::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdentityError("cannot open key file " + path.string());
  Bytes seed((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  DeviceIdentity id = from_seed(seed);
  sodium_memzero(seed.data(), seed.size());
  return id;
}

void DeviceIdentity::save(const std::filesystem::path& path) const {
  if (!secret_) throw IdentityError("remote identity has no seed to save");
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IdentityError("cannot write key file " + path.string());
    out.write(reinterpret_cast<const char*>(secret_->seed.data()), secret_->seed.size());
    if (!out) throw IdentityError("short write to key file " + path.string());
  }
  std::error_code ec;
  std::filesystem::permissions(path, std::filesystem::perms::owner_read | std::filesystem::perms::owner_write,
                               std::filesystem::perm_options::replace, ec);
}

Signature DeviceIdentity::sign(ByteView message) const {
  if (!secret_) throw IdentityError("identity " + device_id() + " has no secret key");
  Signature sig;
  crypto_sign_ed25519_detached(sig.bytes.data(), nullptr, message.data(), message.size(),
                               secret_->expanded.data());
  return sig;
}

DeviceIdentity generate_identity(std::optional<ByteView> seed) {
  return seed ? DeviceIdentity::from_seed(*seed) : DeviceIdentity::generate();
}

bool verify(ByteView public_key, ByteView message, ByteView signature) {
  if (public_key.size() != crypto_sign_ed25519_PUBLICKEYBYTES || signature.size() != crypto_sign_ed25519_BYTES)
    return false;
  ensure_sodium();
  return crypto_sign_ed25519_verify_detached(signature.data(), message.data(), message.size(),
                                             public_key.data()) == 0;
}

bool verify(const PublicKey& key, ByteView message, const Signature& signature) {
  return verify(ByteView{key.bytes}, message, ByteView{signature.bytes});
}

}  // namespace vidledger
