// SPDX-License-Identifier: Apache-2.0
#include "vidledger/sha256.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <stdexcept>

namespace vidledger {

Digest sha256(ByteView data) {
  Digest out{};
  ::SHA256(data.data(), data.size(), out.data());
  return out;
}

struct Sha256::Impl {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  ~Impl() { EVP_MD_CTX_free(ctx); }
};

Sha256::Sha256() : impl_(std::make_unique<Impl>()) {
  if (impl_->ctx == nullptr || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: EVP init failed");
}

Sha256::~Sha256() = default;

Sha256& Sha256::update(ByteView data) {
  if (EVP_DigestUpdate(impl_->ctx, data.data(), data.size()) != 1)
    throw std::runtime_error("sha256: EVP update failed");
  return *this;
}

Digest Sha256::finish() {
  Digest out{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(impl_->ctx, out.data(), &len) != 1 || len != out.size())
    throw std::runtime_error("sha256: EVP final failed");
  return out;
}

}  // namespace vidledger
