// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>

#include "vidledger/bytes.hpp"

namespace vidledger {

/// SHA-256 of `data`. Every hash in the system (content addresses, chunk
/// hashes, metadata hashes, header and transaction hashes) goes through here.
Digest sha256(ByteView data);

/// Incremental SHA-256 for multi-part input.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(ByteView data);
  Digest finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace vidledger
