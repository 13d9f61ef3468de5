// SPDX-License-Identifier: Apache-2.0
// camsim: a synthetic camera streaming SVC1 chunks to a gateway.

#include <CLI11.hpp>
#include <iostream>
#include <thread>

#include "vidledger/camera_protocol.hpp"
#include "vidledger/chunk.hpp"
#include "vidledger/identity.hpp"

using namespace vidledger;

int main(int argc, char** argv) {
  CLI::App app{"Synthetic camera client"};
  std::string gateway, identity;
  std::uint64_t seed = 1;
  std::uint32_t chunks = 180;
  std::size_t payload_bytes = 512 * 1024;
  std::uint64_t interval_ms = 10'000;
  bool realtime = false;
  app.add_option("--gateway", gateway, "Gateway host:port")->required();
  app.add_option("--identity", identity, "Camera seed file (keygen); the public key is all that is sent")
      ->required();
  app.add_option("--seed", seed, "Payload RNG seed");
  app.add_option("--chunks", chunks);
  app.add_option("--payload-bytes", payload_bytes);
  app.add_option("--interval-ms", interval_ms, "Chunk duration, also the send period with --realtime");
  app.add_flag("--realtime", realtime, "Send one chunk per interval instead of back-to-back");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto camera_key = DeviceIdentity::load(identity).public_key();
    chunk::ChunkingConfig chunking;
    chunking.interval_ms = interval_ms;
    chunk::SyntheticCamera source(seed, payload_bytes, chunking);
    camera::CameraClient client(net::Endpoint::parse(gateway), camera_key);
    client.hello();
    const auto start = std::chrono::steady_clock::now();
    for (std::uint32_t k = 0; k < chunks; ++k) {
      if (realtime) std::this_thread::sleep_until(start + std::chrono::milliseconds(interval_ms * k));
      const auto receipt = client.send_chunk(source.next_frame());
      std::cout << receipt.sequence << ' ' << to_hex(receipt.transaction_hash) << '\n';
    }
    client.close();
  } catch (const std::exception& e) {
    std::cerr << "camsim: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
