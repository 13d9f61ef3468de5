// SPDX-License-Identifier: Apache-2.0
// keygen: writes an Ed25519 seed file and prints the public key.

#include <CLI11.hpp>
#include <iostream>

#include "vidledger/identity.hpp"

using namespace vidledger;

int main(int argc, char** argv) {
  CLI::App app{"Create or inspect a device identity"};
  std::string out, seed_hex, show;
  auto* out_opt = app.add_option("--out", out, "Seed file to create");
  app.add_option("--seed-hex", seed_hex, "Deterministic 32-byte seed (64 hex); random when omitted")
      ->needs(out_opt);
  app.add_option("--show", show, "Print the public key of an existing seed file")->excludes(out_opt);
  CLI11_PARSE(app, argc, argv);

  try {
    if (!show.empty()) {
      std::cout << DeviceIdentity::load(show).device_id() << '\n';
      return 0;
    }
    if (out.empty()) throw std::invalid_argument("one of --out or --show is required");
    std::optional<Bytes> seed;
    if (!seed_hex.empty()) {
      seed = from_hex(seed_hex);
      if (!seed || seed->size() != 32) throw std::invalid_argument("--seed-hex must be 64 hex characters");
    }
    const auto id = seed ? DeviceIdentity::from_seed(*seed) : DeviceIdentity::generate();
    id.save(out);
    std::cout << id.device_id() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "keygen: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
