// SPDX-License-Identifier: Apache-2.0
// casd: content-addressed chunk store served over TCP.

#include <CLI11.hpp>

#include "tool_common.hpp"
#include "vidledger/cas_service.hpp"
#include "vidledger/cas_store.hpp"

using namespace vidledger;

int main(int argc, char** argv) {
  const sigset_t signals = tools::block_shutdown_signals();

  CLI::App app{"Content-addressed chunk store"};
  std::string root;
  std::string listen = "127.0.0.1:6000";
  std::string log_level = "info";
  app.add_option("--root", root, "Object directory")->required();
  app.add_option("--listen", listen, "host:port (port 0 picks a free one)");
  app.add_option("--log-level", log_level);
  CLI11_PARSE(app, argc, argv);
  tools::set_log_level(log_level);

  try {
    auto store = std::make_shared<cas::FileStore>(root);
    cas::StoreServer server(store, net::Endpoint::parse(listen));
    tools::announce_endpoint("casd", server.endpoint().str());
    spdlog::info("serving {} ({} objects)", store->root().string(), store->object_count());
    const int sig = tools::wait_for_shutdown(signals);
    spdlog::info("signal {}, shutting down", sig);
    server.stop();
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
