// SPDX-License-Identifier: Apache-2.0
// gatewayd: one gateway node. Cameras and peers share the listening port.

#include <CLI11.hpp>

#include "tool_common.hpp"
#include "vidledger/cas_service.hpp"
#include "vidledger/gateway.hpp"
#include "vidledger/gateway_config.hpp"
#include "vidledger/metrics.hpp"
#include "vidledger/tcp_node.hpp"

using namespace vidledger;

int main(int argc, char** argv) {
  const sigset_t signals = tools::block_shutdown_signals();

  CLI::App app{"Video ledger gateway"};
  std::string config_path;
  std::string listen;
  std::string log_level = "info";
  app.add_option("--config", config_path, "Gateway config file")->required();
  app.add_option("--listen", listen, "host:port, overrides the config");
  app.add_option("--log-level", log_level);
  CLI11_PARSE(app, argc, argv);
  tools::set_log_level(log_level);

  try {
    auto config = gateway::load_gateway_config(config_path);
    if (!listen.empty()) config.listen = net::Endpoint::parse(listen);
    if (!config.listen) throw gateway::ConfigError("no listen address (config or --listen)", 0);
    const auto identity = DeviceIdentity::load(config.identity);
    config.validate(identity.public_key());

    gateway::GatewayOptions options;
    options.membership = config.membership();
    options.store = std::make_shared<cas::RemoteStore>(config.store);
    options.chunking.interval_ms = config.interval_ms;
    options.consensus_timeout = std::chrono::milliseconds(config.consensus_timeout_ms);
    options.announce_interval = std::chrono::milliseconds(config.announce_interval_ms);
    options.ledger_file = config.ledger_file;
    std::shared_ptr<metrics::CsvMetrics> csv;
    if (!config.metrics_csv.empty()) {
      csv = std::make_shared<metrics::CsvMetrics>(config.metrics_csv);
      options.metrics = csv;
    }

    auto transport = std::make_shared<gateway::TcpPeerTransport>(config.peers, identity.public_key());
    gateway::Gateway node(identity, std::move(options), transport);
    gateway::GatewayServer server(node, *config.listen);
    node.start();
    tools::announce_endpoint("gatewayd " + identity.device_id(), server.endpoint().str());
    spdlog::info("{} peers, f={}, store {}", config.peers.size(), config.consensus_f, config.store.str());

    const int sig = tools::wait_for_shutdown(signals);
    spdlog::info("signal {}, shutting down", sig);
    server.stop();
    node.stop();
    transport->stop();
    if (csv) csv->flush();
    const auto c = node.counters();
    spdlog::info("blocks {} replica txs {} invalid txs {} sync requests {}", c.blocks_inserted,
                 c.replica_transactions, c.invalid_transactions, c.sync_requests_sent);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
