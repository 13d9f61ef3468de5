// SPDX-License-Identifier: Apache-2.0
#pragma once

// Bits shared by the daemons and CLIs.

#include <csignal>
#include <cstdio>
#include <string>

#include <spdlog/spdlog.h>

namespace vidledger::tools {

/// Blocks SIGINT and SIGTERM for this thread and every thread started
/// afterwards. Call first thing in main().
inline sigset_t block_shutdown_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

inline int wait_for_shutdown(const sigset_t& set) {
  int sig = 0;
  sigwait(&set, &sig);
  return sig;
}

/// "trace".."off"; unknown names fall back to info.
inline void set_log_level(const std::string& name) {
  auto level = spdlog::level::from_str(name);
  if (level == spdlog::level::off && name != "off") level = spdlog::level::info;
  spdlog::set_level(level);
}

/// Scripts read the bound port from this line, so flush it right away.
inline void announce_endpoint(const std::string& what, const std::string& endpoint) {
  std::printf("%s listening on %s\n", what.c_str(), endpoint.c_str());
  std::fflush(stdout);
}

}  // namespace vidledger::tools
