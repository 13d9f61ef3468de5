// SPDX-License-Identifier: Apache-2.0
#include "vidledger/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace vidledger::net {

namespace {
std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

sockaddr_in resolve(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string host = ep.host.empty() ? "0.0.0.0" : ep.host;
  const int rc = ::getaddrinfo(host.c_str(), nullptr, &hints, &res);
  if (rc != 0 || res == nullptr) throw NetError("cannot resolve " + host + ": " + gai_strerror(rc));
  sockaddr_in addr{};
  std::memcpy(&addr, res->ai_addr, sizeof(addr));
  ::freeaddrinfo(res);
  addr.sin_port = htons(ep.port);
  return addr;
}
}  // namespace

Endpoint Endpoint::parse(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("endpoint needs host:port: " + std::string(text));
  Endpoint ep;
  ep.host = std::string(text.substr(0, colon));
  const std::string_view port = text.substr(colon + 1);
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc{} || ptr != port.data() + port.size() || value > 65535)
    throw std::invalid_argument("bad port in endpoint: " + std::string(text));
  ep.port = static_cast<std::uint16_t>(value);
  return ep;
}

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

Socket Socket::connect(const Endpoint& ep, std::chrono::milliseconds timeout) {
  const sockaddr_in addr = resolve(ep);
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!s.valid()) throw NetError(errno_text("socket"));

  const int flags = ::fcntl(s.fd_, F_GETFL, 0);
  ::fcntl(s.fd_, F_SETFL, flags | O_NONBLOCK);
  int rc = ::connect(s.fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr));
  if (rc != 0 && errno != EINPROGRESS) throw NetError(errno_text(("connect " + ep.str()).c_str()));
  if (rc != 0) {
    pollfd pfd{s.fd_, POLLOUT, 0};
    rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
    if (rc == 0) throw NetError("connect " + ep.str() + ": timed out");
    int err = 0;
    socklen_t len = sizeof(err);
    ::getsockopt(s.fd_, SOL_SOCKET, SO_ERROR, &err, &len);
    if (rc < 0 || err != 0) {
      errno = err;
      throw NetError(errno_text(("connect " + ep.str()).c_str()));
    }
  }
  ::fcntl(s.fd_, F_SETFL, flags);
  const int one = 1;
  ::setsockopt(s.fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return s;
}

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Socket::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::write_all(ByteView data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw NetError(errno_text("send"));
    }
    sent += static_cast<std::size_t>(n);
  }
}

bool Socket::read_exact(std::uint8_t* out, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd_, out + got, n - got, 0);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw NetError(errno_text("recv"));
    }
    if (r == 0) {
      if (got == 0) return false;
      throw NetError("connection closed mid-frame");
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

void write_frame(Socket& s, std::uint8_t opcode, ByteView body) {
  if (body.size() + 1 > kMaxFrameBytes) throw NetError("frame too large");
  Bytes head;
  head.reserve(5);
  put_u32be(head, static_cast<std::uint32_t>(body.size() + 1));
  head.push_back(opcode);
  if (body.size() <= 4096) {
    head.insert(head.end(), body.begin(), body.end());
    s.write_all(head);
    return;
  }
  s.write_all(head);
  s.write_all(body);
}

std::optional<Frame> read_frame(Socket& s, std::uint32_t max_bytes) {
  std::uint8_t head[4];
  if (!s.read_exact(head, 4)) return std::nullopt;
  const std::uint32_t len = get_u32be(head);
  if (len == 0) throw NetError("empty frame");
  if (len > max_bytes) throw NetError("frame of " + std::to_string(len) + " bytes exceeds limit");
  Frame f;
  if (!s.read_exact(&f.opcode, 1)) throw NetError("connection closed mid-frame");
  f.body.resize(len - 1);
  if (len > 1 && !s.read_exact(f.body.data(), f.body.size())) throw NetError("connection closed mid-frame");
  return f;
}

Listener::Listener(const Endpoint& ep) {
  const sockaddr_in addr = resolve(ep);
  sock_ = Socket(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!sock_.valid()) throw NetError(errno_text("socket"));
  const int one = 1;
  ::setsockopt(sock_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(sock_.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0)
    throw NetError(errno_text(("bind " + ep.str()).c_str()));
  if (::listen(sock_.fd(), 128) != 0) throw NetError(errno_text("listen"));
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(sock_.fd(), reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

Socket Listener::accept() {
  for (;;) {
    const int fd = ::accept4(sock_.fd(), nullptr, nullptr, SOCK_CLOEXEC);
    if (fd >= 0) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return Socket(fd);
    }
    if (errno == EINTR || errno == ECONNABORTED) continue;
    return Socket();
  }
}

void Listener::interrupt() { sock_.shutdown(); }

void Listener::close() {
  sock_.shutdown();
  sock_.close();
}

FrameServer::FrameServer(const Endpoint& listen, Handler handler)
    : host_(listen.host), listener_(listen), handler_(std::move(handler)) {
  accept_thread_ = std::thread([this] { accept_loop(); });
}

FrameServer::~FrameServer() { stop(); }

void FrameServer::accept_loop() {
  while (!stopping_) {
    Socket s = listener_.accept();
    if (!s.valid()) break;
    std::lock_guard lock(mutex_);
    if (stopping_) break;
    reap_finished();
    auto conn = std::make_unique<Connection>();
    conn->socket = std::move(s);
    Connection* raw = conn.get();
    connections_.push_back(std::move(conn));
    raw->thread = std::thread([this, raw] {
      try {
        handler_(raw->socket);
      } catch (const std::exception&) {
        // connection-level failure; the peer reconnects if it cares
      }
      raw->socket.shutdown();
      raw->finished = true;
    });
  }
}

void FrameServer::reap_finished() {
  for (auto it = connections_.begin(); it != connections_.end();) {
    if ((*it)->finished) {
      (*it)->thread.join();
      it = connections_.erase(it);
    } else {
      ++it;
    }
  }
}

void FrameServer::stop() {
  if (stopping_.exchange(true)) return;
  // Wake accept(): shutdown on a listening socket is not enough everywhere,
  // so poke it with a throwaway connection too.
  try {
    Socket poke = Socket::connect({host_.empty() || host_ == "0.0.0.0" ? "127.0.0.1" : host_, port()},
                                  std::chrono::milliseconds(200));
  } catch (const std::exception&) {
  }
  listener_.interrupt();
  if (accept_thread_.joinable()) accept_thread_.join();
  listener_.close();
  std::list<std::unique_ptr<Connection>> conns;
  {
    std::lock_guard lock(mutex_);
    conns.swap(connections_);
  }
  for (auto& c : conns) c->socket.shutdown();
  for (auto& c : conns)
    if (c->thread.joinable()) c->thread.join();
}

}  // namespace vidledger::net
