// SPDX-License-Identifier: Apache-2.0
#include "vidledger/cas_store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "vidledger/sha256.hpp"

namespace vidledger::cas {

namespace fs = std::filesystem;

namespace {
bool permanent_errno(int err) {
  switch (err) {
    case EACCES:
    case EPERM:
    case EROFS:
    case ENOTDIR:
    case EISDIR:
    case ENAMETOOLONG:
      return true;
    default:
      return false;
  }
}

[[noreturn]] void throw_io(const std::string& what, int err) {
  throw StoreIoError(what + ": " + std::strerror(err), !permanent_errno(err));
}

class Fd {
 public:
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const { return fd_; }
  int release() { return std::exchange(fd_, -1); }

 private:
  int fd_;
};
}  // namespace

ContentAddress ContentAddress::of(ByteView content) { return ContentAddress{sha256(content)}; }

std::optional<ContentAddress> ContentAddress::parse(std::string_view hex) {
  if (hex.size() != 64) return std::nullopt;
  for (char c : hex)
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return std::nullopt;
  auto raw = array_from_hex<32>(hex);
  if (!raw) return std::nullopt;
  return ContentAddress{*raw};
}

bool verify_address(const ContentAddress& address, ByteView content) {
  return sha256(content) == address.digest;
}

FileStore::FileStore(fs::path root, Options options) : root_(std::move(root)), options_(options) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw StoreIoError("cannot create store root " + root_.string() + ": " + ec.message(), false);
}

fs::path FileStore::object_path(const ContentAddress& address) const {
  const std::string hex = address.hex();
  return root_ / hex.substr(0, 2) / hex;
}

ContentAddress FileStore::put(ByteView content) {
  if (content.empty()) throw std::invalid_argument("cannot store empty content");
  const ContentAddress address = ContentAddress::of(content);
  const fs::path final_path = object_path(address);

  struct stat st{};
  if (::stat(final_path.c_str(), &st) == 0) return address;

  const fs::path dir = final_path.parent_path();
  if (::mkdir(dir.c_str(), 0755) != 0 && errno != EEXIST) throw_io("mkdir " + dir.string(), errno);

  const fs::path tmp =
      dir / (".tmp-" + address.hex().substr(0, 16) + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "-" +
             std::to_string(temp_counter_.fetch_add(1)));
  Fd fd(::open(tmp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644));
  if (fd.get() < 0) throw_io("open " + tmp.string(), errno);

  std::size_t written = 0;
  while (written < content.size()) {
    const ssize_t n = ::write(fd.get(), content.data() + written, content.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::unlink(tmp.c_str());
      throw_io("write " + tmp.string(), err);
    }
    written += static_cast<std::size_t>(n);
  }
  if (options_.fsync && ::fsync(fd.get()) != 0) {
    const int err = errno;
    ::unlink(tmp.c_str());
    throw_io("fsync " + tmp.string(), err);
  }
  ::close(fd.release());

  // Concurrent puts of the same content race here harmlessly: rename is
  // atomic and both temp files hold identical bytes.
  if (::rename(tmp.c_str(), final_path.c_str()) != 0) {
    const int err = errno;
    ::unlink(tmp.c_str());
    throw_io("rename into " + final_path.string(), err);
  }
  return address;
}

std::optional<Bytes> FileStore::get(const ContentAddress& address) {
  const fs::path path = object_path(address);
  Fd fd(::open(path.c_str(), O_RDONLY | O_CLOEXEC));
  if (fd.get() < 0) {
    if (errno == ENOENT || errno == ENOTDIR) return std::nullopt;
    throw_io("open " + path.string(), errno);
  }
  struct stat st{};
  if (::fstat(fd.get(), &st) != 0) throw_io("stat " + path.string(), errno);

  Bytes out(static_cast<std::size_t>(st.st_size));
  std::size_t got = 0;
  while (got < out.size()) {
    const ssize_t n = ::read(fd.get(), out.data() + got, out.size() - got);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_io("read " + path.string(), errno);
    }
    if (n == 0) break;
    got += static_cast<std::size_t>(n);
  }
  out.resize(got);
  if (!verify_address(address, out)) throw IntegrityError(address);
  return out;
}

std::size_t FileStore::object_count() const {
  std::size_t n = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root_)) {
    if (entry.is_regular_file() && entry.path().filename().string().rfind(".tmp-", 0) != 0) ++n;
  }
  return n;
}

}  // namespace vidledger::cas
