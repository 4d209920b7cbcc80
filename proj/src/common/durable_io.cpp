#include "asmctl/durable_io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "asmctl/common.hpp"

namespace asmctl {
namespace fs = std::filesystem;
namespace {

[[noreturn]] void fail(const std::string& what, const fs::path& path) {
  throw IoError(what + " " + path.string() + ": " + std::strerror(errno));
}

void write_all(int fd, const char* data, std::size_t n, const fs::path& path) {
  while (n > 0) {
    const ssize_t w = ::write(fd, data, n);
    if (w < 0) {
      if (errno == EINTR) continue;
      fail("write", path);
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

void fsync_dir(const fs::path& dir) {
  const int fd = ::open(dir.empty() ? "." : dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) fail("open", dir);
  ::fsync(fd);
  ::close(fd);
}

void write_and_sync(int fd, const char* data, std::size_t n, const fs::path& path) {
  try {
    write_all(fd, data, n, path);
    if (::fsync(fd) != 0) fail("fsync", path);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
}

}  // namespace

void append_durable(const fs::path& path, const std::string& text) {
  const bool existed = fs::exists(path);
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) fail("open", path);
  write_and_sync(fd, text.data(), text.size(), path);
  if (!existed) fsync_dir(path.parent_path());
}

void replace_durable(const fs::path& path, const char* data, std::size_t size) {
  fs::path tmp = path;
  tmp += ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) fail("open", tmp);
  write_and_sync(fd, data, size, tmp);
  if (::rename(tmp.c_str(), path.c_str()) != 0) fail("rename", tmp);
  fsync_dir(path.parent_path());
}

}  // namespace asmctl
