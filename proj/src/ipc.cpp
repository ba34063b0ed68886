// SPDX-License-Identifier: Apache-2.0

#include "ipc.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>

#include "byte_io.hpp"

namespace objstore::bench::ipc {

namespace {

bool send_all(int fd, const std::byte* p, std::size_t n) {
  while (n) {
    ssize_t k = ::send(fd, p, n, MSG_NOSIGNAL);
    if (k < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    p += k;
    n -= static_cast<std::size_t>(k);
  }
  return true;
}

bool recv_all(int fd, std::byte* p, std::size_t n) {
  while (n) {
    ssize_t k = ::recv(fd, p, n, 0);
    if (k < 0 && errno == EINTR) continue;
    if (k <= 0) return false;
    p += k;
    n -= static_cast<std::size_t>(k);
  }
  return true;
}

}  // namespace

bool send(int fd, Msg type, std::span<const std::byte> payload) {
  detail::ByteWriter w(8 + payload.size());
  w.u32(static_cast<std::uint32_t>(type));
  w.u32(static_cast<std::uint32_t>(payload.size()));
  w.bytes(payload.data(), payload.size());
  auto frame = w.take();
  return send_all(fd, frame.data(), frame.size());
}

std::optional<Message> recv(int fd) {
  std::byte head[8];
  if (!recv_all(fd, head, sizeof head)) return std::nullopt;
  detail::ByteReader r(head);
  std::uint32_t type = 0, len = 0;
  r.u32(type);
  r.u32(len);
  Message m{static_cast<Msg>(type), std::vector<std::byte>(len)};
  if (len && !recv_all(fd, m.payload.data(), len)) return std::nullopt;
  return m;
}

}  // namespace objstore::bench::ipc
