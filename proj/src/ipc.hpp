// SPDX-License-Identifier: Apache-2.0
//
// Framed messages over a connected AF_UNIX stream socket: the coordinator's
// stand-in for MPI broadcast and barrier.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace objstore::bench::ipc {

enum class Msg : std::uint32_t {
  kReady = 1,    // worker -> coordinator: at the phase start line
  kToken = 2,    // worker 0 -> coordinator (session token), then broadcast back
  kGo = 3,       // coordinator -> workers: phase may start
  kArrive = 4,   // worker -> coordinator: signed in to the barrier
  kRelease = 5,  // coordinator -> workers: barrier complete
  kDone = 6,     // worker -> coordinator: serialized records
  kError = 7,    // worker -> coordinator: failure text
};

struct Message {
  Msg type;
  std::vector<std::byte> payload;
};

/// Returns false if the peer is gone.
bool send(int fd, Msg type, std::span<const std::byte> payload = {});
/// nullopt on EOF or a broken socket.
std::optional<Message> recv(int fd);

}  // namespace objstore::bench::ipc
