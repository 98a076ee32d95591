// Copyright 2026 The ADSAGA Workbench Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Minimal blocking TCP helpers over POSIX sockets.

#ifndef ADSAGA_NET_SOCKET_H_
#define ADSAGA_NET_SOCKET_H_

#include <cstdint>
#include <optional>
#include <string>

#include "adsaga/net/wire.h"

namespace adsaga::net {

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { Close(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release();
  void Close();
  // Half-closes both directions so a peer blocked in recv wakes up.
  void Shutdown();
  // SO_RCVTIMEO; 0 disables the timeout.
  void SetReceiveTimeout(int timeout_ms);

  // Throws std::runtime_error on a send failure.
  void Send(const WireMessage& message);
  // Blocks for one whole frame. Returns nullopt on an orderly close at a
  // frame boundary; throws WireError on a malformed or truncated frame and
  // std::runtime_error on socket errors.
  std::optional<WireMessage> Receive();

 private:
  int fd_ = -1;
};

class Listener {
 public:
  // Binds host:port (port 0 picks a free port) and listens.
  Listener(const std::string& host, std::uint16_t port, int backlog = 64);

  std::uint16_t port() const { return port_; }
  // Waits up to timeout_ms (negative: forever). Returns an invalid socket on
  // timeout.
  Socket Accept(int timeout_ms);
  void Close() { socket_.Close(); }

 private:
  Socket socket_;
  std::uint16_t port_ = 0;
};

// Connects with retries until timeout_ms elapses; throws std::runtime_error.
Socket Connect(const std::string& host, std::uint16_t port, int timeout_ms = 10000);

}  // namespace adsaga::net

#endif  // ADSAGA_NET_SOCKET_H_
