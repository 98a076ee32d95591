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


#include "adsaga/net/socket.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>
#include <thread>
#include <vector>

namespace adsaga::net {
namespace {

std::string ErrnoText(const std::string& what) {
  return what + ": " + std::strerror(errno);
}

// Reads exactly size bytes. Returns the number read before an orderly close.
std::size_t ReadFully(int fd, std::uint8_t* data, std::size_t size) {
  std::size_t done = 0;
  while (done < size) {
    const ssize_t got = ::recv(fd, data + done, size - done, 0);
    if (got == 0) return done;
    if (got < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error(ErrnoText("recv"));
    }
    done += static_cast<std::size_t>(got);
  }
  return done;
}

sockaddr_in Resolve(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  const std::string name = host.empty() || host == "localhost" ? "127.0.0.1" : host;
  if (::inet_pton(AF_INET, name.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  if (::getaddrinfo(name.c_str(), nullptr, &hints, &result) != 0 || result == nullptr) {
    throw std::runtime_error("cannot resolve host '" + host + "'");
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(result->ai_addr)->sin_addr;
  ::freeaddrinfo(result);
  return addr;
}

void SetNoDelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

}  // namespace

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    Close();
    fd_ = other.release();
  }
  return *this;
}

int Socket::release() {
  const int fd = fd_;
  fd_ = -1;
  return fd;
}

void Socket::Close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Socket::Shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::SetReceiveTimeout(int timeout_ms) {
  timeval tv{};
  tv.tv_sec = timeout_ms / 1000;
  tv.tv_usec = (timeout_ms % 1000) * 1000;
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

void Socket::Send(const WireMessage& message) {
  const std::vector<std::uint8_t> frame = Encode(message);
  std::size_t done = 0;
  while (done < frame.size()) {
    const ssize_t sent = ::send(fd_, frame.data() + done, frame.size() - done, MSG_NOSIGNAL);
    if (sent < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error(ErrnoText("send"));
    }
    done += static_cast<std::size_t>(sent);
  }
}

std::optional<WireMessage> Socket::Receive() {
  std::uint8_t prefix[kLengthBytes];
  const std::size_t got = ReadFully(fd_, prefix, kLengthBytes);
  if (got == 0) return std::nullopt;
  if (got < kLengthBytes) throw WireError("connection closed inside a length field");
  const std::uint32_t length = DecodeLength(std::span<const std::uint8_t, kLengthBytes>(prefix));
  std::vector<std::uint8_t> body(length);
  if (ReadFully(fd_, body.data(), length) < length) {
    throw WireError("connection closed inside a frame");
  }
  return DecodeBody(body);
}

Listener::Listener(const std::string& host, std::uint16_t port, int backlog) {
  socket_ = Socket(::socket(AF_INET, SOCK_STREAM, 0));
  if (!socket_.valid()) throw std::runtime_error(ErrnoText("socket"));
  int one = 1;
  ::setsockopt(socket_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = Resolve(host, port);
  if (::bind(socket_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw std::runtime_error(ErrnoText("bind port " + std::to_string(port)));
  }
  if (::listen(socket_.fd(), backlog) != 0) throw std::runtime_error(ErrnoText("listen"));
  socklen_t len = sizeof(addr);
  ::getsockname(socket_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

Socket Listener::Accept(int timeout_ms) {
  pollfd pfd{socket_.fd(), POLLIN, 0};
  for (;;) {
    const int ready = ::poll(&pfd, 1, timeout_ms);
    if (ready < 0 && errno == EINTR) continue;
    if (ready < 0) throw std::runtime_error(ErrnoText("poll"));
    if (ready == 0) return Socket();
    break;
  }
  const int fd = ::accept(socket_.fd(), nullptr, nullptr);
  if (fd < 0) throw std::runtime_error(ErrnoText("accept"));
  SetNoDelay(fd);
  return Socket(fd);
}

Socket Connect(const std::string& host, std::uint16_t port, int timeout_ms) {
  const sockaddr_in addr = Resolve(host, port);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  for (;;) {
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s.valid()) throw std::runtime_error(ErrnoText("socket"));
    if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) == 0) {
      SetNoDelay(s.fd());
      return s;
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      throw std::runtime_error(ErrnoText("connect to " + host + ":" + std::to_string(port)));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

}  // namespace adsaga::net
