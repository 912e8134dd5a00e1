/* Copyright 2026 The SCDNN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef SCDNN_IO_UDP_HPP_
#define SCDNN_IO_UDP_HPP_

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "scdnn/io/wire.hpp"

namespace scdnn::io {

/// Fixed-capacity FIFO; pushing into a full queue evicts the oldest entry.
template <typename T>
class DropOldestQueue {
 public:
  explicit DropOldestQueue(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("queue capacity must be positive");
  }

  /// Returns true when an older item was dropped to make room.
  bool push(T item) {
    bool dropped = false;
    {
      std::lock_guard lock(mu_);
      if (items_.size() == capacity_) {
        items_.pop_front();
        dropped = true;
      }
      items_.push_back(std::move(item));
    }
    cv_.notify_one();
    return dropped;
  }

  std::optional<T> pop(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    if (!cv_.wait_for(lock, timeout, [this] { return !items_.empty(); })) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    return item;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return items_.size();
  }

 private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> items_;
};

class SocketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

class Socket {
 public:
  Socket() : fd_(::socket(AF_INET, SOCK_DGRAM, 0)) {
    if (fd_ < 0) throw SocketError(std::string("socket: ") + std::strerror(errno));
  }
  ~Socket() {
    if (fd_ >= 0) ::close(fd_);
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const { return fd_; }

 private:
  int fd_;
};

inline sockaddr_in make_address(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw SocketError("invalid IPv4 address '" + host + "'");
  }
  return addr;
}

inline std::uint64_t now_ms() {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                        std::chrono::system_clock::now().time_since_epoch())
                                        .count());
}

}  // namespace detail

/// Receives wire frames on a background thread and hands them to a
/// bounded drop-oldest queue. Malformed datagrams are counted and skipped.
class UdpListener {
 public:
  struct Counters {
    std::uint64_t received = 0;  // valid frames decoded
    std::uint64_t rejected = 0;  // malformed datagrams
    std::uint64_t dropped = 0;   // evicted from a full queue
  };

  /// Binds immediately; port 0 picks an ephemeral port.
  UdpListener(std::uint16_t port, std::size_t queue_capacity = 1024,
              const std::string& host = "0.0.0.0")
      : queue_(queue_capacity) {
    const sockaddr_in addr = detail::make_address(host, port);
    if (::bind(socket_.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
      throw SocketError("bind " + host + ":" + std::to_string(port) + ": " +
                        std::strerror(errno));
    }
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(socket_.fd(), reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
    worker_ = std::thread([this] { run(); });
  }

  ~UdpListener() { stop(); }

  UdpListener(const UdpListener&) = delete;
  UdpListener& operator=(const UdpListener&) = delete;

  std::uint16_t port() const { return port_; }

  void stop() {
    stopping_ = true;
    if (worker_.joinable()) worker_.join();
  }

  std::optional<RawFrame> next(std::chrono::milliseconds timeout) { return queue_.pop(timeout); }

  Counters counters() const {
    return {received_.load(), rejected_.load(), dropped_.load()};
  }

 private:
  void run() {
    std::vector<std::uint8_t> buf(2048);
    while (!stopping_) {
      pollfd p{socket_.fd(), POLLIN, 0};
      const int ready = ::poll(&p, 1, 50);
      if (ready <= 0) continue;
      const ssize_t n = ::recv(socket_.fd(), buf.data(), buf.size(), 0);
      if (n < 0) continue;
      try {
        RawFrame f = decode_wire_frame({buf.data(), static_cast<std::size_t>(n)},
                                       detail::now_ms());
        ++received_;
        if (queue_.push(f)) ++dropped_;
      } catch (const WireFormatError&) {
        ++rejected_;
      }
    }
  }

  detail::Socket socket_;
  DropOldestQueue<RawFrame> queue_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> received_{0}, rejected_{0}, dropped_{0};
  std::thread worker_;
};

/// Sends datagrams to one destination.
class UdpSender {
 public:
  UdpSender(const std::string& host, std::uint16_t port)
      : addr_(detail::make_address(host, port)) {}

  void send(std::span<const std::uint8_t> payload) {
    const ssize_t n = ::sendto(socket_.fd(), payload.data(), payload.size(), 0,
                               reinterpret_cast<const sockaddr*>(&addr_), sizeof addr_);
    if (n != static_cast<ssize_t>(payload.size())) {
      throw SocketError(std::string("sendto: ") + std::strerror(errno));
    }
  }

  void send(const RawFrame& frame) { send(encode_wire_frame(frame)); }

 private:
  detail::Socket socket_;
  sockaddr_in addr_;
};

}  // namespace scdnn::io

#endif  // SCDNN_IO_UDP_HPP_
