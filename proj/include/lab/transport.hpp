#pragma once

// Length-prefixed JSON over TCP: each message is a 4-byte big-endian byte
// count followed by that many bytes of UTF-8 JSON.

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "lab/service.hpp"

namespace lab::live {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string encode_message(const json& message);

/// Reassembles messages from arbitrary byte chunks.
class MessageDecoder {
 public:
  explicit MessageDecoder(std::size_t max_bytes) : max_bytes_(max_bytes) {}

  void feed(std::string_view bytes) { buffer_.append(bytes); }

  /// Next complete message body; throws ProtocolError if a length exceeds the limit.
  std::optional<std::string> next();

 private:
  std::size_t max_bytes_;
  std::string buffer_;
};

class Connection;

class TcpServer {
 public:
  /// Port 0 picks an ephemeral port; see port().
  TcpServer(Service& service, const std::string& host, int port);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  int port() const noexcept { return port_; }
  void start();
  void stop();
  std::size_t open_connections();

 private:
  void accept_loop();
  void reap(bool all);

  Service& service_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::vector<std::shared_ptr<Connection>> connections_;
};

/// Blocking client, used by tests and scripts.
class TcpClient {
 public:
  TcpClient(const std::string& host, int port, std::size_t max_bytes = 16u << 20);
  ~TcpClient();
  TcpClient(const TcpClient&) = delete;
  TcpClient& operator=(const TcpClient&) = delete;

  void send(const json& message);
  void send_raw(std::string_view bytes);
  std::optional<json> receive(std::chrono::milliseconds timeout);
  void close();

 private:
  int fd_ = -1;
  MessageDecoder decoder_;
};

}  // namespace lab::live
