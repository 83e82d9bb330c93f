#pragma once

// Live session service: request handling, per-session simulation loops,
// frame fan-out and replay. Transport-agnostic; see transport.hpp for TCP.

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace lab::live {

using nlohmann::json;

inline constexpr int kProtoVersion = 1;

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 7878;
  std::size_t max_sessions = 64;
  std::size_t replay_frames = 256;   // per session
  int retry_after_ms = 1000;         // advertised when at capacity
  std::size_t cadence_steps = 1000;  // default frame cadence ...
  double cadence_seconds = 1.0 / 30; // ... whichever comes first
  std::size_t max_message_bytes = 16u << 20;
  std::size_t max_backlog_bytes = 8u << 20;  // per client; running sessions wait above this

  /// Reads a JSON object with any of the keys above; unknown keys are an error.
  static ServerConfig from_json(const json& doc);
  static ServerConfig load(const std::filesystem::path& file);
  /// LAB_SERVER_HOST and LAB_SERVER_PORT override the file.
  void apply_env();
};

/// Receives responses, frames and events for one client connection.
class Client {
 public:
  virtual ~Client() = default;
  virtual void send(const json& message) = 0;
  /// Bytes accepted but not yet delivered.
  virtual std::size_t backlog() const { return 0; }
};

class Session;

class Service {
 public:
  explicit Service(ServerConfig config = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Handles one request. The response, and any frames it causes, reach
  /// `client` through Client::send, possibly from another thread.
  void handle(const json& request, const std::shared_ptr<Client>& client);

  /// Drops every subscription held by a disconnected client.
  void detach(const Client* client);

  json health() const;
  const ServerConfig& config() const noexcept { return config_; }

  /// Session objects and loop threads alive in the process.
  static std::size_t live_session_objects();
  static std::size_t live_loop_threads();

 private:
  std::shared_ptr<Session> find(const std::string& id) const;
  void create(const json& req, const std::shared_ptr<Client>& client);
  void close(const json& req, const std::shared_ptr<Client>& client);

  ServerConfig config_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
  std::uint64_t id_salt_;
};

}  // namespace lab::live
