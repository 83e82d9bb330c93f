#include "lab/transport.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>

namespace lab::live {

std::string encode_message(const json& message) {
  const std::string body = message.dump();
  if (body.size() > 0xffffffffu) throw ProtocolError("message too large");
  const auto n = static_cast<std::uint32_t>(body.size());
  std::string out;
  out.reserve(body.size() + 4);
  out.push_back(static_cast<char>(n >> 24));
  out.push_back(static_cast<char>(n >> 16));
  out.push_back(static_cast<char>(n >> 8));
  out.push_back(static_cast<char>(n));
  out += body;
  return out;
}

std::optional<std::string> MessageDecoder::next() {
  if (buffer_.size() < 4) return std::nullopt;
  const auto b = [&](int i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(buffer_[i])); };
  const std::size_t n = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
  if (n > max_bytes_) throw ProtocolError("message of " + std::to_string(n) + " bytes exceeds the limit");
  if (buffer_.size() < 4 + n) return std::nullopt;
  std::string body = buffer_.substr(4, n);
  buffer_.erase(0, 4 + n);
  return body;
}

namespace {

[[noreturn]] void sys_fail(const std::string& what) { throw std::runtime_error(what + ": " + std::strerror(errno)); }

bool write_all(int fd, std::string_view bytes) {
  while (!bytes.empty()) {
    const ssize_t n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

addrinfo* resolve(const std::string& host, int port, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res);
  if (rc != 0) throw std::runtime_error("cannot resolve " + host + ": " + ::gai_strerror(rc));
  return res;
}

}  // namespace

// One accepted socket: a reader thread feeding the service and a writer
// thread draining the outbound queue.
class Connection final : public Client, public std::enable_shared_from_this<Connection> {
 public:
  Connection(int fd, Service& service) : fd_(fd), service_(service), decoder_(service.config().max_message_bytes) {}

  ~Connection() override {
    if (fd_ >= 0) ::close(fd_);
  }

  void start() {
    reader_ = std::thread([this] { read_loop(); });
    writer_ = std::thread([this] { write_loop(); });
  }

  void send(const json& message) override {
    std::string bytes = encode_message(message);
    {
      std::lock_guard lk(mu_);
      if (closed_) return;
      backlog_ += bytes.size();
      out_.push_back(std::move(bytes));
    }
    cv_.notify_one();
  }

  std::size_t backlog() const override {
    std::lock_guard lk(mu_);
    return backlog_;
  }

  bool done() const { return finished_.load(); }

  void shutdown() {
    ::shutdown(fd_, SHUT_RDWR);
    close_queue();
  }

  void join() {
    if (reader_.joinable()) reader_.join();
    if (writer_.joinable()) writer_.join();
  }

 private:
  void close_queue() {
    {
      std::lock_guard lk(mu_);
      closed_ = true;
      out_.clear();
      backlog_ = 0;
    }
    cv_.notify_all();
  }

  void read_loop() {
    auto self = shared_from_this();
    char buf[64 * 1024];
    try {
      for (;;) {
        const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
        if (n == 0) break;
        if (n < 0) {
          if (errno == EINTR) continue;
          break;
        }
        decoder_.feed({buf, static_cast<std::size_t>(n)});
        while (auto body = decoder_.next()) {
          json request;
          try {
            request = json::parse(*body);
          } catch (const json::parse_error& e) {
            send({{"proto_version", kProtoVersion}, {"type", "response"}, {"id", nullptr}, {"ok", false},
                  {"error", {{"code", "bad_request"}, {"message", std::string("malformed JSON: ") + e.what()}}}});
            continue;
          }
          service_.handle(request, self);
        }
      }
    } catch (const ProtocolError& e) {
      send({{"proto_version", kProtoVersion}, {"type", "response"}, {"id", nullptr}, {"ok", false},
            {"error", {{"code", "message_too_large"}, {"message", e.what()}}}});
      // Let the writer flush the error before the socket goes away.
      std::unique_lock lk(mu_);
      cv_.wait_for(lk, std::chrono::seconds(1), [&] { return out_.empty(); });
    }
    service_.detach(this);
    ::shutdown(fd_, SHUT_RDWR);
    close_queue();
    finished_ = true;
  }

  void write_loop() {
    for (;;) {
      std::string bytes;
      {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [&] { return closed_ || !out_.empty(); });
        if (out_.empty()) return;
        bytes = std::move(out_.front());
        out_.pop_front();
      }
      const bool ok = write_all(fd_, bytes);
      {
        std::lock_guard lk(mu_);
        backlog_ -= std::min(backlog_, bytes.size());
      }
      cv_.notify_all();
      if (!ok) {
        ::shutdown(fd_, SHUT_RDWR);
        return;
      }
    }
  }

  int fd_;
  Service& service_;
  MessageDecoder decoder_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> out_;
  std::size_t backlog_ = 0;
  bool closed_ = false;
  std::atomic<bool> finished_{false};
  std::thread reader_, writer_;
};

TcpServer::TcpServer(Service& service, const std::string& host, int port) : service_(service) {
  addrinfo* res = resolve(host, port, true);
  for (addrinfo* a = res; a; a = a->ai_next) {
    const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, a->ai_addr, a->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
      listen_fd_ = fd;
      break;
    }
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (listen_fd_ < 0) sys_fail("cannot listen on " + host + ":" + std::to_string(port));
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.ss_family == AF_INET6 ? reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port
                                           : reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

TcpServer::~TcpServer() {
  stop();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpServer::start() {
  acceptor_ = std::thread([this] { accept_loop(); });
}

void TcpServer::stop() {
  stopping_ = true;
  if (acceptor_.joinable()) acceptor_.join();
  reap(true);
}

std::size_t TcpServer::open_connections() {
  reap(false);
  std::lock_guard lk(mu_);
  return connections_.size();
}

void TcpServer::reap(bool all) {
  std::vector<std::shared_ptr<Connection>> gone;
  {
    std::lock_guard lk(mu_);
    for (auto it = connections_.begin(); it != connections_.end();) {
      if (all || (*it)->done()) {
        gone.push_back(std::move(*it));
        it = connections_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& c : gone) {
    c->shutdown();
    c->join();
  }
}

void TcpServer::accept_loop() {
  while (!stopping_) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, 100);
    reap(false);
    if (rc <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    auto conn = std::make_shared<Connection>(fd, service_);
    {
      std::lock_guard lk(mu_);
      connections_.push_back(conn);
    }
    conn->start();
  }
}

TcpClient::TcpClient(const std::string& host, int port, std::size_t max_bytes) : decoder_(max_bytes) {
  addrinfo* res = resolve(host, port, false);
  for (addrinfo* a = res; a; a = a->ai_next) {
    const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) {
      fd_ = fd;
      break;
    }
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) sys_fail("cannot connect to " + host + ":" + std::to_string(port));
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

TcpClient::~TcpClient() { close(); }

void TcpClient::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void TcpClient::send(const json& message) { send_raw(encode_message(message)); }

void TcpClient::send_raw(std::string_view bytes) {
  if (fd_ < 0 || !write_all(fd_, bytes)) throw std::runtime_error("send failed");
}

std::optional<json> TcpClient::receive(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (auto body = decoder_.next()) return json::parse(*body);
    if (fd_ < 0) return std::nullopt;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd p{fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, static_cast<int>(left.count()));
    if (rc < 0 && errno != EINTR) sys_fail("poll");
    if (rc <= 0) continue;
    char buf[64 * 1024];
    const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
    if (n <= 0) {
      close();
      continue;
    }
    decoder_.feed({buf, static_cast<std::size_t>(n)});
  }
}

}  // namespace lab::live
