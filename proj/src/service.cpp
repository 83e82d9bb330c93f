#include "lab/service.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "lab/schema.hpp"
#include "lab/simulation.hpp"

namespace lab::live {

namespace {

using Clock = std::chrono::steady_clock;

std::atomic<std::size_t> g_session_objects{0};
std::atomic<std::size_t> g_loop_threads{0};

class RequestError : public std::runtime_error {
 public:
  RequestError(std::string code, const std::string& message, json extra = json::object())
      : std::runtime_error(message), code_(std::move(code)), extra_(std::move(extra)) {}
  const std::string& code() const noexcept { return code_; }
  const json& extra() const noexcept { return extra_; }

 private:
  std::string code_;
  json extra_;
};

json ok(const json& id, json result) {
  return {{"proto_version", kProtoVersion}, {"type", "response"}, {"id", id}, {"ok", true}, {"result", std::move(result)}};
}

json failure(const json& id, const std::string& code, const std::string& message, const json& extra = json::object()) {
  json err{{"code", code}, {"message", message}};
  err.update(extra);
  return {{"proto_version", kProtoVersion}, {"type", "response"}, {"id", id}, {"ok", false}, {"error", std::move(err)}};
}

json failure(const json& id, const std::exception& e) {
  if (const auto* s = dynamic_cast<const schema::SchemaError*>(&e)) {
    return failure(id, s->code(), s->what(), s->field().empty() ? json::object() : json{{"field", s->field()}});
  }
  if (const auto* r = dynamic_cast<const RequestError*>(&e)) return failure(id, r->code(), r->what(), r->extra());
  if (dynamic_cast<const std::invalid_argument*>(&e)) return failure(id, "invalid_value", e.what());
  return failure(id, "internal_error", e.what());
}

std::string require_string(const json& req, const char* key) {
  const auto it = req.find(key);
  if (it == req.end() || !it->is_string()) throw RequestError("bad_request", std::string("\"") + key + "\" must be a string");
  return it->get<std::string>();
}

std::optional<std::uint64_t> optional_count(const json& req, const char* key) {
  const auto it = req.find(key);
  if (it == req.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer() || it->get<std::int64_t>() < 0) throw RequestError("bad_request", std::string("\"") + key + "\" must be a non-negative integer");
  return it->get<std::uint64_t>();
}

struct Cadence {
  std::size_t steps;
  double seconds;
};

Cadence read_cadence(const json& req, Cadence base) {
  const auto it = req.find("cadence");
  if (it == req.end()) return base;
  if (!it->is_object()) throw RequestError("bad_request", "\"cadence\" must be an object");
  if (auto s = optional_count(*it, "steps")) {
    if (*s == 0) throw RequestError("bad_request", "cadence steps must be >= 1");
    base.steps = *s;
  }
  if (auto ms = optional_count(*it, "interval_ms")) base.seconds = static_cast<double>(*ms) / 1000.0;
  return base;
}

}  // namespace

// ---------------------------------------------------------------------------

ServerConfig ServerConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("server config must be a JSON object");
  ServerConfig c;
  for (const auto& [key, v] : doc.items()) {
    if (key == "host") c.host = v.get<std::string>();
    else if (key == "port") c.port = v.get<int>();
    else if (key == "max_sessions") c.max_sessions = v.get<std::size_t>();
    else if (key == "replay_frames") c.replay_frames = v.get<std::size_t>();
    else if (key == "retry_after_ms") c.retry_after_ms = v.get<int>();
    else if (key == "cadence_steps") c.cadence_steps = v.get<std::size_t>();
    else if (key == "cadence_seconds") c.cadence_seconds = v.get<double>();
    else if (key == "max_message_bytes") c.max_message_bytes = v.get<std::size_t>();
    else if (key == "max_backlog_bytes") c.max_backlog_bytes = v.get<std::size_t>();
    else throw std::invalid_argument("unknown server config key '" + key + "'");
  }
  if (c.port < 0 || c.port > 65535) throw std::invalid_argument("port out of range");
  if (c.cadence_steps == 0) throw std::invalid_argument("cadence_steps must be >= 1");
  return c;
}

ServerConfig ServerConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot open server config " + file.string());
  return from_json(json::parse(in));
}

void ServerConfig::apply_env() {
  if (const char* h = std::getenv("LAB_SERVER_HOST"); h && *h) host = h;
  if (const char* p = std::getenv("LAB_SERVER_PORT"); p && *p) {
    char* end = nullptr;
    const long v = std::strtol(p, &end, 10);
    if (*end != '\0' || v < 0 || v > 65535) throw std::invalid_argument("LAB_SERVER_PORT must be a port number");
    port = static_cast<int>(v);
  }
}

// ---------------------------------------------------------------------------

enum class Status { Paused, Running, Failed, Closed };

const char* to_string(Status s) {
  switch (s) {
    case Status::Paused: return "paused";
    case Status::Running: return "running";
    case Status::Failed: return "failed";
    case Status::Closed: return "closed";
  }
  return "unknown";
}

struct Command {
  std::string op;
  json request;
  std::shared_ptr<Client> client;
};

class Session {
 public:
  Session(std::string id, const schema::ExperimentSchema& schema, json params, std::unique_ptr<Simulation> sim,
          const ServerConfig& config, Cadence cadence)
      : id_(std::move(id)), schema_(schema), params_(std::move(params)), sim_(std::move(sim)), config_(config),
        cadence_(cadence) {
    ++g_session_objects;
    thread_ = std::thread([this] {
      ++g_loop_threads;
      loop();
      --g_loop_threads;
    });
  }

  ~Session() {
    shutdown({});
    --g_session_objects;
  }

  const std::string& id() const noexcept { return id_; }

  void post(Command cmd) {
    {
      std::lock_guard lk(inbox_mu_);
      inbox_.push_back(std::move(cmd));
    }
    inbox_cv_.notify_one();
  }

  /// Posts a close (replying to `reply_to` if set) and waits for the loop to exit.
  void shutdown(Command close) {
    std::lock_guard lk(join_mu_);
    if (!thread_.joinable()) return;
    close.op = "close";
    post(std::move(close));
    thread_.join();
  }

  Status state() const {
    std::lock_guard lk(status_mu_);
    return status_;
  }

  json status() const {
    std::lock_guard lk(status_mu_);
    json out{{"session_id", id_},
             {"experiment", schema_.name},
             {"status", to_string(status_)},
             {"step", step_.load()},
             {"param_epoch", epoch_},
             {"params", params_},
             {"frame_kind", to_string(sim_kind_)}};
    if (status_ == Status::Failed) out["failure"] = failure_;
    return out;
  }

  void detach(const Client* client) {
    std::lock_guard lk(emit_mu_);
    std::erase_if(subscribers_, [&](const auto& s) { return s.first == client; });
  }

 private:
  // --- loop thread ---------------------------------------------------------

  bool active() const { return (running_ && !finished_) || remaining_ > 0; }

  bool throttled() {
    std::lock_guard lk(emit_mu_);
    for (const auto& [raw, weak] : subscribers_) {
      if (auto c = weak.lock(); c && c->backlog() > config_.max_backlog_bytes) return true;
    }
    return false;
  }

  void loop() {
    for (;;) {
      const bool busy = active();
      const bool wait_for_client = busy && throttled();
      std::optional<Command> cmd;
      {
        std::unique_lock lk(inbox_mu_);
        if (!busy) {
          inbox_cv_.wait(lk, [&] { return !inbox_.empty(); });
        } else if (wait_for_client) {
          inbox_cv_.wait_for(lk, std::chrono::milliseconds(2), [&] { return !inbox_.empty(); });
        }
        if (!inbox_.empty()) {
          cmd = std::move(inbox_.front());
          inbox_.pop_front();
        }
      }
      if (cmd) {
        if (!dispatch(*cmd)) return;
        continue;
      }
      if (busy && !wait_for_client) step_once();
    }
  }

  void set_status(Status s) {
    std::lock_guard lk(status_mu_);
    status_ = s;
  }

  void reply(const Command& cmd, json result) {
    if (cmd.client) cmd.client->send(ok(cmd.request.value("id", json()), std::move(result)));
  }

  void reply_error(const Command& cmd, const std::exception& e) {
    if (cmd.client) cmd.client->send(failure(cmd.request.value("id", json()), e));
  }

  json envelope(const char* type) const {
    return {{"proto_version", kProtoVersion}, {"type", type}, {"session_id", id_}, {"step", step_.load()}};
  }

  void broadcast(const json& message) {
    for (auto it = subscribers_.begin(); it != subscribers_.end();) {
      if (auto c = it->second.lock()) {
        c->send(message);
        ++it;
      } else {
        it = subscribers_.erase(it);
      }
    }
  }

  void flush() {
    auto payload = sim_->drain();
    last_flush_ = Clock::now();
    since_flush_ = 0;
    if (!payload) return;
    json frame = envelope("frame");
    frame["kind"] = to_string(sim_->kind());
    frame["param_epoch"] = epoch_;
    frame["keyframe"] = false;
    frame["payload"] = std::move(*payload);
    std::lock_guard lk(emit_mu_);
    broadcast(frame);
    replay_.push_back(std::move(frame));
    while (replay_.size() > config_.replay_frames) {
      evicted_through_ = replay_.front()["step"].get<std::int64_t>();
      replay_.pop_front();
    }
  }

  void fail(const std::string& message) {
    running_ = false;
    remaining_ = 0;
    {
      std::lock_guard lk(status_mu_);
      status_ = Status::Failed;
      failure_ = message;
    }
    json event = envelope("event");
    event["event"] = "failed";
    event["message"] = message;
    {
      std::lock_guard lk(emit_mu_);
      broadcast(event);
    }
    if (step_cmd_) {
      reply_error(*step_cmd_, RequestError("step_failed", message));
      step_cmd_.reset();
    }
  }

  void complete_step(bool interrupted) {
    if (!step_cmd_) return;
    const auto asked = step_cmd_->request.at("n").get<std::uint64_t>();
    json result{{"advanced", asked - remaining_}, {"step", step_.load()}, {"status", "paused"}};
    if (interrupted) result["interrupted"] = true;
    if (finished_ && remaining_ > 0) result["exhausted"] = true;
    remaining_ = 0;
    if (!running_) set_status(Status::Paused);
    reply(*step_cmd_, std::move(result));
    step_cmd_.reset();
  }

  void step_once() {
    try {
      if (!sim_->advance()) {
        finished_ = true;
        flush();
        complete_step(false);
        return;
      }
      ++step_;
      ++since_flush_;
      if (remaining_ > 0) --remaining_;
      const bool due = sim_->rerenders() || since_flush_ >= cadence_.steps ||
                       (cadence_.seconds > 0.0 && std::chrono::duration<double>(Clock::now() - last_flush_).count() >= cadence_.seconds);
      if (due || (step_cmd_ && remaining_ == 0)) flush();
      if (step_cmd_ && remaining_ == 0) complete_step(false);
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }

  void require_live() const {
    std::lock_guard lk(status_mu_);
    if (status_ == Status::Failed) throw RequestError("session_failed", failure_);
  }

  // Returns false once the session is closed.
  bool dispatch(Command& cmd) {
    try {
      if (cmd.op == "run" || cmd.op == "step" || cmd.op == "patch") require_live();
      if (state() != Status::Failed) flush();
      if (cmd.op == "patch") return patch(cmd), true;
      if (cmd.op == "run") return run(cmd), true;
      if (cmd.op == "pause") return pause(cmd), true;
      if (cmd.op == "step") return step(cmd), true;
      if (cmd.op == "subscribe") return subscribe(cmd), true;
      if (cmd.op == "unsubscribe") {
        detach(cmd.client.get());
        reply(cmd, {{"subscribed", false}});
        return true;
      }
      if (cmd.op == "cadence") {
        cadence_ = read_cadence(cmd.request, cadence_);
        reply(cmd, {{"cadence", {{"steps", cadence_.steps}, {"interval_ms", std::llround(cadence_.seconds * 1000.0)}}}});
        return true;
      }
      if (cmd.op == "close") {
        if (step_cmd_) complete_step(true);
        set_status(Status::Closed);
        json event = envelope("event");
        event["event"] = "closed";
        {
          std::lock_guard lk(emit_mu_);
          broadcast(event);
          subscribers_.clear();
          replay_.clear();
        }
        reply(cmd, {{"closed", true}, {"step", step_.load()}});
        return false;
      }
      throw RequestError("unknown_op", "unknown op '" + cmd.op + "'");
    } catch (const std::exception& e) {
      if (cmd.op == "close") return false;
      if (dynamic_cast<const RequestError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e)) {
        reply_error(cmd, e);
      } else {
        // A drain that fails is a numerical failure of the session itself.
        fail(e.what());
        reply_error(cmd, RequestError("session_failed", e.what()));
      }
      return true;
    }
  }

  void patch(const Command& cmd) {
    const auto it = cmd.request.find("params");
    if (it == cmd.request.end()) throw RequestError("bad_request", "patch needs \"params\"");
    json merged = schema::apply_patch(schema_, params_, *it);
    sim_->apply(merged, *it);
    {
      std::lock_guard lk(status_mu_);
      params_ = std::move(merged);
      ++epoch_;
    }
    finished_ = false;
    reply(cmd, {{"param_epoch", epoch_}, {"step", step_.load()}, {"params", params_}});
  }

  void run(const Command& cmd) {
    if (step_cmd_) throw RequestError("invalid_state", "a step request is still in progress");
    if (cmd.request.contains("cadence")) cadence_ = read_cadence(cmd.request, cadence_);
    running_ = true;
    set_status(Status::Running);
    reply(cmd, {{"status", "running"}, {"step", step_.load()}});
  }

  void pause(const Command& cmd) {
    running_ = false;
    if (step_cmd_) complete_step(true);
    set_status(Status::Paused);
    reply(cmd, {{"status", "paused"}, {"step", step_.load()}});
  }

  void step(Command& cmd) {
    if (running_ || step_cmd_) throw RequestError("invalid_state", "session is running; pause before stepping");
    const auto n = optional_count(cmd.request, "n");
    if (!n) throw RequestError("bad_request", "step needs \"n\"");
    if (*n == 0) {
      reply(cmd, {{"advanced", 0}, {"step", step_.load()}, {"status", "paused"}});
      return;
    }
    remaining_ = *n;
    step_cmd_ = std::move(cmd);
    set_status(Status::Running);
  }

  void subscribe(const Command& cmd) {
    const auto from = optional_count(cmd.request, "from_step");
    if (from && *from > step_.load()) {
      throw RequestError("bad_request", "from_step " + std::to_string(*from) + " is ahead of the session");
    }
    std::lock_guard lk(emit_mu_);
    std::erase_if(subscribers_, [&](const auto& s) { return s.first == cmd.client.get(); });
    subscribers_.emplace_back(cmd.client.get(), cmd.client);
    if (!from) {
      reply(cmd, {{"subscribed", true}, {"step", step_.load()}, {"replayed", 0}, {"keyframe", false}});
      return;
    }
    const auto last_ack = static_cast<std::int64_t>(*from);
    if (last_ack >= evicted_through_) {
      std::vector<const json*> frames;
      for (const auto& f : replay_) {
        if (f["step"].get<std::int64_t>() > last_ack) frames.push_back(&f);
      }
      reply(cmd, {{"subscribed", true}, {"step", step_.load()}, {"replayed", frames.size()}, {"keyframe", false}});
      for (const auto* f : frames) cmd.client->send(*f);
      return;
    }
    reply(cmd, {{"subscribed", true}, {"step", step_.load()}, {"replayed", 0}, {"keyframe", true}});
    json frame = envelope("frame");
    frame["kind"] = to_string(sim_->kind());
    frame["param_epoch"] = epoch_;
    frame["keyframe"] = true;
    frame["replay_gap"] = true;
    frame["payload"] = sim_->keyframe();
    frame["payload"]["params"] = params_;
    cmd.client->send(frame);
  }

  const std::string id_;
  const schema::ExperimentSchema& schema_;

  mutable std::mutex status_mu_;
  Status status_ = Status::Paused;
  std::string failure_;
  json params_;
  std::uint64_t epoch_ = 0;
  std::atomic<std::uint64_t> step_{0};

  std::unique_ptr<Simulation> sim_;
  const FrameKind sim_kind_ = sim_->kind();
  const ServerConfig& config_;
  Cadence cadence_;

  // Loop-thread state.
  bool running_ = false;
  bool finished_ = false;
  std::uint64_t remaining_ = 0;
  std::optional<Command> step_cmd_;
  std::size_t since_flush_ = 0;
  Clock::time_point last_flush_ = Clock::now();

  std::mutex emit_mu_;
  std::vector<std::pair<const Client*, std::weak_ptr<Client>>> subscribers_;
  std::deque<json> replay_;
  std::int64_t evicted_through_ = -1;

  std::mutex inbox_mu_;
  std::condition_variable inbox_cv_;
  std::deque<Command> inbox_;

  std::mutex join_mu_;
  std::thread thread_;
};

// ---------------------------------------------------------------------------

Service::Service(ServerConfig config) : config_(std::move(config)), id_salt_(std::random_device{}()) {}

Service::~Service() {
  std::map<std::string, std::shared_ptr<Session>> all;
  {
    std::lock_guard lk(mu_);
    all.swap(sessions_);
  }
  for (auto& [id, s] : all) s->shutdown({});
}

std::size_t Service::live_session_objects() { return g_session_objects.load(); }
std::size_t Service::live_loop_threads() { return g_loop_threads.load(); }

std::shared_ptr<Session> Service::find(const std::string& id) const {
  std::lock_guard lk(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw RequestError("unknown_session", "no session '" + id + "'");
  return it->second;
}

json Service::health() const {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::lock_guard lk(mu_);
    for (const auto& [id, s] : sessions_) all.push_back(s);
  }
  std::size_t running = 0, paused = 0, failed = 0;
  for (const auto& s : all) {
    switch (s->state()) {
      case Status::Running: ++running; break;
      case Status::Paused: ++paused; break;
      case Status::Failed: ++failed; break;
      case Status::Closed: break;
    }
  }
  return {{"status", "ok"},
          {"proto_version", kProtoVersion},
          {"sessions", {{"total", all.size()}, {"running", running}, {"paused", paused}, {"failed", failed}}},
          {"capacity", config_.max_sessions}};
}

void Service::detach(const Client* client) {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::lock_guard lk(mu_);
    for (const auto& [id, s] : sessions_) all.push_back(s);
  }
  for (const auto& s : all) s->detach(client);
}

void Service::create(const json& req, const std::shared_ptr<Client>& client) {
  const auto& sch = schema::find_experiment(require_string(req, "experiment"));
  const json given = req.contains("params") ? req["params"] : json::object();
  json params = schema::resolve(sch, given, schema::Mode::Session);
  const std::uint64_t seed = optional_count(req, "seed").value_or(0);
  const Cadence cadence = read_cadence(req, {config_.cadence_steps, config_.cadence_seconds});
  auto sim = make_simulation(sch.name, params, seed);

  std::shared_ptr<Session> session;
  {
    std::lock_guard lk(mu_);
    if (sessions_.size() >= config_.max_sessions) {
      throw RequestError("capacity_exceeded",
                         "session limit of " + std::to_string(config_.max_sessions) + " reached; retry later",
                         {{"retry_after_ms", config_.retry_after_ms}});
    }
    std::mt19937_64 mix(id_salt_ ^ (next_id_ * 0x9e3779b97f4a7c15ull));
    char buf[40];
    std::snprintf(buf, sizeof buf, "s%llu-%08llx", static_cast<unsigned long long>(next_id_++),
                  static_cast<unsigned long long>(mix() & 0xffffffffull));
    session = std::make_shared<Session>(buf, sch, params, std::move(sim), config_, cadence);
    sessions_.emplace(session->id(), session);
  }
  json result = session->status();
  client->send(ok(req.value("id", json()), std::move(result)));
}

void Service::close(const json& req, const std::shared_ptr<Client>& client) {
  const auto id = require_string(req, "session_id");
  std::shared_ptr<Session> session;
  {
    std::lock_guard lk(mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw RequestError("unknown_session", "no session '" + id + "'");
    session = std::move(it->second);
    sessions_.erase(it);
  }
  session->shutdown({"close", req, client});
}

void Service::handle(const json& req, const std::shared_ptr<Client>& client) {
  const json id = req.is_object() ? req.value("id", json()) : json();
  try {
    if (!req.is_object()) throw RequestError("bad_request", "request must be a JSON object");
    const auto pv = req.find("proto_version");
    if (pv == req.end() || !pv->is_number_integer() || pv->get<int>() != kProtoVersion) {
      throw RequestError("unsupported_proto_version", "proto_version must be " + std::to_string(kProtoVersion),
                         {{"proto_version", kProtoVersion}});
    }
    std::string op = require_string(req, "op");
    if (op == "update_params") op = "patch";

    if (op == "health") return client->send(ok(id, health()));
    if (op == "schema") {
      if (req.contains("experiment")) {
        return client->send(ok(id, schema::describe(schema::find_experiment(require_string(req, "experiment")))));
      }
      return client->send(ok(id, {{"experiments", schema::describe_all()}}));
    }
    if (op == "create") return create(req, client);
    if (op == "close") return close(req, client);
    if (op == "status") return client->send(ok(id, find(require_string(req, "session_id"))->status()));

    static const std::vector<std::string> session_ops{"patch", "run", "pause", "step", "subscribe", "unsubscribe", "cadence"};
    if (std::find(session_ops.begin(), session_ops.end(), op) == session_ops.end()) {
      throw RequestError("unknown_op", "unknown op '" + op + "'");
    }
    find(require_string(req, "session_id"))->post({op, req, client});
  } catch (const std::exception& e) {
    client->send(failure(id, e));
  }
}

}  // namespace lab::live
