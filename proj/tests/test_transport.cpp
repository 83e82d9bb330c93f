#include "doctest.h"

#include <thread>

#include "lab/transport.hpp"

using namespace lab::live;
using namespace std::chrono_literals;

namespace {

json request(const std::string& op, json body = json::object(), int id = 1) {
  body["proto_version"] = kProtoVersion;
  body["op"] = op;
  body["id"] = id;
  return body;
}

json response(TcpClient& c, int id) {
  for (int i = 0; i < 1000; ++i) {
    auto m = c.receive(5s);
    REQUIRE(m.has_value());
    if ((*m)["type"] == "response" && (*m)["id"] == id) return *m;
  }
  FAIL("no response");
  return {};
}

}  // namespace

TEST_CASE("framing: 4-byte big-endian length prefix") {
  const auto bytes = encode_message(json{{"a", 1}});
  CHECK(bytes == std::string("\x00\x00\x00\x07{\"a\":1}", 11));
}

TEST_CASE("decoder reassembles split and coalesced messages") {
  MessageDecoder d(1024);
  const auto a = encode_message(json{{"x", 1}}), b = encode_message(json{{"y", "two"}});
  const std::string both = a + b;
  for (char ch : both.substr(0, 5)) d.feed(std::string_view(&ch, 1));
  CHECK_FALSE(d.next().has_value());
  d.feed(both.substr(5));
  CHECK(json::parse(*d.next()) == json{{"x", 1}});
  CHECK(json::parse(*d.next()) == json{{"y", "two"}});
  CHECK_FALSE(d.next().has_value());
  MessageDecoder small(4);
  small.feed(encode_message(json{{"long", "message"}}));
  CHECK_THROWS_AS(small.next(), ProtocolError);
}

TEST_CASE("socket round trip: create, subscribe, step, reconnect") {
  Service svc;
  TcpServer server(svc, "127.0.0.1", 0);
  server.start();
  REQUIRE(server.port() > 0);

  std::string id;
  {
    TcpClient c("127.0.0.1", server.port());
    c.send(request("health"));
    CHECK(response(c, 1)["result"]["sessions"]["total"] == 0);
    c.send(request("create", {{"experiment", "lorenz"}, {"cadence", {{"steps", 2}}}}, 2));
    id = response(c, 2)["result"]["session_id"];
    c.send(request("subscribe", {{"session_id", id}}, 3));
    response(c, 3);
    c.send(request("step", {{"session_id", id}, {"n", 6}}, 4));
    std::vector<std::uint64_t> steps;
    for (;;) {
      auto m = c.receive(5s);
      REQUIRE(m.has_value());
      if ((*m)["type"] == "frame") steps.push_back((*m)["step"]);
      if ((*m)["type"] == "response") {
        CHECK((*m)["result"]["advanced"] == 6);
        break;
      }
    }
    CHECK(steps == std::vector<std::uint64_t>{2, 4, 6});
  }

  // The session survives the disconnect; resume after step 2.
  TcpClient again("127.0.0.1", server.port());
  again.send(request("subscribe", {{"session_id", id}, {"from_step", 2}}, 5));
  CHECK(response(again, 5)["result"]["replayed"] == 2);
  std::vector<std::uint64_t> steps;
  for (int i = 0; i < 2; ++i) steps.push_back((*again.receive(5s))["step"]);
  CHECK(steps == std::vector<std::uint64_t>{4, 6});
  again.send(request("close", {{"session_id", id}}, 6));
  CHECK(response(again, 6)["ok"] == true);
  server.stop();
}

TEST_CASE("malformed JSON gets an error and the connection stays usable") {
  Service svc;
  TcpServer server(svc, "127.0.0.1", 0);
  server.start();
  TcpClient c("127.0.0.1", server.port());
  const std::string junk = "{nope";
  c.send_raw(std::string("\x00\x00\x00\x05", 4) + junk);
  auto m = c.receive(5s);
  REQUIRE(m.has_value());
  CHECK((*m)["error"]["code"] == "bad_request");
  c.send(request("health", json::object(), 9));
  CHECK(response(c, 9)["ok"] == true);
}

TEST_CASE("oversized messages close the connection") {
  ServerConfig cfg;
  cfg.max_message_bytes = 64;
  Service svc(cfg);
  TcpServer server(svc, "127.0.0.1", 0);
  server.start();
  TcpClient c("127.0.0.1", server.port());
  c.send(request("schema", {{"pad", std::string(200, 'x')}}));
  auto m = c.receive(5s);
  REQUIRE(m.has_value());
  CHECK((*m)["error"]["code"] == "message_too_large");
  CHECK_FALSE(c.receive(2s).has_value());
  for (int i = 0; i < 100 && server.open_connections() > 0; ++i) std::this_thread::sleep_for(10ms);
  CHECK(server.open_connections() == 0);
}

TEST_CASE("disconnecting drops the connection's subscriptions") {
  Service svc;
  TcpServer server(svc, "127.0.0.1", 0);
  server.start();
  TcpClient owner("127.0.0.1", server.port());
  owner.send(request("create", {{"experiment", "henon"}}, 1));
  const std::string id = response(owner, 1)["result"]["session_id"];
  {
    TcpClient watcher("127.0.0.1", server.port());
    watcher.send(request("subscribe", {{"session_id", id}}, 2));
    response(watcher, 2);
  }
  for (int i = 0; i < 100 && server.open_connections() > 1; ++i) std::this_thread::sleep_for(10ms);
  CHECK(server.open_connections() == 1);
  owner.send(request("step", {{"session_id", id}, {"n", 10}}, 3));
  CHECK(response(owner, 3)["result"]["advanced"] == 10);
}
