#include <chrono>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <gtest/gtest.h>

#include "conedet/mission.hpp"
#include "conedet/ws_server.hpp"

using namespace conedet;
using namespace conedet::mission;
namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

struct Client {
  net::io_context io;
  websocket::stream<tcp::socket> ws{io};

  explicit Client(unsigned short port, const std::string& target = "/ws") {
    tcp::resolver resolver(io);
    net::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws.handshake("127.0.0.1:" + std::to_string(port), target);
  }

  void send(const nlohmann::json& j) { ws.write(net::buffer(j.dump())); }

  nlohmann::json receive() {
    beast::flat_buffer buf;
    ws.read(buf);
    return nlohmann::json::parse(beast::buffers_to_string(buf.data()));
  }

  // Next message of the given type, skipping others.
  nlohmann::json receive_type(const std::string& type) {
    for (int i = 0; i < 100; ++i) {
      auto j = receive();
      if (j.value("type", std::string()) == type) return j;
    }
    throw std::runtime_error("no " + type + " message");
  }
};

bool wait_for_clients(const TelemetryServer& s, std::size_t n) {
  for (int i = 0; i < 200; ++i) {
    if (s.client_count() >= n) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return false;
}

MissionConfig colour_mission() {
  MissionConfig cfg;
  cfg.classifier.kind = "colour";
  cfg.classifier.threshold = cfg.classifier.prefilter.colour.threshold;
  cfg.scenario.objects = {sim::make_cone({10.0, 0.0})};
  return cfg;
}

}  // namespace

TEST(TelemetryServer, CommandsAckedAndErrorsReported) {
  MissionConfig cfg = colour_mission();
  Mission mission(cfg, make_classifier(cfg.classifier, nullptr));
  TelemetryServer server(0, [&](const nlohmann::json& m) { return mission.submit(m); });
  ASSERT_GT(server.port(), 0);
  Client c(server.port());

  c.send({{"type", "command"}, {"name", "set_mode"}, {"mode", "manual"}, {"id", "a1"}});
  auto ack = c.receive();
  EXPECT_EQ(ack["type"], "ack");
  EXPECT_EQ(ack["name"], "set_mode");
  EXPECT_EQ(ack["id"], "a1");

  c.send({{"type", "command"}, {"name", "self_destruct"}});
  auto err = c.receive();
  EXPECT_EQ(err["type"], "error");
  EXPECT_FALSE(err["message"].get<std::string>().empty());

  c.ws.write(net::buffer(std::string("{not json")));
  EXPECT_EQ(c.receive()["type"], "error");

  const TelemetryFrame f = mission.tick();
  EXPECT_EQ(f.mode, MissionMode::manual);
}

TEST(TelemetryServer, BroadcastsTelemetry) {
  MissionConfig cfg = colour_mission();
  Mission mission(cfg, make_classifier(cfg.classifier, nullptr));
  TelemetryServer server(0, [&](const nlohmann::json& m) { return mission.submit(m); });
  Client a(server.port()), b(server.port());
  ASSERT_TRUE(wait_for_clients(server, 2));
  for (int i = 0; i < 3; ++i) server.broadcast(to_json(mission.tick()).dump());
  for (Client* c : {&a, &b}) {
    const auto t = c->receive_type("telemetry");
    EXPECT_TRUE(t.contains("pose"));
    EXPECT_TRUE(t.contains("planned_path"));
    EXPECT_GT(t["t"].get<double>(), 0.0);
  }
}

TEST(TelemetryServer, SlowClientDoesNotBlockBroadcast) {
  TelemetryServer server(0, [](const nlohmann::json&) { return nlohmann::json{{"type", "ack"}}; });
  Client c(server.port());
  ASSERT_TRUE(wait_for_clients(server, 1));
  const std::string big(200000, 'x');
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 200; ++i) server.broadcast(nlohmann::json{{"type", "telemetry"}, {"i", i}, {"pad", big}}.dump());
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(2));
  // Oldest frames were dropped; the stream still ends with the latest one.
  int last = -1;
  for (int n = 0; n < 200 && last != 199; ++n) last = c.receive()["i"].get<int>();
  EXPECT_EQ(last, 199);
}

TEST(TelemetryServer, OtherTargetsRejected) {
  TelemetryServer server(0, [](const nlohmann::json&) { return nlohmann::json{{"type", "ack"}}; });
  EXPECT_THROW(Client(server.port(), "/telemetry"), boost::system::system_error);

  net::io_context io;
  tcp::socket sock(io);
  tcp::resolver resolver(io);
  net::connect(sock, resolver.resolve("127.0.0.1", std::to_string(server.port())));
  http::request<http::empty_body> req{http::verb::get, "/", 11};
  req.set(http::field::host, "127.0.0.1");
  http::write(sock, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(sock, buf, res);
  EXPECT_EQ(res.result(), http::status::not_found);
}
