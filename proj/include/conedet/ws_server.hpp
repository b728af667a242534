#pragma once

#include <functional>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

namespace conedet::mission {

/// WebSocket endpoint at /ws on its own I/O thread. Each text message is
/// parsed as JSON and passed to the handler; the handler's reply goes back
/// to the sender. broadcast() never blocks the caller: each client has a
/// bounded outbox and stale frames are dropped.
class TelemetryServer {
 public:
  using Handler = std::function<nlohmann::json(const nlohmann::json&)>;

  /// Port 0 picks a free port.
  TelemetryServer(unsigned short port, Handler handler, std::string address = "127.0.0.1");
  ~TelemetryServer();
  TelemetryServer(const TelemetryServer&) = delete;
  TelemetryServer& operator=(const TelemetryServer&) = delete;

  void broadcast(const std::string& text);
  unsigned short port() const;
  std::size_t client_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace conedet::mission
