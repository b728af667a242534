#include "conedet/ws_server.hpp"

#include <atomic>
#include <deque>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace conedet::mission {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

constexpr std::size_t kMaxOutbox = 8;

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket socket, TelemetryServer::Handler& handler) : ws_(std::move(socket)), handler_(handler) {}

  void start() {
    http::async_read(ws_.next_layer(), buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_request(ec); });
  }

  // Called on the I/O thread only.
  void enqueue(std::string text, bool droppable) {
    if (!open_) return;
    if (droppable && outbox_.size() >= kMaxOutbox) {
      // Drop the oldest frame that is not in flight.
      for (auto it = outbox_.begin() + (writing_ ? 1 : 0); it != outbox_.end(); ++it)
        if (it->second) {
          outbox_.erase(it);
          break;
        }
    }
    outbox_.emplace_back(std::move(text), droppable);
    if (!writing_) write_next();
  }

  bool open() const { return open_; }

 private:
  void on_request(beast::error_code ec) {
    if (ec) return;
    if (!websocket::is_upgrade(request_) || request_.target() != "/ws") {
      auto res = std::make_shared<http::response<http::string_body>>(http::status::not_found, request_.version());
      res->set(http::field::content_type, "text/plain");
      res->body() = "websocket endpoint is /ws\n";
      res->prepare_payload();
      http::async_write(ws_.next_layer(), *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
        beast::error_code ignored;
        self->ws_.next_layer().shutdown(tcp::socket::shutdown_both, ignored);
      });
      return;
    }
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(request_, [self = shared_from_this()](beast::error_code ec2) {
      if (ec2) return;
      self->open_ = true;
      self->read_next();
    });
  }

  void read_next() {
    ws_.async_read(in_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      open_ = false;
      return;
    }
    const std::string text = beast::buffers_to_string(in_.data());
    in_.consume(in_.size());
    nlohmann::json reply;
    try {
      reply = handler_(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
      reply = {{"type", "error"}, {"message", std::string("malformed JSON: ") + e.what()}};
    } catch (const std::exception& e) {
      reply = {{"type", "error"}, {"message", e.what()}};
    }
    enqueue(reply.dump(), false);
    read_next();
  }

  void write_next() {
    if (outbox_.empty() || !open_) {
      writing_ = false;
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front().first), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->outbox_.pop_front();
      if (ec) {
        self->open_ = false;
        self->writing_ = false;
        return;
      }
      self->write_next();
    });
  }

  websocket::stream<tcp::socket> ws_;
  TelemetryServer::Handler& handler_;
  beast::flat_buffer buffer_;
  beast::flat_buffer in_;
  http::request<http::string_body> request_;
  std::deque<std::pair<std::string, bool>> outbox_;
  bool writing_ = false;
  std::atomic<bool> open_{false};
};

}  // namespace

struct TelemetryServer::Impl {
  net::io_context io{1};
  tcp::acceptor acceptor{io};
  Handler handler;
  std::mutex sessions_mutex;
  std::vector<std::weak_ptr<Session>> sessions;
  std::thread thread;

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      auto s = std::make_shared<Session>(std::move(socket), handler);
      {
        std::lock_guard lock(sessions_mutex);
        sessions.push_back(s);
      }
      s->start();
      accept();
    });
  }
};

TelemetryServer::TelemetryServer(unsigned short port, Handler handler, std::string address) : impl_(std::make_unique<Impl>()) {
  impl_->handler = std::move(handler);
  const tcp::endpoint ep(net::ip::make_address(address), port);
  impl_->acceptor.open(ep.protocol());
  impl_->acceptor.set_option(net::socket_base::reuse_address(true));
  impl_->acceptor.bind(ep);
  impl_->acceptor.listen();
  impl_->accept();
  impl_->thread = std::thread([this] { impl_->io.run(); });
}

TelemetryServer::~TelemetryServer() {
  net::post(impl_->io, [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
  });
  impl_->io.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void TelemetryServer::broadcast(const std::string& text) {
  std::vector<std::shared_ptr<Session>> live;
  {
    std::lock_guard lock(impl_->sessions_mutex);
    auto& v = impl_->sessions;
    v.erase(std::remove_if(v.begin(), v.end(), [](const std::weak_ptr<Session>& w) { return w.expired(); }), v.end());
    for (auto& w : v)
      if (auto s = w.lock()) live.push_back(std::move(s));
  }
  auto msg = std::make_shared<const std::string>(text);
  for (auto& s : live) net::post(impl_->io, [s, msg] { s->enqueue(*msg, true); });
}

unsigned short TelemetryServer::port() const { return impl_->acceptor.local_endpoint().port(); }

std::size_t TelemetryServer::client_count() const {
  std::lock_guard lock(impl_->sessions_mutex);
  std::size_t n = 0;
  for (const auto& w : impl_->sessions)
    if (auto s = w.lock(); s && s->open()) ++n;
  return n;
}

}  // namespace conedet::mission
