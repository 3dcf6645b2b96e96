#pragma once

// HTTP + WebSocket front end for a Session, on Boost.Beast. One io_context
// thread serves every connection asynchronously. Upgrades on /api/telemetry
// become telemetry streams; every other request goes to handle_api().

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <thread>

#include "dafjam/control/api.hpp"
#include "dafjam/control/session.hpp"

namespace dafjam::control {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace detail {

/// Pushes telemetry frames to one WebSocket client. Frames are pulled from
/// the session's bounded subscription on a short timer; an overflowed
/// subscription closes the socket with SubscriberOverflow.
class TelemetrySocket : public std::enable_shared_from_this<TelemetrySocket> {
 public:
  TelemetrySocket(tcp::socket socket, std::shared_ptr<TelemetrySubscription> sub)
      : ws_(std::move(socket)), timer_(ws_.get_executor()), sub_(std::move(sub)) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::decorator([](websocket::response_type& res) {
      res.set(http::field::server, "dafjam");
    }));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return self->shutdown();
      self->read_loop();
      self->poll();
    });
  }

 private:
  void read_loop() {
    ws_.async_read(in_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->shutdown();
      self->in_.consume(self->in_.size());
      self->read_loop();
    });
  }

  void poll() {
    if (closed_) return;
    if (sub_->overflowed()) {
      closed_ = true;
      sub_->close();
      ws_.async_close(websocket::close_reason(websocket::close_code::policy_error, "SubscriberOverflow"),
                      [self = shared_from_this()](beast::error_code) {});
      return;
    }
    if (sub_->closed()) {
      closed_ = true;
      ws_.async_close(websocket::close_code::going_away, [self = shared_from_this()](beast::error_code) {});
      return;
    }
    if (!writing_) {
      while (auto frame = sub_->try_pop()) outbox_.push_back(to_json(*frame).dump());
      write_next();
    }
    timer_.expires_after(std::chrono::milliseconds(10));
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (!ec) self->poll();
    });
  }

  void write_next() {
    if (writing_ || outbox_.empty() || closed_) return;
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      self->writing_ = false;
                      if (ec) return self->shutdown();
                      self->outbox_.pop_front();
                      self->write_next();
                    });
  }

  void shutdown() {
    closed_ = true;
    sub_->close();
    timer_.cancel();
  }

  websocket::stream<beast::tcp_stream> ws_;
  net::steady_timer timer_;
  std::shared_ptr<TelemetrySubscription> sub_;
  beast::flat_buffer in_;
  std::deque<std::string> outbox_;
  bool writing_ = false;
  bool closed_ = false;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket socket, Session& session)
      : stream_(std::move(socket)), session_(session) {}

  void run() { read(); }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (ec) return self->close();
                       self->handle();
                     });
  }

  void handle() {
    if (websocket::is_upgrade(req_)) {
      if (req_.target() == "/api/telemetry") {
        stream_.expires_never();
        std::make_shared<TelemetrySocket>(stream_.release_socket(), session_.subscribe())
            ->run(std::move(req_));
        return;
      }
    }

    ApiResponse api;
    if (req_.target() == "/api/telemetry") {
      api = {426, error_body("upgrade", "websocket required")};
    } else {
      api = handle_api(session_, std::string_view(req_.method_string().data(), req_.method_string().size()),
                       std::string_view(req_.target().data(), req_.target().size()), req_.body());
    }

    auto res = std::make_shared<http::response<http::string_body>>(
        static_cast<http::status>(api.status), req_.version());
    res->set(http::field::server, "dafjam");
    res->set(http::field::content_type, "application/json");
    res->keep_alive(req_.keep_alive());
    res->body() = api.body.dump();
    res->prepare_payload();

    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
                        if (ec || !res->keep_alive()) return self->close();
                        self->read();
                      });
  }

  void close() {
    beast::error_code ec;
    stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  Session& session_;
};

}  // namespace detail

class ControlServer {
 public:
  /// Binds immediately; port 0 picks an ephemeral port.
  ControlServer(Session& session, const std::string& address, unsigned short port)
      : session_(session), acceptor_(ioc_) {
    const tcp::endpoint ep(net::ip::make_address(address), port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen(net::socket_base::max_listen_connections);
    port_ = acceptor_.local_endpoint().port();
  }

  ControlServer(const ControlServer&) = delete;
  ControlServer& operator=(const ControlServer&) = delete;

  ~ControlServer() { stop(); }

  unsigned short port() const { return port_; }

  /// Serves on the calling thread until stop().
  void run() {
    accept();
    ioc_.run();
  }

  /// Serves on a background thread.
  void start() {
    accept();
    thread_ = std::thread([this] { ioc_.run(); });
  }

  void stop() {
    if (stopped_.exchange(true)) return;
    net::post(ioc_, [this] {
      beast::error_code ec;
      acceptor_.close(ec);
    });
    ioc_.stop();
    if (thread_.joinable()) thread_.join();
  }

 private:
  void accept() {
    acceptor_.async_accept(net::make_strand(ioc_), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<detail::HttpConnection>(std::move(socket), session_)->run();
      accept();
    });
  }

  Session& session_;
  net::io_context ioc_{1};
  tcp::acceptor acceptor_;
  unsigned short port_ = 0;
  std::thread thread_;
  std::atomic<bool> stopped_{false};
};

}  // namespace dafjam::control
