// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctsdr/server.hpp"

#include "ctsdr/drill_sim.hpp"
#include "ctsdr/error.hpp"
#include "ctsdr/json_io.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <deque>
#include <map>
#include <mutex>
#include <regex>
#include <thread>

namespace ctsdr {

namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

constexpr std::size_t kMaxQueuedMessages = 4096;

class Closable {
 public:
  virtual ~Closable() = default;
  virtual void close() = 0;
};

class WsConnection;

struct LiveSession {
  LiveSession(net::io_context& ioc, Session s) : session(std::move(s)), timer(ioc) {}
  Session session;
  std::vector<std::weak_ptr<WsConnection>> subscribers;
  net::steady_timer timer;
  bool ticking = false;
  std::chrono::steady_clock::time_point next_tick;
};

struct Hub {
  Hub(net::io_context& ioc, const ServerOptions& options) : ioc(ioc), options(options) {}

  std::shared_ptr<LiveSession> get(const std::string& id) {
    auto it = sessions.find(id);
    if (it != sessions.end()) return it->second;
    auto live = std::make_shared<LiveSession>(ioc, Session(id, options.config, options.session));
    sessions.emplace(id, live);
    return live;
  }

  void track(const std::shared_ptr<Closable>& c) {
    std::erase_if(connections, [](const auto& w) { return w.expired(); });
    connections.push_back(c);
  }

  void broadcast(LiveSession& live, const std::vector<Json>& messages);
  void start_ticking(const std::shared_ptr<LiveSession>& live);

  void shutdown() {
    stopping = true;
    for (auto& [id, live] : sessions) live->timer.cancel();
    for (auto& w : connections) {
      if (auto c = w.lock()) c->close();
    }
  }

  net::io_context& ioc;
  const ServerOptions& options;
  std::map<std::string, std::shared_ptr<LiveSession>> sessions;
  std::vector<std::weak_ptr<Closable>> connections;
  bool stopping = false;
};

class WsConnection : public Closable, public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket socket, Hub& hub, std::shared_ptr<LiveSession> live)
      : ws_(std::move(socket)), hub_(hub), live_(std::move(live)) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

  void send(std::shared_ptr<const std::string> line) {
    if (closed_) return;
    if (queue_.size() >= kMaxQueuedMessages) {
      close();
      return;
    }
    queue_.push_back(std::move(line));
    if (queue_.size() == 1) do_write();
  }

  void close() override {
    if (closed_) return;
    closed_ = true;
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ignored);
    beast::get_lowest_layer(ws_).socket().close(ignored);
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec || hub_.stopping) return close();
    live_->subscribers.push_back(weak_from_this());
    hub_.broadcast(*live_, live_->session.handle_message(Json{{"v", kProtocolVersion}, {"kind", "state"}}));
    hub_.start_ticking(live_);
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) return close();
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      std::string_view line(text.data() + start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!line.empty()) hub_.broadcast(*live_, live_->session.handle_line(line));
      start = end + 1;
    }
    do_read();
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(net::buffer(*queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_write(ec); });
  }

  void on_write(beast::error_code ec) {
    if (ec) return close();
    queue_.pop_front();
    if (!queue_.empty()) do_write();
  }

  websocket::stream<beast::tcp_stream> ws_;
  Hub& hub_;
  std::shared_ptr<LiveSession> live_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  bool closed_ = false;
};

void Hub::broadcast(LiveSession& live, const std::vector<Json>& messages) {
  std::erase_if(live.subscribers, [](const auto& w) { return w.expired(); });
  for (const auto& m : messages) {
    auto line = std::make_shared<const std::string>(to_wire(m) + "\n");
    for (auto& w : live.subscribers) {
      if (auto c = w.lock()) c->send(line);
    }
  }
}

void Hub::start_ticking(const std::shared_ptr<LiveSession>& live) {
  if (live->ticking || stopping) return;
  live->ticking = true;
  const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / options.session.tick_rate));
  live->next_tick = std::chrono::steady_clock::now() + period;

  struct Ticker {
    Hub* hub;
    std::shared_ptr<LiveSession> live;
    std::chrono::steady_clock::duration period;
    void operator()(beast::error_code ec) const {
      std::erase_if(live->subscribers, [](const auto& w) { return w.expired(); });
      if (ec || hub->stopping || live->subscribers.empty()) {
        live->ticking = false;
        return;
      }
      hub->broadcast(*live, live->session.tick());
      live->next_tick += period;
      const auto now = std::chrono::steady_clock::now();
      if (live->next_tick + std::chrono::seconds(1) < now) live->next_tick = now;
      live->timer.expires_at(live->next_tick);
      live->timer.async_wait(*this);
    }
  };
  live->timer.expires_at(live->next_tick);
  live->timer.async_wait(Ticker{this, live, period});
}

class HttpConnection : public Closable, public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket socket, Hub& hub) : stream_(std::move(socket)), hub_(hub) {}

  void run() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void close() override {
    beast::error_code ignored;
    stream_.socket().shutdown(tcp::socket::shutdown_both, ignored);
    stream_.socket().close(ignored);
  }

 private:
  void on_read(beast::error_code ec) {
    if (ec) return close();
    const std::string target(req_.target());
    if (websocket::is_upgrade(req_)) {
      static const std::regex route("^/session/([A-Za-z0-9_-]{1,64})$");
      std::smatch m;
      if (std::regex_match(target, m, route)) {
        stream_.expires_never();
        auto ws = std::make_shared<WsConnection>(stream_.release_socket(), hub_, hub_.get(m[1].str()));
        hub_.track(ws);
        ws->run(std::move(req_));
        return;
      }
      return respond(http::status::not_found, Json{{"error", "unknown websocket route"}});
    }
    if (req_.method() != http::verb::get) {
      return respond(http::status::method_not_allowed, Json{{"error", "only GET is supported"}});
    }
    if (target == "/health") {
      return respond(http::status::ok, Json{{"status", "ok"},
                                            {"protocol", kProtocolVersion},
                                            {"sessions", hub_.sessions.size()},
                                            {"tick_rate", hub_.options.session.tick_rate}});
    }
    if (target == "/scenarios") {
      Json list = Json::array();
      for (const auto& s : builtin_scenarios(hub_.options.config)) {
        list.push_back({{"name", s.name}, {"description", s.description}});
      }
      return respond(http::status::ok, Json{{"scenarios", list}});
    }
    respond(http::status::not_found, Json{{"error", "not found"}});
  }

  void respond(http::status status, const Json& body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::server, "ctsdr");
    res->set(http::field::content_type, "application/json");
    res->keep_alive(false);
    res->body() = body.dump() + "\n";
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      self->close();
    });
  }

  beast::tcp_stream stream_;
  Hub& hub_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

struct Server::Impl {
  explicit Impl(ServerOptions opts) : options(std::move(opts)), acceptor(ioc), hub(ioc, options) {}

  void do_accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec || hub.stopping) return;
      auto conn = std::make_shared<HttpConnection>(std::move(socket), hub);
      hub.track(conn);
      conn->run();
      do_accept();
    });
  }

  ServerOptions options;
  net::io_context ioc;
  tcp::acceptor acceptor;
  Hub hub;
  std::thread thread;
  unsigned short bound_port = 0;
  bool running = false;
  std::mutex signal_mutex;
  net::io_context* signal_ctx = nullptr;
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  const auto report = validate_config(impl_->options.config);
  if (!report.valid()) {
    throw Error(ErrorCode::MalformedConfig, "invalid config: " + report.violations.front().message);
  }
  if (!(impl_->options.session.tick_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "tick rate must be positive");
}

Server::~Server() { stop(); }

void Server::start() {
  if (impl_->running) return;
  beast::error_code ec;
  const auto address = net::ip::make_address(impl_->options.host, ec);
  if (ec) throw Error(ErrorCode::InvalidArgument, "bad host address '" + impl_->options.host + "'");
  const tcp::endpoint endpoint(address, impl_->options.port);
  auto& acc = impl_->acceptor;
  acc.open(endpoint.protocol(), ec);
  if (!ec) acc.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) acc.bind(endpoint, ec);
  if (!ec) acc.listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot listen on " + impl_->options.host + ":" +
                                         std::to_string(impl_->options.port) + ": " + ec.message());
  impl_->bound_port = acc.local_endpoint().port();
  impl_->running = true;
  impl_->do_accept();
  impl_->thread = std::thread([this] { impl_->ioc.run(); });
}

unsigned short Server::port() const { return impl_->bound_port; }

void Server::stop() {
  if (!impl_ || !impl_->running) return;
  impl_->running = false;
  net::post(impl_->ioc, [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
    impl_->hub.shutdown();
  });
  if (impl_->thread.joinable()) impl_->thread.join();
  std::lock_guard lock(impl_->signal_mutex);
  if (impl_->signal_ctx != nullptr) impl_->signal_ctx->stop();
}

void Server::wait_for_signal() {
  net::io_context ctx;
  net::signal_set signals(ctx, SIGINT, SIGTERM);
  signals.async_wait([](beast::error_code, int) {});
  {
    std::lock_guard lock(impl_->signal_mutex);
    if (!impl_->running) return;
    impl_->signal_ctx = &ctx;
  }
  ctx.run();
  {
    std::lock_guard lock(impl_->signal_mutex);
    impl_->signal_ctx = nullptr;
  }
  stop();
}

}  // namespace ctsdr
