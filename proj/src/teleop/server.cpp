#include "skidsim/teleop/server.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <system_error>
#include <thread>

#include "json.hpp"
#include "skidsim/teleop/queue.hpp"

namespace skidsim::teleop {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

struct Inbound {
  std::uint64_t connection = 0;
  Message message;
};

// Either a broadcast (to unset) or a reply to one connection.
struct Outbound {
  std::optional<std::uint64_t> to;
  std::shared_ptr<const std::string> text;
};

constexpr std::size_t kMaxPendingWrites = 64;

}  // namespace

class WsConnection;

struct TeleopServer::Impl {
  Impl(ScenarioConfig config, ServerOptions opts)
      : options(std::move(opts)), session(std::move(config), options.session) {}

  ServerOptions options;
  TeleopSession session;

  asio::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::thread io_thread;
  std::thread sim_thread;

  MessageQueue<Inbound> inbound;
  MessageQueue<Outbound> outbound;

  // io thread only
  std::map<std::uint64_t, std::shared_ptr<WsConnection>> connections_by_id;
  std::optional<std::uint64_t> authority;
  std::uint64_t next_id = 1;

  std::atomic<double> t_sim{0.0};
  std::atomic<std::size_t> connection_count{0};
  std::atomic<std::uint64_t> protocol_errors{0};
  std::atomic<bool> running{false};
  std::mutex stop_mutex;
  std::condition_variable stop_cv;
  bool stopping = false;

  void do_accept();
  void on_open(const std::shared_ptr<WsConnection>& conn);
  void on_close(std::uint64_t id);
  void on_message(std::uint64_t id, const std::string& text);
  void send_to(std::uint64_t id, std::shared_ptr<const std::string> text);
  void flush_outbound();
  HelloMessage hello_for(std::uint64_t id) const;
  void sim_loop();
};

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket&& socket, TeleopServer::Impl& server, std::uint64_t id)
      : ws_(std::move(socket)), server_(server), id_(id) {}

  std::uint64_t id() const { return id_; }

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsConnection::on_accept, shared_from_this()));
  }

  void send(std::shared_ptr<const std::string> text) {
    if (closed_) return;
    if (pending_.size() >= kMaxPendingWrites) pending_.erase(pending_.begin() + 1);
    pending_.push_back(std::move(text));
    if (pending_.size() == 1) do_write();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    ws_.async_close(websocket::close_code::going_away,
                    [self = shared_from_this()](beast::error_code) {});
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    ws_.text(true);
    server_.on_open(shared_from_this());
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;
      server_.on_close(id_);
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    server_.on_message(id_, text);
    do_read();
  }

  void do_write() {
    ws_.async_write(asio::buffer(*pending_.front()),
                    beast::bind_front_handler(&WsConnection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;
      server_.on_close(id_);
      return;
    }
    pending_.pop_front();
    if (!pending_.empty() && !closed_) do_write();
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> pending_;
  TeleopServer::Impl& server_;
  std::uint64_t id_;
  bool closed_ = false;
};

namespace {

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket&& socket, TeleopServer::Impl& server)
      : stream_(std::move(socket)), server_(server) {}

  void run() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     beast::bind_front_handler(&HttpConnection::on_read, shared_from_this()));
  }

 private:
  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    if (websocket::is_upgrade(req_) && req_.target() == "/ws") {
      stream_.expires_never();
      const std::uint64_t id = server_.next_id++;
      std::make_shared<WsConnection>(stream_.release_socket(), server_, id)->run(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>();
    res->version(req_.version());
    res->keep_alive(false);
    if (req_.method() == http::verb::get && req_.target() == "/healthz") {
      const nlohmann::json body = {{"t_sim", server_.t_sim.load()},
                                   {"connections", server_.connection_count.load()},
                                   {"protocol_errors", server_.protocol_errors.load()}};
      res->result(http::status::ok);
      res->set(http::field::content_type, "application/json");
      res->body() = body.dump();
    } else {
      res->result(http::status::not_found);
      res->set(http::field::content_type, "text/plain");
      res->body() = "not found; endpoints are /ws (WebSocket) and /healthz\n";
    }
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  TeleopServer::Impl& server_;
};

}  // namespace

void TeleopServer::Impl::do_accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<HttpConnection>(std::move(socket), *this)->run();
    do_accept();
  });
}

HelloMessage TeleopServer::Impl::hello_for(std::uint64_t id) const {
  HelloMessage hello;
  hello.authority = authority == id;
  hello.connection_id = id;
  hello.broadcast_hz = options.session.broadcast_hz;
  hello.max_speed = options.session.max_speed;
  for (const auto& t : builtin_terrains()) hello.terrains.push_back(t.name);
  return hello;
}

void TeleopServer::Impl::on_open(const std::shared_ptr<WsConnection>& conn) {
  connections_by_id[conn->id()] = conn;
  connection_count = connections_by_id.size();
  if (!authority) authority = conn->id();
  spdlog::info("connection {} opened ({})", conn->id(),
               authority == conn->id() ? "authority" : "observer");
  conn->send(std::make_shared<const std::string>(encode(hello_for(conn->id()))));
}

void TeleopServer::Impl::on_close(std::uint64_t id) {
  if (connections_by_id.erase(id) == 0) return;
  connection_count = connections_by_id.size();
  spdlog::info("connection {} closed", id);
  if (authority == id) {
    authority.reset();
    if (!connections_by_id.empty()) {
      const auto& [next, conn] = *connections_by_id.begin();
      authority = next;
      conn->send(std::make_shared<const std::string>(encode(hello_for(next))));
    }
  }
}

void TeleopServer::Impl::send_to(std::uint64_t id, std::shared_ptr<const std::string> text) {
  if (const auto it = connections_by_id.find(id); it != connections_by_id.end()) {
    it->second->send(std::move(text));
  }
}

void TeleopServer::Impl::on_message(std::uint64_t id, const std::string& text) {
  Message message;
  try {
    message = decode(text);
  } catch (const ProtocolError& e) {
    ++protocol_errors;
    spdlog::debug("connection {}: dropped malformed frame: {}", id, e.what());
    send_to(id, std::make_shared<const std::string>(encode(ErrorMessage{"malformed", e.what()})));
    return;
  }
  if (!std::holds_alternative<CommandMessage>(message) &&
      !std::holds_alternative<ReleaseMessage>(message)) {
    send_to(id, std::make_shared<const std::string>(encode(
                    ErrorMessage{"unsupported", "clients may send only command and release"})));
    return;
  }
  if (authority != id) {
    send_to(id, std::make_shared<const std::string>(encode(ErrorMessage{
                    "not_authority", "this connection is an observer; commands are rejected"})));
    return;
  }
  inbound.push(Inbound{id, std::move(message)});
}

void TeleopServer::Impl::flush_outbound() {
  for (auto& out : outbound.drain()) {
    if (out.to) {
      send_to(*out.to, out.text);
    } else {
      for (auto& [id, conn] : connections_by_id) conn->send(out.text);
    }
  }
}

void TeleopServer::Impl::sim_loop() {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration<double>(session.period());
  const auto start = clock::now();
  std::uint64_t k = 0;
  std::unique_lock lock(stop_mutex);
  while (!stopping) {
    lock.unlock();
    for (auto& in : inbound.drain()) {
      if (auto err = session.apply(in.message)) {
        outbound.push(Outbound{in.connection, std::make_shared<const std::string>(encode(*err))});
        asio::post(ioc, [this] { flush_outbound(); });
      }
    }
    session.tick();
    ++k;
    t_sim = session.t_sim();
    if (k % static_cast<std::uint64_t>(session.ticks_per_broadcast()) == 0) {
      outbound.push(Outbound{std::nullopt, std::make_shared<const std::string>(
                                               encode(session.snapshot()))});
      asio::post(ioc, [this] { flush_outbound(); });
    }
    const auto deadline =
        start + std::chrono::duration_cast<clock::duration>(period * static_cast<double>(k));
    lock.lock();
    stop_cv.wait_until(lock, deadline, [this] { return stopping; });
  }
}

TeleopServer::TeleopServer(ScenarioConfig config, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(options))) {}

TeleopServer::~TeleopServer() { stop(); }

void TeleopServer::start() {
  Impl& s = *impl_;
  if (s.running) return;
  try {
    const tcp::endpoint endpoint(asio::ip::make_address(s.options.address), s.options.port);
    s.acceptor.open(endpoint.protocol());
    s.acceptor.set_option(asio::socket_base::reuse_address(true));
    s.acceptor.bind(endpoint);
    s.acceptor.listen();
  } catch (const boost::system::system_error& e) {
    beast::error_code ignored;
    s.acceptor.close(ignored);
    throw std::system_error(e.code().value(), std::generic_category(),
                            fmt::format("{}:{}: {}", s.options.address, s.options.port, e.what()));
  }
  s.do_accept();
  s.running = true;
  s.io_thread = std::thread([&s] { s.ioc.run(); });
  s.sim_thread = std::thread([&s] { s.sim_loop(); });
  spdlog::info("teleop server listening on {}:{}", s.options.address, port());
}

void TeleopServer::stop() {
  Impl& s = *impl_;
  if (!s.running.exchange(false)) return;
  {
    std::lock_guard lock(s.stop_mutex);
    s.stopping = true;
  }
  s.stop_cv.notify_all();
  s.sim_thread.join();
  asio::post(s.ioc, [&s] {
    beast::error_code ignored;
    s.acceptor.close(ignored);
    for (auto& [id, conn] : s.connections_by_id) conn->close();
  });
  // Give close handshakes a moment, then tear down whatever is left.
  auto timer = std::make_shared<asio::steady_timer>(s.ioc, std::chrono::milliseconds(200));
  timer->async_wait([&s, timer](beast::error_code) { s.ioc.stop(); });
  s.io_thread.join();
  s.connections_by_id.clear();
  s.connection_count = 0;
}

void TeleopServer::wait() {
  std::unique_lock lock(impl_->stop_mutex);
  impl_->stop_cv.wait(lock, [this] { return impl_->stopping; });
}

unsigned short TeleopServer::port() const {
  beast::error_code ec;
  const auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? impl_->options.port : ep.port();
}

double TeleopServer::t_sim() const { return impl_->t_sim.load(); }
std::size_t TeleopServer::connections() const { return impl_->connection_count.load(); }
std::uint64_t TeleopServer::protocol_errors() const { return impl_->protocol_errors.load(); }

}  // namespace skidsim::teleop
