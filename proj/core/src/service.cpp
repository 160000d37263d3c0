#include "callassist/service.hpp"

#include <boost/asio.hpp>

#include <atomic>
#include <condition_variable>
#include <optional>
#include <cstdlib>
#include <istream>
#include <map>
#include <mutex>
#include <thread>

#include "callassist/errors.hpp"

namespace callassist {

namespace asio = boost::asio;
using tcp = asio::ip::tcp;

ListenAddress parse_listen(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon + 1 == text.size()) {
    throw Error(ErrorCode::config, "listen address must be host:port, got '" + text + "'", "listen");
  }
  ListenAddress a;
  a.host = text.substr(0, colon);
  if (a.host.empty()) a.host = "0.0.0.0";
  int port = -1;
  try {
    std::size_t used = 0;
    port = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) port = -1;
  } catch (const std::exception&) {
    port = -1;
  }
  if (port < 0 || port > 65535) throw Error(ErrorCode::config, "bad port in listen address '" + text + "'", "listen");
  a.port = static_cast<std::uint16_t>(port);
  return a;
}

ListenAddress listen_address(const EngineConfig& config) {
  if (const char* env = std::getenv("CALLASSIST_LISTEN"); env && *env) return parse_listen(env);
  return parse_listen(config.listen);
}

Json error_frame(const std::string& session_id, ErrorCode code, const std::string& message) {
  return Json{{"type", "error"},
              {"session_id", session_id},
              {"seq", -1},
              {"t_ms", 0},
              {"payload", Json{{"code", to_string(code)}, {"message", message}}}};
}

// ---------------------------------------------------------------------------

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, SessionManager& manager) : socket_(std::move(socket)), manager_(manager) {}

  void run() {
    asio::streambuf buffer;
    boost::system::error_code ec;
    while (true) {
      asio::read_until(socket_, buffer, '\n', ec);
      if (ec) break;
      std::istream in(&buffer);
      std::string line;
      std::getline(in, line);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      handle(line);
    }
    for (const auto& [session, handle] : subscriptions_) manager_.unsubscribe(session, handle);
    subscriptions_.clear();
    closed_ = true;
  }

  void write(const std::string& frame) {
    std::lock_guard lock(write_mutex_);
    if (closed_) return;
    boost::system::error_code ec;
    asio::write(socket_, asio::buffer(frame + "\n"), ec);
    if (ec) closed_ = true;
  }

  void shutdown() {
    boost::system::error_code ec;
    // shutdown wakes the blocked reader; the socket itself is closed when the connection is destroyed.
    socket_.shutdown(tcp::socket::shutdown_both, ec);
  }

 private:
  void reply(const Json& frame) { write(canonical_dump(frame)); }

  void subscribe(const std::string& session_id, std::int64_t last_seen_seq) {
    if (subscriptions_.contains(session_id)) return;
    std::weak_ptr<Connection> self = weak_from_this();
    const auto handle = manager_.subscribe(session_id, last_seen_seq, [self](const std::string& frame) {
      if (auto conn = self.lock()) conn->write(frame);
    });
    subscriptions_[session_id] = handle;
  }

  void handle(const std::string& line) {
    std::string session_id;
    try {
      const Json frame = parse_json(line);
      if (!frame.is_object() || !frame.contains("type") || !frame.at("type").is_string()) {
        throw Error(ErrorCode::parse, "frame needs a string 'type'", "type");
      }
      const std::string type = frame.at("type").get<std::string>();
      session_id = frame.value("session_id", std::string{});
      if (type == "hello") {
        on_hello(frame);
      } else if (type == "subscribe") {
        const std::int64_t last = frame.value("last_seen_seq", std::int64_t{-1});
        if (!manager_.exists(session_id)) throw Error(ErrorCode::unknown_session, "unknown session '" + session_id + "'");
        reply(Json{{"type", "subscribe.ok"}, {"session_id", session_id}});
        subscribe(session_id, last);
      } else if (type == "transcript.event") {
        require_role("driver", type);
        if (!frame.contains("payload")) throw Error(ErrorCode::parse, "missing field 'payload'", "payload");
        manager_.submit_event(parse_event(frame.at("payload")));
        ack(session_id);
      } else if (type == "agent.action") {
        require_role("console", type);
        if (!frame.contains("payload")) throw Error(ErrorCode::parse, "missing field 'payload'", "payload");
        manager_.submit_action(parse_agent_action(frame.at("payload")));
        ack(session_id);
      } else if (type == "journal.fetch") {
        const Journal journal = manager_.journal(session_id);
        for (const auto& entry : journal.entries()) reply(Json{{"type", "journal.entry"}, {"entry", entry}});
        reply(Json{{"type", "journal.end"}, {"session_id", session_id}, {"count", journal.entries().size()}});
      } else {
        throw Error(ErrorCode::parse, "unknown frame type '" + type + "'", "type");
      }
    } catch (const Error& e) {
      reply(error_frame(session_id, e.code(), e.what()));
    } catch (const Json::exception& e) {
      reply(error_frame(session_id, ErrorCode::parse, e.what()));
    }
  }

  void on_hello(const Json& frame) {
    const std::string role = frame.value("role", std::string{});
    if (role != "driver" && role != "console") throw Error(ErrorCode::parse, "role must be driver or console", "role");
    const std::string session_id = frame.value("session_id", std::string{});
    if (session_id.empty()) throw Error(ErrorCode::parse, "hello needs a session_id", "session_id");
    if (frame.value("create", false)) {
      manager_.open(SessionId(session_id), frame.value("started_at_ms", std::int64_t{0}));
    } else if (!manager_.exists(session_id)) {
      throw Error(ErrorCode::unknown_session, "unknown session '" + session_id + "'");
    }
    role_ = role;
    reply(Json{{"type", "hello.ok"}, {"session_id", session_id}, {"role", role}});
    if (frame.value("subscribe", true)) subscribe(session_id, frame.value("last_seen_seq", std::int64_t{-1}));
  }

  void require_role(const std::string& role, const std::string& type) {
    if (role_.empty()) throw Error(ErrorCode::state, "send hello before '" + type + "'");
    if (role_ != role) throw Error(ErrorCode::state, "'" + type + "' frames need the " + role + " role");
  }

  void ack(const std::string& session_id) {
    reply(Json{{"type", "ack"}, {"session_id", session_id}, {"next_seq", manager_.journal(session_id).next_seq()}});
  }

  tcp::socket socket_;
  SessionManager& manager_;
  std::mutex write_mutex_;
  std::atomic<bool> closed_{false};
  std::string role_;
  std::map<std::string, std::uint64_t> subscriptions_;
};

}  // namespace

struct Service::Impl {
  asio::io_context io;
  std::optional<tcp::acceptor> acceptor;
  std::thread accept_thread;
  std::mutex mutex;
  std::vector<std::shared_ptr<Connection>> connections;
  std::vector<std::thread> workers;
  std::atomic<bool> running{false};
  std::mutex stop_mutex;
  std::condition_variable stopped;
};

Service::Service(std::shared_ptr<SessionManager> manager, ListenAddress address)
    : manager_(std::move(manager)), impl_(std::make_unique<Impl>()) {
  if (!manager_) throw Error(ErrorCode::config, "service needs a session manager");
  boost::system::error_code ec;
  const auto ip = asio::ip::make_address(address.host, ec);
  if (ec) throw Error(ErrorCode::config, "bad listen host '" + address.host + "'", "listen");
  impl_->acceptor.emplace(impl_->io);
  const tcp::endpoint endpoint(ip, address.port);
  impl_->acceptor->open(endpoint.protocol());
  impl_->acceptor->set_option(tcp::acceptor::reuse_address(true));
  impl_->acceptor->bind(endpoint, ec);
  if (ec) throw Error(ErrorCode::io, "cannot bind " + address.host + ":" + std::to_string(address.port) + ": " + ec.message());
  impl_->acceptor->listen();
}

Service::~Service() { stop(); }

std::uint16_t Service::port() const noexcept { return impl_->acceptor->local_endpoint().port(); }

void Service::start() {
  if (impl_->running.exchange(true)) return;
  impl_->accept_thread = std::thread([this] {
    while (impl_->running) {
      boost::system::error_code ec;
      tcp::socket socket(impl_->io);
      impl_->acceptor->accept(socket, ec);
      if (!impl_->running) break;
      if (ec) continue;
      auto conn = std::make_shared<Connection>(std::move(socket), *manager_);
      std::lock_guard lock(impl_->mutex);
      impl_->connections.push_back(conn);
      impl_->workers.emplace_back([conn] { conn->run(); });
    }
  });
}

void Service::stop() {
  if (!impl_->running.exchange(false)) return;
  boost::system::error_code ec;
  if (impl_->accept_thread.joinable()) {
    // A blocking accept is not woken by close() from another thread; poke it with a connection.
    auto endpoint = impl_->acceptor->local_endpoint(ec);
    if (!ec) {
      if (endpoint.address().is_unspecified()) {
        endpoint.address(endpoint.protocol() == tcp::v6() ? asio::ip::address(asio::ip::address_v6::loopback())
                                                          : asio::ip::address(asio::ip::address_v4::loopback()));
      }
      asio::io_context io;
      tcp::socket poke(io);
      poke.connect(endpoint, ec);
    }
    impl_->accept_thread.join();
  }
  impl_->acceptor->close(ec);
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(impl_->mutex);
    for (auto& c : impl_->connections) c->shutdown();
    workers.swap(impl_->workers);
  }
  for (auto& w : workers) {
    if (w.joinable()) w.join();
  }
  {
    std::lock_guard lock(impl_->mutex);
    impl_->connections.clear();
  }
  std::lock_guard lock(impl_->stop_mutex);
  impl_->stopped.notify_all();
}

void Service::wait() {
  std::unique_lock lock(impl_->stop_mutex);
  impl_->stopped.wait(lock, [this] { return !impl_->running; });
}

// ---------------------------------------------------------------------------

struct WireClient::Impl {
  asio::io_context io;
  tcp::socket socket{io};
  asio::streambuf buffer;
};

WireClient::WireClient(const std::string& host, std::uint16_t port) : impl_(std::make_unique<Impl>()) {
  boost::system::error_code ec;
  tcp::resolver resolver(impl_->io);
  const auto endpoints = resolver.resolve(host, std::to_string(port), ec);
  if (!ec) asio::connect(impl_->socket, endpoints, ec);
  if (ec) throw Error(ErrorCode::io, "cannot connect to " + host + ":" + std::to_string(port) + ": " + ec.message());
}

WireClient::~WireClient() { close(); }

void WireClient::send(const Json& frame) { send_raw(canonical_dump(frame)); }

void WireClient::send_raw(const std::string& line) {
  boost::system::error_code ec;
  asio::write(impl_->socket, asio::buffer(line + "\n"), ec);
  if (ec) throw Error(ErrorCode::io, "send failed: " + ec.message());
}

Json WireClient::receive() {
  boost::system::error_code ec;
  asio::read_until(impl_->socket, impl_->buffer, '\n', ec);
  if (ec) throw Error(ErrorCode::io, "connection closed: " + ec.message());
  std::istream in(&impl_->buffer);
  std::string line;
  std::getline(in, line);
  return parse_json(line);
}

Json WireClient::receive_type(const std::string& type, std::vector<Json>* skipped) {
  while (true) {
    Json frame = receive();
    if (frame.value("type", std::string{}) == type) return frame;
    if (skipped) skipped->push_back(std::move(frame));
  }
}

void WireClient::close() {
  boost::system::error_code ec;
  impl_->socket.shutdown(tcp::socket::shutdown_both, ec);
  impl_->socket.close(ec);
}

}  // namespace callassist
