#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "callassist/orchestrator.hpp"

namespace callassist {

struct ListenAddress {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7400;
};

/// Parses "host:port". Throws Error(config).
ListenAddress parse_listen(const std::string& text);

/// The configured address, unless CALLASSIST_LISTEN overrides it.
ListenAddress listen_address(const EngineConfig& config);

/// TCP front of a SessionManager. Each connection is a persistent stream of
/// newline-delimited canonical frames:
///
///   -> {"type":"hello","role":"driver"|"console","session_id":..,
///       "create":bool,"started_at_ms":int,"last_seen_seq":int}
///   <- {"type":"hello.ok",...} then every journaled output after
///      last_seen_seq, then live outputs
///   -> {"type":"subscribe","session_id":..,"last_seen_seq":int}
///   -> {"type":"transcript.event","session_id":..,"payload":{record}}  (driver)
///   -> {"type":"agent.action","session_id":..,"payload":{action}}      (console)
///   <- {"type":"ack","session_id":..,"next_seq":int} once processed
///   -> {"type":"journal.fetch","session_id":..}
///   <- {"type":"journal.entry","entry":{..}}... {"type":"journal.end",..}
///
/// Malformed or refused frames get an error frame (seq -1, not journaled)
/// and the connection stays open.
class Service {
 public:
  Service(std::shared_ptr<SessionManager> manager, ListenAddress address);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and starts accepting in the background. Port 0 picks a free port.
  void start();
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();

  std::uint16_t port() const noexcept;
  SessionManager& manager() noexcept { return *manager_; }

 private:
  struct Impl;
  std::shared_ptr<SessionManager> manager_;
  std::unique_ptr<Impl> impl_;
};

/// Protocol error frame: seq -1, never journaled.
Json error_frame(const std::string& session_id, ErrorCode code, const std::string& message);

/// Blocking client for the frame protocol.
class WireClient {
 public:
  WireClient(const std::string& host, std::uint16_t port);
  ~WireClient();

  WireClient(const WireClient&) = delete;
  WireClient& operator=(const WireClient&) = delete;

  void send(const Json& frame);
  void send_raw(const std::string& line);
  /// Next frame; throws Error(io) when the connection closes.
  Json receive();
  /// Frames are read until one has the given type; the skipped ones are
  /// returned through `skipped` when provided.
  Json receive_type(const std::string& type, std::vector<Json>* skipped = nullptr);
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace callassist
