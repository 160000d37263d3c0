#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "callassist/types.hpp"

namespace callassist {

/// Append-only, gap-free sequence of inputs, actions and outputs for one call.
class Journal {
 public:
  /// Throws Error(ordering) unless entry.seq == next_seq(); Error(session_ended)
  /// once the journal is closed.
  void append(JournalEntry entry);

  const std::vector<JournalEntry>& entries() const noexcept { return entries_; }
  std::int64_t next_seq() const noexcept { return static_cast<std::int64_t>(entries_.size()); }
  bool closed() const noexcept { return closed_; }
  void close() noexcept { closed_ = true; }

  /// One canonical document per line.
  std::string dump() const;
  static Journal parse(std::string_view ndjson);

  bool operator==(const Journal&) const = default;

 private:
  std::vector<JournalEntry> entries_;
  bool closed_ = false;
};

struct Session {
  SessionState state;
  Journal journal;
};

/// Fresh state: no entities, turn_count 0, not ended.
SessionState create_session(const SessionId& session_id, std::int64_t started_at_ms);

/// True for the entry that may still be appended after the call has ended.
bool is_terminal_entry(const JournalEntry& entry);

/// Appends to the session journal, leaving the state untouched. After the
/// call has ended only the terminal final-summary entry is accepted, and it
/// closes the journal.
void append_journal(Session& session, JournalEntry entry);

/// Canonical, byte-stable serialization of the state.
std::string snapshot(const SessionState& state);
SessionState parse_snapshot(std::string_view text);

/// Writes journal.ndjson and snapshot.json under `<root>/<session_id>/`.
void persist_session(const Session& session, const std::filesystem::path& root);

/// One processing lane per call: all mutations of `session` happen under
/// `mutex`, subscribers are notified in journal order while it is held.
struct SessionLane {
  std::mutex mutex;
  Session session;
  std::map<std::uint64_t, std::function<void(const std::string& frame)>> subscribers;
};

/// Registry of live sessions. Distinct sessions never share a lane.
class SessionTable {
 public:
  /// Throws Error(duplicate_session) if the id is already live.
  std::shared_ptr<SessionLane> create(const SessionId& session_id, std::int64_t started_at_ms);

  std::shared_ptr<SessionLane> find(const std::string& session_id) const;

  /// Throws Error(unknown_session).
  std::shared_ptr<SessionLane> get(const std::string& session_id) const;

  std::vector<std::string> ids() const;
  std::size_t size() const;
  bool erase(const std::string& session_id);

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<SessionLane>> lanes_;
};

}  // namespace callassist
