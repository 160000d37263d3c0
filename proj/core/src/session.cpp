#include "callassist/session.hpp"

#include <sstream>

#include "callassist/errors.hpp"

namespace callassist {

void Journal::append(JournalEntry entry) {
  if (closed_) {
    throw Error(ErrorCode::session_ended, "journal is closed");
  }
  if (entry.seq != next_seq()) {
    throw Error(ErrorCode::ordering, "journal seq " + std::to_string(entry.seq) + " does not follow " +
                                         std::to_string(next_seq() - 1));
  }
  entries_.push_back(std::move(entry));
}

std::string Journal::dump() const {
  std::string out;
  for (const auto& e : entries_) {
    out += canonical_dump(Json(e));
    out += '\n';
  }
  return out;
}

Journal Journal::parse(std::string_view ndjson) {
  Journal journal;
  std::istringstream in{std::string(ndjson)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto entry = parse_json(line).get<JournalEntry>();
    const bool terminal = is_terminal_entry(entry);
    journal.append(std::move(entry));
    if (terminal) journal.close();
  }
  return journal;
}

SessionState create_session(const SessionId& session_id, std::int64_t started_at_ms) {
  if (session_id.empty()) throw Error(ErrorCode::parse, "session id must be non-empty", "session_id");
  SessionState state;
  state.session_id = session_id;
  state.started_at_ms = started_at_ms;
  return state;
}

bool is_terminal_entry(const JournalEntry& entry) {
  return entry.kind == JournalKind::assist_output && entry.payload.is_object() &&
         entry.payload.value("type", std::string{}) == "call.final_summary";
}

void append_journal(Session& session, JournalEntry entry) {
  const bool terminal = is_terminal_entry(entry);
  if (session.state.ended && !terminal) {
    throw Error(ErrorCode::session_ended, "session " + session.state.session_id.value() + " has ended");
  }
  session.journal.append(std::move(entry));
  if (terminal) session.journal.close();
}

std::string snapshot(const SessionState& state) { return canonical_dump(Json(state)); }

SessionState parse_snapshot(std::string_view text) {
  try {
    return parse_json(text).get<SessionState>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::parse, std::string("malformed snapshot: ") + e.what());
  }
}

void persist_session(const Session& session, const std::filesystem::path& root) {
  const auto dir = root / session.state.session_id.value();
  write_text_file(dir / "journal.ndjson", session.journal.dump());
  write_text_file(dir / "snapshot.json", snapshot(session.state) + "\n");
}

std::shared_ptr<SessionLane> SessionTable::create(const SessionId& session_id, std::int64_t started_at_ms) {
  auto state = create_session(session_id, started_at_ms);
  std::lock_guard lock(mutex_);
  if (lanes_.contains(session_id.value())) {
    throw Error(ErrorCode::duplicate_session, "session " + session_id.value() + " is already live");
  }
  auto lane = std::make_shared<SessionLane>();
  lane->session.state = std::move(state);
  lanes_.emplace(session_id.value(), lane);
  return lane;
}

std::shared_ptr<SessionLane> SessionTable::find(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  const auto it = lanes_.find(session_id);
  return it == lanes_.end() ? nullptr : it->second;
}

std::shared_ptr<SessionLane> SessionTable::get(const std::string& session_id) const {
  auto lane = find(session_id);
  if (!lane) throw Error(ErrorCode::unknown_session, "unknown session " + session_id);
  return lane;
}

std::vector<std::string> SessionTable::ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  out.reserve(lanes_.size());
  for (const auto& [id, lane] : lanes_) out.push_back(id);
  return out;
}

std::size_t SessionTable::size() const {
  std::lock_guard lock(mutex_);
  return lanes_.size();
}

bool SessionTable::erase(const std::string& session_id) {
  std::lock_guard lock(mutex_);
  return lanes_.erase(session_id) > 0;
}

}  // namespace callassist
