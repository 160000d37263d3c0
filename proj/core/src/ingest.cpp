#include "callassist/ingest.hpp"

#include <algorithm>
#include <vector>

#include "callassist/errors.hpp"
#include "callassist/text.hpp"

namespace callassist {

namespace {

constexpr std::string_view kEdgePunctuation = ".,;:!?\"'()[]{}<>";

const Json& require_field(const Json& record, std::string_view field) {
  const auto it = record.find(std::string(field));
  if (it == record.end()) {
    throw Error(ErrorCode::parse, "missing field '" + std::string(field) + "'", std::string(field));
  }
  return *it;
}

std::int64_t require_int(const Json& record, std::string_view field) {
  const Json& v = require_field(record, field);
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::parse, "field '" + std::string(field) + "' must be an integer", std::string(field));
  }
  return v.get<std::int64_t>();
}

const std::string& require_string(const Json& record, std::string_view field) {
  const Json& v = require_field(record, field);
  if (!v.is_string()) {
    throw Error(ErrorCode::parse, "field '" + std::string(field) + "' must be a string", std::string(field));
  }
  return v.get_ref<const std::string&>();
}

std::string normalize_key(std::string_view key) {
  const auto parts = split_whitespace(key);
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += ' ';
    out += to_lower(parts[i]);
  }
  return out;
}

struct RawToken {
  std::string text;     // as written
  std::string form;     // lowercase, edge punctuation stripped
  std::string trailer;  // trailing punctuation
};

std::vector<RawToken> raw_tokens(std::string_view text) {
  std::vector<RawToken> out;
  for (std::string_view raw : split_whitespace(text)) {
    std::size_t b = 0;
    std::size_t e = raw.size();
    while (b < e && kEdgePunctuation.find(raw[b]) != std::string_view::npos) ++b;
    while (e > b && kEdgePunctuation.find(raw[e - 1]) != std::string_view::npos) --e;
    out.push_back({std::string(raw), to_lower(raw.substr(b, e - b)), std::string(raw.substr(e))});
  }
  return out;
}

}  // namespace

TranscriptEvent parse_event(const Json& record) {
  if (!record.is_object()) throw Error(ErrorCode::parse, "event record must be an object");
  for (auto it = record.begin(); it != record.end(); ++it) {
    if (std::find(kEventRecordFields.begin(), kEventRecordFields.end(), it.key()) == kEventRecordFields.end()) {
      throw Error(ErrorCode::parse, "unexpected field '" + it.key() + "'", it.key());
    }
  }

  TranscriptEvent ev;
  ev.session_id = require_string(record, "session_id");
  if (ev.session_id.empty()) throw Error(ErrorCode::parse, "session_id must be non-empty", "session_id");

  ev.turn_index = require_int(record, "turn_index");
  if (ev.turn_index < 0) throw Error(ErrorCode::parse, "turn_index must be non-negative", "turn_index");

  const auto speaker = parse_enum<Speaker>(require_string(record, "speaker"));
  if (!speaker) throw Error(ErrorCode::parse, "unknown speaker", "speaker");
  ev.speaker = *speaker;

  ev.raw_text = require_string(record, "raw_text");

  const auto lang = parse_enum<Lang>(require_string(record, "lang"));
  if (!lang) throw Error(ErrorCode::parse, "unknown lang", "lang");
  ev.lang = *lang;

  ev.t_start_ms = require_int(record, "t_start_ms");
  if (ev.t_start_ms < 0) throw Error(ErrorCode::parse, "t_start_ms must be non-negative", "t_start_ms");
  ev.t_end_ms = require_int(record, "t_end_ms");
  if (ev.t_end_ms < 0) throw Error(ErrorCode::parse, "t_end_ms must be non-negative", "t_end_ms");
  if (ev.t_end_ms < ev.t_start_ms) throw Error(ErrorCode::parse, "t_end_ms precedes t_start_ms", "t_end_ms");

  const Json& fin = require_field(record, "is_final");
  if (!fin.is_boolean()) throw Error(ErrorCode::parse, "field 'is_final' must be a boolean", "is_final");
  ev.is_final = fin.get<bool>();
  return ev;
}

TranscriptEvent parse_event(std::string_view line) { return parse_event(parse_json(line)); }

Json event_record(const TranscriptEvent& event) {
  return Json{{"session_id", event.session_id}, {"turn_index", event.turn_index},
              {"speaker", event.speaker},       {"raw_text", event.raw_text},
              {"lang", event.lang},             {"t_start_ms", event.t_start_ms},
              {"t_end_ms", event.t_end_ms},     {"is_final", event.is_final}};
}

TransliterationTable::Result TransliterationTable::apply(std::string_view text) const {
  Result result;
  const auto toks = raw_tokens(text);
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < toks.size()) {
    bool matched = false;
    const std::size_t longest = std::min(max_phrase_tokens_, toks.size() - i);
    for (std::size_t len = longest; len >= 1; --len) {
      std::string key;
      bool usable = true;
      for (std::size_t k = 0; k < len; ++k) {
        if (toks[i + k].form.empty()) {
          usable = false;
          break;
        }
        if (k > 0) key += ' ';
        key += toks[i + k].form;
      }
      if (!usable) continue;
      const auto it = entries_.find(key);
      if (it == entries_.end()) continue;

      const std::string& trailer = toks[i + len - 1].trailer;
      if (!it->second.empty()) {
        out.push_back(it->second + trailer);
      } else if (!trailer.empty() && !out.empty()) {
        out.back() += trailer;
      }
      i += len;
      matched = true;
      break;
    }
    if (!matched) {
      out.push_back(toks[i].text);
      ++result.unmatched_tokens;
      ++i;
    }
  }
  result.text = join(out, " ");
  return result;
}

TransliterationTable TransliterationTable::from_json(const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::config, "transliteration table must be an object");
  TransliterationTable table;
  const auto v = doc.find("version");
  if (v == doc.end() || !v->is_string()) {
    throw Error(ErrorCode::config, "transliteration table needs a string 'version'", "version");
  }
  table.version_ = v->get<std::string>();

  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() == "version") continue;
    if (!it.value().is_string()) {
      throw Error(ErrorCode::config, "transliteration value for '" + it.key() + "' must be a string", it.key());
    }
    const std::string key = normalize_key(it.key());
    if (key.empty()) throw Error(ErrorCode::config, "empty transliteration key");
    if (!table.entries_.emplace(key, it.value().get<std::string>()).second) {
      throw Error(ErrorCode::config, "transliteration key '" + key + "' is ambiguous", it.key());
    }
    table.max_phrase_tokens_ = std::max(table.max_phrase_tokens_, split_whitespace(key).size());
  }

  for (const auto& [key, value] : table.entries_) {
    if (value.empty()) continue;
    const Result again = table.apply(value);
    if (again.text != value || again.unmatched_tokens != split_whitespace(value).size()) {
      throw Error(ErrorCode::config, "replacement for '" + key + "' contains a source phrase", key);
    }
  }
  return table;
}

TransliterationTable TransliterationTable::load(const std::filesystem::path& path) {
  return from_json(load_json_file(path));
}

NormalizedEvent normalize_display_text(TranscriptEvent event, const TransliterationTable& table) {
  NormalizedEvent out;
  if (event.lang == Lang::en || event.raw_text.empty()) {
    event.display_text = event.raw_text;
  } else {
    auto r = table.apply(event.raw_text);
    // Every token mapped to an empty replacement: fall back to the raw text
    // rather than showing the agent nothing.
    event.display_text = r.text.empty() ? event.raw_text : std::move(r.text);
    out.unmatched_tokens = r.unmatched_tokens;
  }
  out.event = std::move(event);
  return out;
}

}  // namespace callassist
