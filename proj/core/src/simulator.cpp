#include "callassist/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "callassist/errors.hpp"
#include "callassist/service.hpp"

namespace callassist {

namespace {

Error at_line(const std::string& name, std::size_t line, const Error& e) {
  return Error(e.code(),
               name + ":" + std::to_string(line) + ": " + e.what(), e.field());
}

ScriptMeta parse_meta(const Json& meta) {
  if (!meta.is_object()) throw Error(ErrorCode::parse, "meta must be an object", "meta");
  static const std::set<std::string> known = {"session_id", "cohort",         "converted_enquiry", "converted_booking",
                                              "outcome",    "config_version", "started_at_ms"};
  for (const auto& [key, value] : meta.items()) {
    if (!known.contains(key)) throw Error(ErrorCode::parse, "unknown meta field '" + key + "'", key);
  }
  ScriptMeta m;
  m.session_id = meta.value("session_id", std::string{});
  if (meta.contains("cohort")) m.cohort = meta.at("cohort").get<Cohort>();
  m.converted_enquiry = meta.value("converted_enquiry", false);
  m.converted_booking = meta.value("converted_booking", false);
  if (meta.contains("outcome") && !meta.at("outcome").is_null()) m.outcome = meta.at("outcome").get<std::string>();
  m.config_version = meta.value("config_version", std::string{});
  if (meta.contains("started_at_ms")) m.started_at_ms = meta.at("started_at_ms").get<std::int64_t>();
  if (m.converted_booking && !m.converted_enquiry) {
    throw Error(ErrorCode::parse, "a booking needs an enquiry", "converted_booking");
  }
  return m;
}

std::int64_t last_time(const Script& script) {
  std::int64_t t = script.started_at_ms();
  for (const auto& s : script.steps) {
    if (s.event) t = std::max(t, s.event->t_end_ms);
    if (s.action) t = std::max(t, s.action->t_ms);
  }
  return t;
}

/// The steps to feed, with the implicit end_call when the script has none.
std::vector<ScriptStep> feed_of(const Script& script) {
  std::vector<ScriptStep> steps = script.steps;
  const bool ends = std::any_of(steps.begin(), steps.end(), [](const ScriptStep& s) {
    return s.action && s.action->kind == AgentAction::Kind::end_call;
  });
  if (!ends) {
    ScriptStep end;
    AgentAction a;
    a.session_id = script.session_id();
    a.kind = AgentAction::Kind::end_call;
    a.t_ms = last_time(script);
    end.action = a;
    steps.push_back(end);
  }
  return steps;
}

Journal replay_in_process(const Script& script, std::shared_ptr<const Resources> resources, EngineOptions options) {
  const Engine engine(std::move(resources), options);
  Session session = engine.open(SessionId(script.session_id()), script.started_at_ms());
  for (const auto& step : feed_of(script)) {
    if (step.event) engine.process_event(session, *step.event);
    if (step.action) engine.handle_agent_action(session, *step.action);
  }
  return session.journal;
}

Json await_ack(WireClient& client) {
  while (true) {
    Json frame = client.receive();
    const std::string type = frame.value("type", std::string{});
    if (type == "ack" || type == "hello.ok") return frame;
    if (type == "error" && frame.value("seq", std::int64_t{0}) < 0) {
      const auto code = frame.at("payload").at("code").get<std::string>();
      ErrorCode ec = ErrorCode::io;
      for (int c = 0; c <= static_cast<int>(ErrorCode::invariant); ++c) {
        if (to_string(static_cast<ErrorCode>(c)) == code) ec = static_cast<ErrorCode>(c);
      }
      throw Error(ec, "service: " + frame.at("payload").at("message").get<std::string>());
    }
  }
}

Journal replay_wire(const Script& script, std::shared_ptr<const Resources> resources, EngineOptions options) {
  auto manager = std::make_shared<SessionManager>(std::move(resources), options);
  Service service(manager, ListenAddress{"127.0.0.1", 0});
  service.start();

  const std::string id = script.session_id();
  WireClient driver("127.0.0.1", service.port());
  driver.send(Json{{"type", "hello"},
                   {"role", "driver"},
                   {"session_id", id},
                   {"create", true},
                   {"started_at_ms", script.started_at_ms()},
                   {"subscribe", false}});
  await_ack(driver);
  WireClient console("127.0.0.1", service.port());
  console.send(Json{{"type", "hello"}, {"role", "console"}, {"session_id", id}, {"subscribe", false}});
  await_ack(console);

  for (const auto& step : feed_of(script)) {
    if (step.event) {
      driver.send(event_input(*step.event));
      await_ack(driver);
    }
    if (step.action) {
      console.send(action_input(*step.action));
      await_ack(console);
    }
  }

  driver.send(Json{{"type", "journal.fetch"}, {"session_id", id}});
  Journal journal;
  while (true) {
    const Json frame = driver.receive();
    const std::string type = frame.value("type", std::string{});
    if (type == "journal.end") break;
    if (type != "journal.entry") continue;
    JournalEntry entry = frame.at("entry").get<JournalEntry>();
    const bool terminal = is_terminal_entry(entry);
    journal.append(std::move(entry));
    if (terminal) journal.close();
  }
  driver.close();
  console.close();
  service.stop();
  return journal;
}

double mean_duration(const std::vector<const CallRecord*>& calls) {
  double sum = 0.0;
  for (const auto* c : calls) sum += c->duration_s;
  return sum / static_cast<double>(calls.size());
}

CohortStats cohort_stats(const std::vector<const CallRecord*>& calls) {
  CohortStats s;
  s.calls = calls.size();
  s.aht_s = mean_duration(calls);
  for (const auto* c : calls) {
    s.enquiries += c->converted_enquiry ? 1 : 0;
    s.bookings += c->converted_booking ? 1 : 0;
  }
  s.l2e_rate = static_cast<double>(s.enquiries) / static_cast<double>(s.calls);
  s.booking_rate = s.enquiries == 0 ? 0.0 : static_cast<double>(s.bookings) / static_cast<double>(s.enquiries);
  return s;
}

std::string optional_pct(const std::optional<double>& v) { return v ? format_fixed(*v, 1) + "%" : "n/a"; }

}  // namespace

// ---------------------------------------------------------------------------

std::int64_t Script::started_at_ms() const {
  if (meta.started_at_ms) return *meta.started_at_ms;
  for (const auto& s : steps) {
    if (s.event) return s.event->t_start_ms;
  }
  return 0;
}

Script parse_script(std::string_view text, const std::string& name) {
  Script script;
  script.name = name;
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool seen_content = false;
  std::vector<std::pair<std::size_t, Json>> pending_actions;

  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string line = trim(text.substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    try {
      const Json doc = parse_json(line);
      if (!doc.is_object()) throw Error(ErrorCode::parse, "script line must be an object");
      if (doc.contains("meta")) {
        if (seen_content) throw Error(ErrorCode::parse, "meta must be the first line", "meta");
        script.meta = parse_meta(doc.at("meta"));
      } else if (doc.contains("action")) {
        Json action = doc;
        if (!action.contains("session_id")) {
          action["session_id"] = script.meta.session_id.empty() ? std::string("?") : script.meta.session_id;
        }
        ScriptStep step;
        step.line = line_no;
        step.action = parse_agent_action(action);
        script.steps.push_back(std::move(step));
        if (!doc.contains("session_id")) pending_actions.emplace_back(script.steps.size() - 1, doc);
      } else {
        ScriptStep step;
        step.line = line_no;
        step.event = parse_event(doc);
        if (script.meta.session_id.empty()) script.meta.session_id = step.event->session_id;
        if (step.event->session_id != script.meta.session_id) {
          throw Error(ErrorCode::parse, "event for session '" + step.event->session_id + "' in script of '" +
                                            script.meta.session_id + "'",
                      "session_id");
        }
        script.steps.push_back(std::move(step));
      }
      seen_content = true;
    } catch (const Error& e) {
      throw at_line(name, line_no, e);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::parse, name + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (end == text.size()) break;
  }
  if (script.meta.session_id.empty()) script.meta.session_id = name;
  for (auto& [index, doc] : pending_actions) script.steps[index].action->session_id = script.meta.session_id;
  for (const auto& s : script.steps) {
    if (s.action && s.action->session_id != script.meta.session_id) {
      throw Error(ErrorCode::parse,
                  name + ":" + std::to_string(s.line) + ": action for another session '" + s.action->session_id + "'",
                  "session_id");
    }
  }
  return script;
}

Script load_script(const std::filesystem::path& path) {
  return parse_script(read_text_file(path), path.filename().string());
}

std::vector<Script> load_script_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::io, "not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".ndjson") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Script> out;
  for (const auto& f : files) out.push_back(load_script(f));
  return out;
}

ReplayMode parse_replay_mode(const std::string& text) {
  if (text == "in-process" || text == "in_process") return ReplayMode::in_process;
  if (text == "wire") return ReplayMode::wire;
  throw Error(ErrorCode::usage, "mode must be in-process or wire, got '" + text + "'", "mode");
}

std::vector<AnswerRecord> answers_from_journal(const Journal& journal) {
  std::vector<AnswerRecord> out;
  std::set<std::string> seen;
  for (const auto& e : journal.entries()) {
    if (e.kind != JournalKind::assist_output || e.payload.value("type", std::string{}) != msg::answer_delivered) {
      continue;
    }
    AnswerRecord rec = e.payload.at("payload").at("answer").get<AnswerRecord>();
    if (seen.insert(rec.query_id).second) out.push_back(std::move(rec));
  }
  return out;
}

CallRecord derive_call_record(const Script& script, const Journal& journal, const std::string& config_version) {
  CallRecord r;
  r.session_id = script.session_id();
  std::optional<std::int64_t> first;
  std::optional<std::int64_t> last;
  for (const auto& s : script.steps) {
    if (!s.event) continue;
    first = first ? std::min(*first, s.event->t_start_ms) : s.event->t_start_ms;
    last = last ? std::max(*last, s.event->t_end_ms) : s.event->t_end_ms;
  }
  if (!first || *last <= *first) {
    throw Error(ErrorCode::invariant, "call " + r.session_id + " has no positive duration");
  }
  r.duration_s = static_cast<double>(*last - *first) / 1000.0;
  r.cohort = script.meta.cohort.value_or(Cohort::assisted);
  for (const auto& a : answers_from_journal(journal)) {
    if (a.route == Route::faq) {
      ++r.faq_hits;
    } else {
      ++r.rag_calls;
    }
  }
  r.converted_enquiry = script.meta.converted_enquiry;
  r.converted_booking = script.meta.converted_booking;
  r.outcome = "unresolved";
  for (const auto& e : journal.entries()) {
    if (is_terminal_entry(e)) r.outcome = e.payload.at("payload").at("summary").at("outcome").get<std::string>();
  }
  if (script.meta.outcome) r.outcome = *script.meta.outcome;
  r.config_version = script.meta.config_version.empty() ? config_version : script.meta.config_version;
  return r;
}

ReplayResult replay(const Script& script, std::shared_ptr<const Resources> resources, ReplayMode mode,
                    EngineOptions options) {
  const std::string version = resources->config.version;
  ReplayResult result;
  result.journal = mode == ReplayMode::wire ? replay_wire(script, std::move(resources), options)
                                            : replay_in_process(script, std::move(resources), options);
  result.answers = answers_from_journal(result.journal);
  result.record = derive_call_record(script, result.journal, version);
  return result;
}

// ---------------------------------------------------------------------------

void to_json(Json& j, const CohortStats& v) {
  j = Json{{"calls", v.calls},         {"aht_s", v.aht_s},       {"enquiries", v.enquiries},
           {"bookings", v.bookings},   {"l2e_rate", v.l2e_rate}, {"booking_rate", v.booking_rate}};
}

void to_json(Json& j, const MetricsReport& v) {
  j = Json{{"assisted", v.assisted},
           {"control", v.control},
           {"aht_reduction_pct", v.aht_reduction_pct},
           {"savings", v.savings},
           {"faq_hit_rate", v.faq_hit_rate},
           {"latency_saved_hours", v.latency_saved_hours},
           {"l2e_uplift_pct", v.l2e_uplift_pct ? Json(*v.l2e_uplift_pct) : Json(nullptr)},
           {"booking_uplift_pct", v.booking_uplift_pct ? Json(*v.booking_uplift_pct) : Json(nullptr)},
           {"warnings", v.warnings}};
}

std::optional<double> uplift_pct(double treated, double base) {
  if (base == 0.0) return std::nullopt;
  return 100.0 * (treated - base) / base;
}

MetricsReport compute_kpis(std::span<const CallRecord> records, std::span<const AnswerRecord> answers,
                           double seconds_saved_per_hit) {
  std::vector<const CallRecord*> assisted;
  std::vector<const CallRecord*> control;
  for (const auto& r : records) (r.cohort == Cohort::assisted ? assisted : control).push_back(&r);
  if (assisted.empty()) throw Error(ErrorCode::missing_cohort, "no calls in the assisted cohort");
  if (control.empty()) throw Error(ErrorCode::missing_cohort, "no calls in the control cohort");
  // Sum in a fixed order so the result does not depend on record order.
  const auto by_id = [](const CallRecord* a, const CallRecord* b) {
    return a->session_id != b->session_id ? a->session_id < b->session_id : a->duration_s < b->duration_s;
  };
  std::sort(assisted.begin(), assisted.end(), by_id);
  std::sort(control.begin(), control.end(), by_id);

  MetricsReport m;
  m.assisted = cohort_stats(assisted);
  m.control = cohort_stats(control);
  m.aht_reduction_pct = 100.0 * (m.control.aht_s - m.assisted.aht_s) / m.control.aht_s;
  m.l2e_uplift_pct = uplift_pct(m.assisted.l2e_rate, m.control.l2e_rate);
  m.booking_uplift_pct = uplift_pct(m.assisted.booking_rate, m.control.booking_rate);
  m.savings = account_latency(answers, seconds_saved_per_hit);
  m.faq_hit_rate = m.savings.hit_rate;
  m.latency_saved_hours = m.savings.latency_saved_hours;
  return m;
}

std::string render_report(const MetricsReport& m) {
  std::vector<std::string> lines;
  const auto row = [&](const std::string& label, const std::string& a, const std::string& c) {
    std::string l = label;
    l.resize(22, ' ');
    std::string ca = a;
    ca.resize(14, ' ');
    lines.push_back(l + ca + c);
  };
  row("metric", "assisted", "control");
  row("calls", std::to_string(m.assisted.calls), std::to_string(m.control.calls));
  row("aht_s", format_fixed(m.assisted.aht_s, 1), format_fixed(m.control.aht_s, 1));
  row("enquiries", std::to_string(m.assisted.enquiries), std::to_string(m.control.enquiries));
  row("bookings", std::to_string(m.assisted.bookings), std::to_string(m.control.bookings));
  row("l2e_rate", format_fixed(m.assisted.l2e_rate, 3), format_fixed(m.control.l2e_rate, 3));
  row("booking_rate", format_fixed(m.assisted.booking_rate, 3), format_fixed(m.control.booking_rate, 3));
  lines.push_back("");
  lines.push_back("aht_reduction_pct     " + format_fixed(m.aht_reduction_pct, 1) + "%");
  lines.push_back("l2e_uplift_pct        " + optional_pct(m.l2e_uplift_pct));
  lines.push_back("booking_uplift_pct    " + optional_pct(m.booking_uplift_pct));
  lines.push_back("routed_queries        " + std::to_string(m.savings.routed));
  lines.push_back("faq_hits              " + std::to_string(m.savings.hits));
  lines.push_back("faq_hit_rate          " + format_fixed(m.faq_hit_rate, 3));
  lines.push_back("latency_saved_hours   " + format_fixed(m.latency_saved_hours, 1));
  for (const auto& w : m.warnings) lines.push_back("warning: " + w);
  return join(lines, "\n") + "\n";
}

std::string render_plot_csv(const MetricsReport& m) {
  std::string out = "metric,assisted,control\n";
  out += "aht_s," + format_fixed(m.assisted.aht_s, 6) + "," + format_fixed(m.control.aht_s, 6) + "\n";
  out += "l2e_rate," + format_fixed(m.assisted.l2e_rate, 6) + "," + format_fixed(m.control.l2e_rate, 6) + "\n";
  out += "booking_rate," + format_fixed(m.assisted.booking_rate, 6) + "," + format_fixed(m.control.booking_rate, 6) +
         "\n";
  return out;
}

AbReport ab_compare(const std::filesystem::path& cohort_a, const std::filesystem::path& cohort_b,
                    std::shared_ptr<const Resources> resources, ReplayMode mode) {
  AbReport report;
  std::vector<AnswerRecord> answers;
  std::set<std::string> versions_a;
  std::set<std::string> versions_b;
  const auto run = [&](const std::filesystem::path& dir, Cohort cohort, std::set<std::string>& versions) {
    for (const auto& script : load_script_directory(dir)) {
      ReplayResult r = replay(script, resources, mode, EngineOptions{false});
      r.record.cohort = cohort;
      versions.insert(r.record.config_version);
      answers.insert(answers.end(), r.answers.begin(), r.answers.end());
      report.records.push_back(std::move(r.record));
    }
  };
  run(cohort_a, Cohort::assisted, versions_a);
  run(cohort_b, Cohort::control, versions_b);
  report.metrics = compute_kpis(report.records, answers, resources->config.seconds_saved_per_hit);
  if (versions_a != versions_b) {
    std::vector<std::string> a(versions_a.begin(), versions_a.end());
    std::vector<std::string> b(versions_b.begin(), versions_b.end());
    report.metrics.warnings.push_back("config versions differ between cohorts: [" + join(a, ", ") + "] vs [" +
                                      join(b, ", ") + "]");
  }
  report.text = render_report(report.metrics);
  report.plot_csv = render_plot_csv(report.metrics);
  return report;
}

void write_ab_outputs(const std::filesystem::path& dir, const AbReport& report) {
  write_text_file(dir / "report.txt", report.text);
  write_text_file(dir / "plot_data.csv", report.plot_csv);
  write_text_file(dir / "report.json", canonical_dump(Json(report.metrics)) + "\n");
}

}  // namespace callassist
