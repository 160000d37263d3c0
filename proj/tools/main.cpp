// callassist: replay, KPI, A/B, FAQ governance and service front end.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 invariant violation.

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <thread>

#include "callassist/errors.hpp"
#include "callassist/governance.hpp"
#include "callassist/orchestrator.hpp"
#include "callassist/service.hpp"
#include "callassist/simulator.hpp"

namespace fs = std::filesystem;
using namespace callassist;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInvariant = 3;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

std::int64_t wall_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::shared_ptr<Resources> load_resources(const std::string& config_path) {
  return Resources::load(EngineConfig::load(config_path));
}

template <class T>
std::vector<T> load_records(const fs::path& path) {
  std::vector<T> out;
  for (const auto& doc : load_ndjson_file(path)) out.push_back(doc.get<T>());
  return out;
}

struct Options {
  std::string config = "fixtures/config.json";
  std::string script;
  std::string mode = "in-process";
  std::string out;
  std::string cohort_a;
  std::string cohort_b;
  std::string input;
  std::string reports;
  std::string records;
  std::string answers;
  std::string listen;
  std::string status;
  std::int64_t min_support = -1;
  std::int64_t now_ms = -1;
  std::int64_t ttl_ms = -1;
};

int cmd_replay(const Options& o) {
  auto resources = load_resources(o.config);
  const Script script = load_script(o.script);
  const ReplayResult r = replay(script, resources, parse_replay_mode(o.mode));
  if (!o.out.empty()) {
    const fs::path dir = fs::path(o.out) / script.session_id();
    write_text_file(dir / "journal.ndjson", r.journal.dump());
    const Engine audit(resources, EngineOptions{false});
    const Session rebuilt = replay_journal(r.journal, audit);
    write_text_file(dir / "snapshot.json", snapshot(rebuilt.state) + "\n");
    write_text_file(dir / "record.json", canonical_dump(Json(r.record)) + "\n");
    write_text_file(dir / "answers.ndjson", to_ndjson<AnswerRecord>(r.answers));
  }
  std::cout << canonical_dump(Json(r.record)) << '\n';
  return kExitOk;
}

int cmd_kpis(const Options& o) {
  auto config = EngineConfig::load(o.config);
  const auto records = load_records<CallRecord>(o.records);
  const auto answers = o.answers.empty() ? std::vector<AnswerRecord>{} : load_records<AnswerRecord>(o.answers);
  const MetricsReport m = compute_kpis(records, answers, config.seconds_saved_per_hit);
  if (!o.out.empty()) {
    write_text_file(fs::path(o.out) / "kpis.json", canonical_dump(Json(m)) + "\n");
    write_text_file(fs::path(o.out) / "kpis.txt", render_report(m));
  }
  std::cout << render_report(m);
  return kExitOk;
}

int cmd_ab(const Options& o) {
  auto resources = load_resources(o.config);
  const AbReport report = ab_compare(o.cohort_a, o.cohort_b, resources, parse_replay_mode(o.mode));
  if (!o.out.empty()) write_ab_outputs(o.out, report);
  std::cout << report.text;
  return kExitOk;
}

int cmd_mine(const Options& o) {
  auto resources = load_resources(o.config);
  const auto records = o.records.empty() ? std::vector<CallRecord>{} : load_records<CallRecord>(o.records);
  const auto answers = load_records<AnswerRecord>(o.answers);
  const std::int64_t min_support = o.min_support > 0 ? o.min_support : resources->config.governance.min_support;
  const auto candidates = mine_candidates(records, answers, min_support, resources->tokenizer);
  const std::string text = to_ndjson<FaqCandidate>(candidates);
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(o.out, text);
    std::cout << candidates.size() << " candidates written to " << o.out << '\n';
  }
  return kExitOk;
}

int cmd_validate(const Options& o) {
  auto resources = load_resources(o.config);
  const auto candidates = load_candidates(o.input);
  const std::int64_t now = o.now_ms >= 0 ? o.now_ms : wall_clock_ms();
  std::vector<ValidationReport> reports;
  for (const auto& c : candidates) {
    reports.push_back(validate_candidate(c, resources->registry, resources->matcher, resources->tokenizer,
                                         resources->config.governance, now));
  }
  const std::string text = to_ndjson<ValidationReport>(reports);
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(o.out, text);
    for (const auto& r : reports) {
      std::cout << r.candidate_id << ' ' << (r.verdict == Verdict::accepted ? "accepted" : "rejected");
      for (const auto& f : r.failed_checks) std::cout << ' ' << f;
      std::cout << '\n';
    }
  }
  return kExitOk;
}

int cmd_apply(const Options& o) {
  auto config = EngineConfig::load(o.config);
  auto resources = Resources::load(config);
  const auto candidates = load_candidates(o.input);
  const auto reports = load_reports(o.reports);
  const std::int64_t now = o.now_ms >= 0 ? o.now_ms : wall_clock_ms();
  const std::int64_t ttl = o.ttl_ms > 0 ? o.ttl_ms : config.governance.ttl_ms;
  const auto cache = load_faq_entries(config.paths.faq_store);
  const LifecycleResult result = apply_lifecycle(cache, candidates, reports, now, ttl, resources->tokenizer);
  const fs::path store = o.out.empty() ? config.paths.faq_store : fs::path(o.out);
  save_faq_entries(store, result.cache);
  append_change_log(store.parent_path() / "changes.ndjson", result.changes);
  for (const auto& c : result.changes) std::cout << canonical_dump(c) << '\n';
  return kExitOk;
}

int cmd_list(const Options& o) {
  auto config = EngineConfig::load(o.config);
  for (const auto& e : load_faq_entries(config.paths.faq_store)) {
    if (!o.status.empty() && to_string(e.status) != o.status) continue;
    std::cout << e.entry_id << "  v" << e.version << "  " << to_string(e.status) << "  [" << e.kb_domain_tag << "]  hits="
              << e.hit_count << "  " << e.question << '\n';
  }
  return kExitOk;
}

int cmd_serve(const Options& o) {
  auto resources = load_resources(o.config);
  const ListenAddress address = o.listen.empty() ? listen_address(resources->config) : parse_listen(o.listen);
  auto manager = std::make_shared<SessionManager>(resources);
  Service service(manager, address);
  service.start();
  std::cout << "listening on " << address.host << ':' << service.port() << std::endl;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  service.stop();
  const fs::path root = o.out.empty() ? resources->config.paths.sessions_dir : fs::path(o.out);
  for (const auto& id : manager->sessions()) manager->persist(id, root);
  std::cout << "stopped; " << manager->sessions().size() << " sessions written to " << root.string() << std::endl;
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::usage:
      return kExitUsage;
    case ErrorCode::invariant:
      return kExitInvariant;
    default:
      return kExitData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-time agent-assist engine: replay, KPIs, FAQ governance and service"};
  app.require_subcommand(1);
  Options o;

  const auto config_opt = [&](CLI::App* sub) { sub->add_option("--config", o.config, "Engine config document"); };

  auto* replay_cmd = app.add_subcommand("replay", "Replay one conversation script");
  config_opt(replay_cmd);
  replay_cmd->add_option("--script", o.script, "Conversation script")->required();
  replay_cmd->add_option("--mode", o.mode, "in-process or wire");
  replay_cmd->add_option("--out", o.out, "Directory for journal, snapshot and record");

  auto* kpis_cmd = app.add_subcommand("kpis", "Compute KPIs from call records");
  config_opt(kpis_cmd);
  kpis_cmd->add_option("--records", o.records, "CallRecord log")->required();
  kpis_cmd->add_option("--answers", o.answers, "AnswerRecord log");
  kpis_cmd->add_option("--out", o.out, "Output directory");

  auto* ab_cmd = app.add_subcommand("ab", "Compare two cohorts of scripts");
  config_opt(ab_cmd);
  ab_cmd->add_option("--cohort-a", o.cohort_a, "Assisted cohort directory")->required();
  ab_cmd->add_option("--cohort-b", o.cohort_b, "Control cohort directory")->required();
  ab_cmd->add_option("--mode", o.mode, "in-process or wire");
  ab_cmd->add_option("--out", o.out, "Directory for report.txt, plot_data.csv and report.json");

  auto* mine_cmd = app.add_subcommand("mine", "Mine FAQ candidates from answer logs");
  config_opt(mine_cmd);
  mine_cmd->add_option("--answers", o.answers, "AnswerRecord log")->required();
  mine_cmd->add_option("--records", o.records, "CallRecord log of replayed transcripts");
  mine_cmd->add_option("--min-support", o.min_support, "Minimum cluster size");
  mine_cmd->add_option("--out", o.out, "Candidate log to write");

  auto* validate_cmd = app.add_subcommand("validate", "Run heuristic and ontology checks on candidates");
  config_opt(validate_cmd);
  validate_cmd->add_option("--input", o.input, "Candidate log")->required();
  validate_cmd->add_option("--now-ms", o.now_ms, "Check time");
  validate_cmd->add_option("--out", o.out, "Report log to write");

  auto* apply_cmd = app.add_subcommand("apply", "Apply validation reports to the FAQ store");
  config_opt(apply_cmd);
  apply_cmd->add_option("--input", o.input, "Candidate log")->required();
  apply_cmd->add_option("--reports", o.reports, "Report log")->required();
  apply_cmd->add_option("--now-ms", o.now_ms, "Lifecycle time");
  apply_cmd->add_option("--ttl-ms", o.ttl_ms, "Entry lifetime");
  apply_cmd->add_option("--out", o.out, "FAQ store to write (default: the configured store)");

  auto* list_cmd = app.add_subcommand("list", "List FAQ entries");
  config_opt(list_cmd);
  list_cmd->add_option("--status", o.status, "candidate, validated or expired");

  auto* serve_cmd = app.add_subcommand("serve", "Run the streaming service");
  config_opt(serve_cmd);
  serve_cmd->add_option("--listen", o.listen, "host:port (overrides config and CALLASSIST_LISTEN)");
  serve_cmd->add_option("--out", o.out, "Directory for session journals on shutdown");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*replay_cmd) return cmd_replay(o);
    if (*kpis_cmd) return cmd_kpis(o);
    if (*ab_cmd) return cmd_ab(o);
    if (*mine_cmd) return cmd_mine(o);
    if (*validate_cmd) return cmd_validate(o);
    if (*apply_cmd) return cmd_apply(o);
    if (*list_cmd) return cmd_list(o);
    if (*serve_cmd) return cmd_serve(o);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const Json::exception& e) {
    std::cerr << "error [parse]: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
