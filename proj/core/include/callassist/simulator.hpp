#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "callassist/orchestrator.hpp"

namespace callassist {

// ---------------------------------------------------------------------------
// Conversation scripts

/// Optional first line {"meta":{...}} of a script: CRM ground truth the
/// transcript cannot carry.
struct ScriptMeta {
  std::string session_id;
  std::optional<Cohort> cohort;
  bool converted_enquiry = false;
  bool converted_booking = false;
  std::optional<std::string> outcome;
  std::string config_version;
  std::optional<std::int64_t> started_at_ms;
};

struct ScriptStep {
  std::size_t line = 0;
  std::optional<TranscriptEvent> event;
  std::optional<AgentAction> action;
};

struct Script {
  std::string name;
  ScriptMeta meta;
  std::vector<ScriptStep> steps;

  std::string session_id() const { return meta.session_id; }
  std::int64_t started_at_ms() const;
};

/// Event lines use the eight script-format fields; action lines carry
/// "action" and may omit session_id. Throws Error(parse) with the line number.
Script parse_script(std::string_view text, const std::string& name = "script");
Script load_script(const std::filesystem::path& path);

/// Every *.ndjson script of a directory, by file name.
std::vector<Script> load_script_directory(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Replay

enum class ReplayMode { in_process, wire };
ReplayMode parse_replay_mode(const std::string& text);

struct ReplayResult {
  Journal journal;
  CallRecord record;
  std::vector<AnswerRecord> answers;
};

/// Feeds the script in order (appending end_call when the script has none)
/// and derives the call record from the journal. Wire mode runs the same
/// frames through a private service on a loopback port.
ReplayResult replay(const Script& script, std::shared_ptr<const Resources> resources, ReplayMode mode,
                    EngineOptions options = {});

/// Answers as delivered, first delivery per query only.
std::vector<AnswerRecord> answers_from_journal(const Journal& journal);

/// Duration from the first event start to the last event end; FAQ/RAG counts
/// from the delivered answers; conversions from the script metadata.
CallRecord derive_call_record(const Script& script, const Journal& journal, const std::string& config_version);

// ---------------------------------------------------------------------------
// KPIs

struct CohortStats {
  std::size_t calls = 0;
  double aht_s = 0.0;
  std::size_t enquiries = 0;
  std::size_t bookings = 0;
  double l2e_rate = 0.0;
  double booking_rate = 0.0;
};

struct MetricsReport {
  CohortStats assisted;
  CohortStats control;
  double aht_reduction_pct = 0.0;
  SavingsReport savings;
  double faq_hit_rate = 0.0;
  double latency_saved_hours = 0.0;
  std::optional<double> l2e_uplift_pct;
  std::optional<double> booking_uplift_pct;
  std::vector<std::string> warnings;
};

void to_json(Json& j, const CohortStats& v);
void to_json(Json& j, const MetricsReport& v);

/// Throws Error(missing_cohort) unless both cohorts have at least one call.
MetricsReport compute_kpis(std::span<const CallRecord> records, std::span<const AnswerRecord> answers,
                           double seconds_saved_per_hit);

/// 100 * (treated - base) / base, or nullopt when base is 0.
std::optional<double> uplift_pct(double treated, double base);

struct AbReport {
  MetricsReport metrics;
  std::vector<CallRecord> records;
  std::string text;
  std::string plot_csv;
};

/// Replays both directories, treating A as the assisted cohort and B as
/// control, then delegates to compute_kpis.
AbReport ab_compare(const std::filesystem::path& cohort_a, const std::filesystem::path& cohort_b,
                    std::shared_ptr<const Resources> resources, ReplayMode mode = ReplayMode::in_process);

std::string render_report(const MetricsReport& metrics);
std::string render_plot_csv(const MetricsReport& metrics);

/// report.txt, plot_data.csv and report.json under `dir`.
void write_ab_outputs(const std::filesystem::path& dir, const AbReport& report);

}  // namespace callassist
