// Writes the synthetic A/B cohorts: one conversation script per call plus
// expected.json with the ground-truth KPIs the scripts were built to hit.
// Deliberately independent of the engine so the expectations are not
// computed by the code under test.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct CohortPlan {
  std::string name;
  std::string cohort;
  double mean_duration_s;
  double spread_s;
  int calls;
  int enquiries;
  int bookings;
  bool assisted;
};

struct Topic {
  std::string opener;
  std::string agent_reply;
  std::string closer;
};

const std::vector<Topic> kTopics = {
    {"I want to get a travel plan for my trip", "We have packs for Asia, Europe and a global roaming option.",
     "That sounds great, thank you."},
    {"I was charged twice on my bill this month", "I can see the duplicate payment and will reverse it.",
     "Thanks, that is helpful."},
    {"I want to change my plan to get more data", "The Plus plan gives you forty gigabytes from next cycle.",
     "Sounds good, thanks."},
};

Json event(const std::string& sid, int turn, const char* speaker, const std::string& text, std::int64_t t0,
           std::int64_t t1) {
  return Json{{"session_id", sid}, {"turn_index", turn}, {"speaker", speaker}, {"raw_text", text},
              {"lang", "en"},      {"t_start_ms", t0},   {"t_end_ms", t1},     {"is_final", true}};
}

struct Totals {
  double duration_sum = 0.0;
  int calls = 0;
  int enquiries = 0;
  int bookings = 0;
  int faq_clicks = 0;
  int rag_clicks = 0;
};

Totals write_cohort(const fs::path& dir, const CohortPlan& plan, const std::string& config_version) {
  fs::create_directories(dir);
  Totals totals;
  for (int i = 0; i < plan.calls; ++i) {
    char id[64];
    std::snprintf(id, sizeof id, "%s-%03d", plan.name.c_str(), i + 1);
    const std::string sid = id;
    // Offsets cycle -2..2 so every block of five calls averages exactly the mean.
    const double duration_s = plan.mean_duration_s + (i % 5 - 2) * plan.spread_s;
    const auto end_ms = static_cast<std::int64_t>(duration_s * 1000.0);
    const bool enquiry = i < plan.enquiries;
    const bool booking = i < plan.bookings;
    const Topic& topic = kTopics[static_cast<std::size_t>(i) % kTopics.size()];

    std::vector<Json> lines;
    lines.push_back(Json{{"meta",
                          {{"session_id", sid},
                           {"cohort", plan.cohort},
                           {"converted_enquiry", enquiry},
                           {"converted_booking", booking},
                           {"config_version", config_version},
                           {"started_at_ms", 0}}}});
    lines.push_back(event(sid, 0, "agent", "Thank you for calling, how can I help?", 0, end_ms / 10));
    lines.push_back(event(sid, 1, "customer", topic.opener, end_ms / 10 + 200, end_ms * 3 / 10));
    if (plan.assisted) {
      lines.push_back(Json{{"action", "click_query"}, {"query_id", sid + "-q1"}, {"t_ms", end_ms * 3 / 10 + 100}});
      ++totals.faq_clicks;
      if (i % 2 == 0) {
        lines.push_back(Json{{"action", "click_query"}, {"query_id", sid + "-q2"}, {"t_ms", end_ms * 3 / 10 + 150}});
        ++totals.rag_clicks;
      }
    }
    lines.push_back(event(sid, 2, "agent", topic.agent_reply, end_ms * 35 / 100, end_ms * 7 / 10));
    lines.push_back(event(sid, 3, "customer", topic.closer, end_ms * 75 / 100, end_ms));
    lines.push_back(Json{{"action", "end_call"}, {"t_ms", end_ms + 500}});

    std::ofstream out(dir / (sid + ".ndjson"), std::ios::binary);
    for (const auto& l : lines) out << l.dump() << '\n';

    totals.duration_sum += static_cast<double>(end_ms) / 1000.0;
    ++totals.calls;
    totals.enquiries += enquiry ? 1 : 0;
    totals.bookings += booking ? 1 : 0;
  }
  return totals;
}

Json stats(const Totals& t) {
  return Json{{"calls", t.calls},
              {"aht_s", t.duration_sum / t.calls},
              {"enquiries", t.enquiries},
              {"bookings", t.bookings},
              {"l2e_rate", static_cast<double>(t.enquiries) / t.calls},
              {"booking_rate", t.enquiries ? static_cast<double>(t.bookings) / t.enquiries : 0.0}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate synthetic A/B cohort scripts"};
  std::string out_dir = "fixtures/cohorts";
  std::string config_version = "2025.1";
  int calls = 50;
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--config-version", config_version, "Config version stamped into every script");
  app.add_option("--calls", calls, "Calls per cohort")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  // Ground truth: control 4m43s, assisted 2m55s; 15/50 vs 20/50 enquiries.
  const CohortPlan assisted{"assisted", "assisted", 175.0, 12.0, calls, calls * 2 / 5, calls * 7 / 25, true};
  const CohortPlan control{"control", "control", 283.0, 20.0, calls, calls * 3 / 10, calls / 5, false};

  const fs::path root(out_dir);
  const Totals a = write_cohort(root / "assisted", assisted, config_version);
  const Totals c = write_cohort(root / "control", control, config_version);

  const Json sa = stats(a);
  const Json sc = stats(c);
  const double aht_a = sa["aht_s"].get<double>();
  const double aht_c = sc["aht_s"].get<double>();
  const auto uplift = [](double treated, double base) { return 100.0 * (treated - base) / base; };
  Json expected{{"assisted", sa},
                {"control", sc},
                {"aht_reduction_pct", 100.0 * (aht_c - aht_a) / aht_c},
                {"l2e_uplift_pct", uplift(sa["l2e_rate"].get<double>(), sc["l2e_rate"].get<double>())},
                {"booking_uplift_pct", uplift(sa["booking_rate"].get<double>(), sc["booking_rate"].get<double>())},
                {"routed", a.faq_clicks + a.rag_clicks},
                {"faq_hits", a.faq_clicks}};
  std::ofstream(root / "expected.json", std::ios::binary) << expected.dump(2) << '\n';
  std::cout << "wrote " << a.calls + c.calls << " scripts to " << root.string() << '\n';
  return 0;
}
