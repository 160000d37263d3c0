#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "callassist/types.hpp"
#include "callassist/understanding.hpp"

namespace callassist {

struct WorkflowStep {
  std::string step_id;
  std::string instruction;
  std::vector<EntityKind> requires_entities;
};

struct WorkflowDefinition {
  std::string workflow_id;
  std::string title;
  std::vector<WorkflowStep> steps;
  std::vector<std::string> terminal_outcomes;
};

class WorkflowCatalog {
 public:
  WorkflowCatalog() = default;
  /// Throws Error(config) on duplicate step ids, empty step lists or missing
  /// terminal outcomes.
  static WorkflowCatalog from_json(const Json& doc);

  void add(WorkflowDefinition def);
  const WorkflowDefinition* find(const std::string& workflow_id) const;
  const std::map<std::string, WorkflowDefinition>& definitions() const noexcept { return defs_; }

 private:
  std::map<std::string, WorkflowDefinition> defs_;
};

/// Load-time cross check: every intent must name a workflow in the catalog.
void validate_registry(const IntentRegistry& registry, const WorkflowCatalog& catalog);

/// Creates one active instance per newly triggered label whose workflow has
/// not been instantiated in this session yet. New instances are appended to
/// state.workflows and returned.
std::vector<WorkflowInstance> trigger_workflows(std::span<const std::string> newly_triggered,
                                                const IntentRegistry& registry, const WorkflowCatalog& catalog,
                                                SessionState& state);

struct NextAction {
  std::string step_id;
  std::string instruction;
  bool ready = false;

  bool operator==(const NextAction&) const = default;
};

void to_json(Json& j, const NextAction& v);

/// Current step plus up to `lookahead` following steps. A step is ready when
/// every entity kind it requires has been extracted.
std::vector<NextAction> next_best_actions(const WorkflowInstance& instance, const WorkflowCatalog& catalog,
                                          const SessionState& state, std::size_t lookahead = 2);

struct StepCompletion {
  std::string workflow_id;
  std::string step_id;
  std::optional<std::string> outcome;
  std::int64_t turn_index = 0;
};

/// Completes the current step. Completing the last step sets status
/// completed with the supplied outcome (or the definition's first outcome).
/// Throws Error(ordering) for any step other than the current one and
/// Error(state) when the instance is no longer active.
WorkflowInstance advance(WorkflowInstance instance, const StepCompletion& action, const WorkflowCatalog& catalog);

/// Call end: active instances become abandoned with no outcome.
void abandon_active(SessionState& state);

}  // namespace callassist
