#include "callassist/workflow.hpp"

#include <algorithm>
#include <set>

#include "callassist/errors.hpp"

namespace callassist {

WorkflowCatalog WorkflowCatalog::from_json(const Json& doc) {
  WorkflowCatalog catalog;
  for (const auto& w : doc.at("workflows")) {
    WorkflowDefinition def;
    def.workflow_id = w.at("workflow_id").get<std::string>();
    def.title = w.value("title", def.workflow_id);
    for (const auto& s : w.at("steps")) {
      WorkflowStep step;
      step.step_id = s.at("step_id").get<std::string>();
      step.instruction = s.value("instruction", std::string{});
      step.requires_entities = s.value("requires", std::vector<EntityKind>{});
      def.steps.push_back(std::move(step));
    }
    def.terminal_outcomes = w.value("terminal_outcomes", std::vector<std::string>{});
    catalog.add(std::move(def));
  }
  return catalog;
}

void WorkflowCatalog::add(WorkflowDefinition def) {
  if (def.workflow_id.empty()) throw Error(ErrorCode::config, "workflow without id");
  if (def.steps.empty()) throw Error(ErrorCode::config, "workflow " + def.workflow_id + " has no steps");
  if (def.terminal_outcomes.empty()) {
    throw Error(ErrorCode::config, "workflow " + def.workflow_id + " has no terminal outcomes");
  }
  std::set<std::string> ids;
  for (const auto& s : def.steps) {
    if (!ids.insert(s.step_id).second) {
      throw Error(ErrorCode::config, "workflow " + def.workflow_id + " repeats step " + s.step_id);
    }
  }
  if (defs_.contains(def.workflow_id)) {
    throw Error(ErrorCode::config, "workflow " + def.workflow_id + " defined twice");
  }
  const std::string id = def.workflow_id;
  defs_.emplace(id, std::move(def));
}

const WorkflowDefinition* WorkflowCatalog::find(const std::string& workflow_id) const {
  const auto it = defs_.find(workflow_id);
  return it == defs_.end() ? nullptr : &it->second;
}

void validate_registry(const IntentRegistry& registry, const WorkflowCatalog& catalog) {
  for (const auto& [label, spec] : registry.intents()) {
    if (!catalog.find(spec.workflow_id)) {
      throw Error(ErrorCode::config, "intent " + label + " references unknown workflow " + spec.workflow_id);
    }
  }
}

std::vector<WorkflowInstance> trigger_workflows(std::span<const std::string> newly_triggered,
                                                const IntentRegistry& registry, const WorkflowCatalog& catalog,
                                                SessionState& state) {
  std::vector<WorkflowInstance> created;
  for (const auto& label : newly_triggered) {
    const IntentSpec* spec = registry.find(label);
    if (!spec) throw Error(ErrorCode::config, "unknown intent " + label);
    if (!catalog.find(spec->workflow_id)) {
      throw Error(ErrorCode::config, "intent " + label + " references unknown workflow " + spec->workflow_id);
    }
    const bool exists = std::any_of(state.workflows.begin(), state.workflows.end(), [&](const WorkflowInstance& w) {
      return w.workflow_id == spec->workflow_id;
    });
    if (exists) continue;

    WorkflowInstance inst;
    inst.workflow_id = spec->workflow_id;
    inst.session_id = state.session_id.value();
    const auto hyp = state.intents.find(label);
    inst.triggered_at_turn = (hyp != state.intents.end() && hyp->second.triggered_at_turn)
                                 ? *hyp->second.triggered_at_turn
                                 : state.last_final_turn;
    state.workflows.push_back(inst);
    created.push_back(std::move(inst));
  }
  return created;
}

void to_json(Json& j, const NextAction& v) {
  j = Json{{"step_id", v.step_id}, {"instruction", v.instruction}, {"ready", v.ready}};
}

std::vector<NextAction> next_best_actions(const WorkflowInstance& instance, const WorkflowCatalog& catalog,
                                          const SessionState& state, std::size_t lookahead) {
  std::vector<NextAction> out;
  const WorkflowDefinition* def = catalog.find(instance.workflow_id);
  if (!def || instance.status != WorkflowStatus::active) return out;
  const std::size_t last = std::min(def->steps.size(), instance.cursor + lookahead + 1);
  for (std::size_t i = instance.cursor; i < last; ++i) {
    const auto& step = def->steps[i];
    const bool ready = std::all_of(step.requires_entities.begin(), step.requires_entities.end(),
                                   [&](EntityKind k) { return has_entity(state, k); });
    out.push_back({step.step_id, step.instruction, ready});
  }
  return out;
}

WorkflowInstance advance(WorkflowInstance instance, const StepCompletion& action, const WorkflowCatalog& catalog) {
  const WorkflowDefinition* def = catalog.find(instance.workflow_id);
  if (!def) throw Error(ErrorCode::invalid_reference, "unknown workflow " + instance.workflow_id);
  if (instance.status != WorkflowStatus::active) {
    throw Error(ErrorCode::state, "workflow " + instance.workflow_id + " is no longer active");
  }
  if (instance.cursor >= def->steps.size() || def->steps[instance.cursor].step_id != action.step_id) {
    const std::string expected =
        instance.cursor < def->steps.size() ? def->steps[instance.cursor].step_id : std::string("<none>");
    throw Error(ErrorCode::ordering,
                "step " + action.step_id + " is not the current step of " + instance.workflow_id + " (expected " +
                    expected + ")");
  }
  const bool last = instance.cursor + 1 == def->steps.size();
  if (last && action.outcome &&
      std::find(def->terminal_outcomes.begin(), def->terminal_outcomes.end(), *action.outcome) ==
          def->terminal_outcomes.end()) {
    throw Error(ErrorCode::invalid_reference,
                "outcome " + *action.outcome + " is not a terminal outcome of " + instance.workflow_id);
  }

  instance.completed_steps.push_back({action.step_id, action.turn_index});
  ++instance.cursor;
  if (last) {
    instance.status = WorkflowStatus::completed;
    instance.outcome = action.outcome ? *action.outcome : def->terminal_outcomes.front();
  }
  return instance;
}

void abandon_active(SessionState& state) {
  for (auto& w : state.workflows) {
    if (w.status == WorkflowStatus::active) {
      w.status = WorkflowStatus::abandoned;
      w.outcome.reset();
    }
  }
}

}  // namespace callassist
