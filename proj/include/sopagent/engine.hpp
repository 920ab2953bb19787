// SPDX-License-Identifier: Apache-2.0
//
// The execution loop: decide -> retrieve -> execute -> observe -> remember.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sopagent/action_repository.hpp"
#include "sopagent/backends.hpp"
#include "sopagent/environments.hpp"
#include "sopagent/execution_memory.hpp"
#include "sopagent/retrieval.hpp"
#include "sopagent/roles.hpp"
#include "sopagent/sop.hpp"

namespace sopagent {

struct EngineConfig {
    /// Executions allowed per action (first run plus two repeats).
    std::size_t max_action_repeats = 3;
    /// Failed decision attempts (malformed reply, unmatched action, backend
    /// outage) tolerated for one pending decision before grace termination.
    std::size_t max_backend_retries = 2;
    std::string grace_message =
        "I am sorry, I am unable to resolve this request right now. "
        "A support specialist will follow up with you shortly.";
    std::string completion_message = "Thank you for contacting seller support.";
};

enum class SessionStatus { running, terminated_normal, terminated_grace };

std::string_view to_string(SessionStatus status) noexcept;

enum class EventKind {
    agent_message,
    agent_question,
    knowledge_answer,
    grace_termination,
    normal_termination,
    state_trace,
};

std::string_view to_string(EventKind kind) noexcept;

struct SessionEvent {
    std::string session_id;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::agent_message;
    std::string payload;  // plain text, or a JSON object for state_trace
};

/// Immutable resources shared by every session.
struct AgentToolkit {
    std::shared_ptr<const ActionRepository> gar;
    std::shared_ptr<const RetrievalIndex> index;
    PromptTemplates prompts = PromptTemplates::builtin();
};

struct RoleBackends {
    std::shared_ptr<Backend> state;
    std::shared_ptr<Backend> action;
    std::shared_ptr<Backend> user;

    static RoleBackends all(std::shared_ptr<Backend> backend) { return {backend, backend, backend}; }
};

struct SessionEnvironment {
    std::shared_ptr<ApiTool> api;
    std::shared_ptr<const KnowledgeClient> knowledge;
    std::shared_ptr<UserChannel> user;
};

struct SessionState {
    std::string session_id;
    std::shared_ptr<const SopWorkflow> workflow;
    ExecutionMemory memory;
    SlotMap slot_store;
    std::map<std::string, std::size_t> repeat_counters;
    SessionStatus status = SessionStatus::running;
    std::size_t turns = 0;
    std::string termination_reason;
};

/// What the observer sees for each state decision.
struct DecisionRecord {
    ExecutionMemory memory_before;
    std::optional<std::string> raw_next_action;
    /// Matched GAR id; empty when the decision could not be resolved.
    std::optional<std::string> action;
};

/// What the observer sees for each action-role call.
struct ActionTaskRecord {
    ActionType task;
    ActionRequest request;
    std::optional<ActionData> produced;  // empty when the reply was unusable
};

struct StepObserver {
    std::function<void(const DecisionRecord&)> on_decision;
    std::function<void(const ActionTaskRecord&)> on_action_task;
};

enum class LoopGuardVerdict { proceed, grace_terminate };

/// Pure check: would executing `action` once more exceed the allowance?
LoopGuardVerdict loop_guard_verdict(const ExecutionMemory& memory, std::string_view action,
                                    std::size_t max_action_repeats);

struct Transcript {
    std::string session_id;
    std::vector<MemoryEntry> entries;
    std::vector<SessionEvent> events;
    SessionStatus status = SessionStatus::running;
    std::string termination_reason;

    /// One JSON object per event, then a final status line.
    [[nodiscard]] std::string to_jsonl() const;
};

class Session {
public:
    Session(std::string session_id, std::shared_ptr<const SopWorkflow> workflow,
            std::shared_ptr<const AgentToolkit> toolkit, RoleBackends backends,
            SessionEnvironment environment, EngineConfig config = {});

    [[nodiscard]] const SessionState& state() const noexcept { return state_; }
    [[nodiscard]] bool running() const noexcept { return state_.status == SessionStatus::running; }
    [[nodiscard]] const std::vector<SessionEvent>& events() const noexcept { return events_; }
    [[nodiscard]] const EngineConfig& config() const noexcept { return config_; }

    /// Called synchronously for every event, in seq order.
    void set_event_listener(std::function<void(const SessionEvent&)> listener);
    void set_observer(StepObserver observer);

    /// Seeds the history (resuming a stored session or replaying a trace).
    void restore(const ExecutionMemory& memory, const SlotMap& slots = {});

    /// One full turn. No-op once the session has terminated; never throws for
    /// environment or backend failures.
    void step();

    /// Applies the repeat allowance to the pending action; on grace_terminate
    /// the user gets the grace message and the session ends.
    LoopGuardVerdict enforce_loop_guard(std::string_view action);

    [[nodiscard]] Transcript transcript() const;

private:
    std::optional<std::string> decide();
    void execute(const GarEntry& entry);
    std::optional<ApiResult> run_api(const GarEntry& entry);
    std::optional<ActionData> call_action_role(const GarEntry& entry, ActionType task,
                                               ActionRequest request);
    std::optional<UserTurn> call_user_role(const UserRequest& request);
    void remember(MemoryEntry entry);
    void emit(EventKind kind, std::string payload);
    void say(OutboundKind kind, EventKind event, const std::string& text);
    void terminate(SessionStatus status, std::string reason);

    SessionState state_;
    std::shared_ptr<const AgentToolkit> toolkit_;
    RoleBackends backends_;
    SessionEnvironment env_;
    EngineConfig config_;
    std::vector<SessionEvent> events_;
    std::function<void(const SessionEvent&)> listener_;
    StepObserver observer_;
    std::string workflow_text_;
};

/// Lints the workflow (Error{LintFailure} when anything is reported), then
/// runs the first decision.
std::unique_ptr<Session> start_session(std::string session_id,
                                       std::shared_ptr<const SopWorkflow> workflow,
                                       std::shared_ptr<const AgentToolkit> toolkit,
                                       RoleBackends backends, SessionEnvironment environment,
                                       EngineConfig config = {},
                                       std::function<void(const SessionEvent&)> listener = {});

/// Steps until the session terminates. The hard ceiling (4 x node count turns)
/// grace-terminates a session that would otherwise keep going.
Transcript run_to_completion(Session& session);

inline std::size_t turn_ceiling(const SopWorkflow& workflow) { return 4 * workflow.size(); }

}  // namespace sopagent
