// SPDX-License-Identifier: Apache-2.0
#include "sopagent/engine.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "sopagent/error.hpp"
#include "sopagent/lint.hpp"
#include "sopagent/text.hpp"

namespace sopagent {

using nlohmann::json;

namespace {

constexpr std::string_view kTerminateFlow = "terminate the flow";

bool retryable(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedResponse:
        case ErrorCode::BelowThreshold:
        case ErrorCode::ProviderUnavailable:
        case ErrorCode::Timeout:
        case ErrorCode::MissingParam:
            return true;
        default:
            return false;
    }
}

std::string api_context(const GarEntry& entry, const SlotMap& slots) {
    std::ostringstream out;
    out << "Required params: " << text::join(entry.params, ", ") << "\nSlots:";
    if (slots.empty()) out << " none";
    for (const auto& [k, v] : slots) out << "\n" << k << ": " << v;
    return out.str();
}

}  // namespace

std::string_view to_string(SessionStatus status) noexcept {
    switch (status) {
        case SessionStatus::running: return "running";
        case SessionStatus::terminated_normal: return "terminated_normal";
        case SessionStatus::terminated_grace: return "terminated_grace";
    }
    return "running";
}

std::string_view to_string(EventKind kind) noexcept {
    switch (kind) {
        case EventKind::agent_message: return "agent_message";
        case EventKind::agent_question: return "agent_question";
        case EventKind::knowledge_answer: return "knowledge_answer";
        case EventKind::grace_termination: return "grace_termination";
        case EventKind::normal_termination: return "normal_termination";
        case EventKind::state_trace: return "state_trace";
    }
    return "agent_message";
}

LoopGuardVerdict loop_guard_verdict(const ExecutionMemory& memory, std::string_view action,
                                    std::size_t max_action_repeats) {
    return memory.repeat_count(action) >= max_action_repeats ? LoopGuardVerdict::grace_terminate
                                                             : LoopGuardVerdict::proceed;
}

std::string Transcript::to_jsonl() const {
    std::string out;
    for (const auto& e : events) {
        json line{{"session_id", e.session_id}, {"seq", e.seq}, {"kind", std::string(to_string(e.kind))}};
        if (e.kind == EventKind::state_trace) line["payload"] = json::parse(e.payload);
        else line["payload"] = e.payload;
        out += line.dump() + "\n";
    }
    json tail{{"session_id", session_id},
              {"status", std::string(to_string(status))},
              {"termination_reason", termination_reason},
              {"entries", entries.size()}};
    out += tail.dump() + "\n";
    return out;
}

Session::Session(std::string session_id, std::shared_ptr<const SopWorkflow> workflow,
                 std::shared_ptr<const AgentToolkit> toolkit, RoleBackends backends,
                 SessionEnvironment environment, EngineConfig config)
    : toolkit_(std::move(toolkit)), backends_(std::move(backends)), env_(std::move(environment)),
      config_(std::move(config)) {
    if (!workflow || !toolkit_ || !toolkit_->gar || !toolkit_->index) {
        throw Error(ErrorCode::InvalidArgument, "session needs a workflow, GAR and retrieval index");
    }
    if (!backends_.state || !backends_.action || !backends_.user) {
        throw Error(ErrorCode::InvalidArgument, "session needs a backend for every role");
    }
    if (!env_.api || !env_.user) throw Error(ErrorCode::InvalidArgument, "session needs an API tool and user channel");
    state_.session_id = std::move(session_id);
    state_.workflow = std::move(workflow);
    workflow_text_ = render_sop(*state_.workflow);
}

void Session::set_event_listener(std::function<void(const SessionEvent&)> listener) {
    listener_ = std::move(listener);
}

void Session::set_observer(StepObserver observer) { observer_ = std::move(observer); }

void Session::restore(const ExecutionMemory& memory, const SlotMap& slots) {
    state_.memory = memory;
    state_.repeat_counters.clear();
    for (const auto& e : memory.entries()) ++state_.repeat_counters[e.action];
    for (const auto& [k, v] : slots) state_.slot_store[k] = v;
}

void Session::step() {
    if (!running()) return;
    if (state_.turns >= turn_ceiling(*state_.workflow)) {
        terminate(SessionStatus::terminated_grace, "turn ceiling reached");
        return;
    }
    const auto action = decide();
    if (!action) return;
    const auto& entry = toolkit_->gar->get_entry(*action);
    if (entry.action == kTerminateFlow) {
        terminate(SessionStatus::terminated_normal, "workflow reached terminate the flow");
        return;
    }
    if (enforce_loop_guard(entry.action) == LoopGuardVerdict::grace_terminate) return;
    execute(entry);
    ++state_.turns;
}

LoopGuardVerdict Session::enforce_loop_guard(std::string_view action) {
    const auto verdict = loop_guard_verdict(state_.memory, action, config_.max_action_repeats);
    if (verdict == LoopGuardVerdict::grace_terminate) {
        terminate(SessionStatus::terminated_grace,
                  "action '" + std::string(action) + "' would run more than " +
                      std::to_string(config_.max_action_repeats) + " times");
    }
    return verdict;
}

std::optional<std::string> Session::decide() {
    DecisionRecord record{state_.memory, std::nullopt, std::nullopt};
    std::string last_error;
    for (std::size_t attempt = 0; attempt <= config_.max_backend_retries; ++attempt) {
        RoleRequest req{Role::state,
                        build_state_prompt(toolkit_->prompts, workflow_text_, state_.memory.serialize_for_prompt()),
                        StateRequest{state_.workflow, state_.memory}};
        try {
            const auto decision = parse_state_decision(backends_.state->complete(req));
            record.raw_next_action = decision.next_action;
            const auto match = toolkit_->index->match_action(decision.next_action);
            record.action = match.action;
            if (observer_.on_decision) observer_.on_decision(record);
            return match.action;
        } catch (const Error& e) {
            last_error = e.what();
            if (!retryable(e.code())) break;
        } catch (const std::exception& e) {
            last_error = e.what();
        }
    }
    if (observer_.on_decision) observer_.on_decision(record);
    terminate(SessionStatus::terminated_grace, "state decision failed: " + last_error);
    return std::nullopt;
}

std::optional<ActionData> Session::call_action_role(const GarEntry& entry, ActionType task, ActionRequest request) {
    std::string last_error;
    for (std::size_t attempt = 0; attempt <= config_.max_backend_retries; ++attempt) {
        RoleRequest req{Role::action,
                        build_action_prompt(toolkit_->prompts, entry.action, to_string(task), request.context_text),
                        request};
        try {
            auto data = parse_action_data(backends_.action->complete(req));
            require_task_key(data, task);
            if (observer_.on_action_task) observer_.on_action_task({task, request, data});
            return data;
        } catch (const Error& e) {
            last_error = e.what();
            if (!retryable(e.code())) break;
        } catch (const std::exception& e) {
            last_error = e.what();
        }
    }
    if (observer_.on_action_task) observer_.on_action_task({task, request, std::nullopt});
    terminate(SessionStatus::terminated_grace, "action role failed for '" + entry.action + "': " + last_error);
    return std::nullopt;
}

std::optional<UserTurn> Session::call_user_role(const UserRequest& request) {
    std::string last_error;
    for (std::size_t attempt = 0; attempt <= config_.max_backend_retries; ++attempt) {
        RoleRequest req{Role::user,
                        build_user_prompt(toolkit_->prompts, request.question, request.reply, request.expected_format),
                        request};
        try {
            return parse_user_turn(backends_.user->complete(req));
        } catch (const Error& e) {
            last_error = e.what();
            if (!retryable(e.code())) break;
        } catch (const std::exception& e) {
            last_error = e.what();
        }
    }
    terminate(SessionStatus::terminated_grace, "user role failed: " + last_error);
    return std::nullopt;
}

std::optional<ApiResult> Session::run_api(const GarEntry& entry) {
    ActionRequest request;
    request.action = entry.action;
    request.types = {ActionType::api_call};
    request.context_text = api_context(entry, state_.slot_store);
    request.params = entry.params;
    request.slots = state_.slot_store;
    const auto data = call_action_role(entry, ActionType::api_call, request);
    if (!data) return std::nullopt;

    ParamMap params;
    for (const auto& p : entry.params) {
        const auto it = data->params ? data->params->find(p) : std::map<std::string, std::string>::const_iterator{};
        if (!data->params || it == data->params->end() || text::trim(it->second).empty()) {
            remember({entry.action, "missing parameter " + p, Feedback::fail});
            return std::nullopt;
        }
        params.emplace(p, it->second);
    }
    ApiResult result;
    try {
        result = env_.api->call_api(*entry.api, params);
    } catch (const Error& e) {
        terminate(SessionStatus::terminated_grace, e.what());
        return std::nullopt;
    }
    if (result.feedback == Feedback::fail) {
        say(OutboundKind::message, EventKind::agent_message, "I am retrying the " + entry.action + ".");
        remember({entry.action, result.observation, Feedback::fail});
        return std::nullopt;
    }
    return result;
}

void Session::execute(const GarEntry& entry) {
    std::optional<ApiResult> api;
    if (entry.has(ActionType::api_call)) {
        api = run_api(entry);
        if (!api) return;
    }

    if (entry.has(ActionType::ask_user_input)) {
        const std::string expected = entry.user_interaction_metadata.value_or("");
        ActionRequest request;
        request.action = entry.action;
        request.types = {ActionType::ask_user_input};
        request.context_text = "Expected input: " + expected;
        const auto data = call_action_role(entry, ActionType::ask_user_input, request);
        if (!data) return;
        const auto question = *data->user_interaction;
        say(OutboundKind::question, EventKind::agent_question, question);
        std::string reply;
        try {
            reply = env_.user->receive(entry.action);
        } catch (const Error& e) {
            terminate(SessionStatus::terminated_grace, e.what());
            return;
        }
        const auto turn = call_user_role({question, reply, expected});
        if (!turn) return;
        if (!text::trim(turn->user_response).empty()) {
            say(OutboundKind::message, EventKind::agent_message, turn->user_response);
        }
        if (turn->input_validation == Feedback::success) {
            for (const auto& [k, v] : turn->slots) state_.slot_store[k] = v;
        }
        auto observation = text::collapse_whitespace(turn->corrected_reply.value_or(reply));
        if (observation.empty()) observation = text::collapse_whitespace(reply);
        if (observation.empty()) observation = "empty reply";
        remember({entry.action, observation, turn->input_validation});
        return;
    }

    if (entry.has(ActionType::message_to_user)) {
        const auto message =
            text::replace_all(entry.user_interaction_metadata.value_or(""), "{result}", api ? api->observation : "");
        ActionRequest request;
        request.action = entry.action;
        request.types = {ActionType::message_to_user};
        request.context_text = message;
        request.message = message;
        const auto data = call_action_role(entry, ActionType::message_to_user, request);
        if (!data) return;
        say(OutboundKind::message, EventKind::agent_message, *data->user_interaction);
        remember({entry.action, api ? api->observation : std::string(kDoneObservation), Feedback::success});
        return;
    }

    if (entry.has(ActionType::external_knowledge)) {
        ActionRequest request;
        request.action = entry.action;
        request.types = {ActionType::external_knowledge};
        request.context_text = state_.memory.serialize_for_prompt();
        request.memory = state_.memory;
        const auto data = call_action_role(entry, ActionType::external_knowledge, request);
        if (!data) return;
        KnowledgeAnswer answer{"", Feedback::fail};
        if (env_.knowledge) answer = query_knowledge(*env_.knowledge, *data->search_query);
        if (answer.feedback == Feedback::success) {
            say(OutboundKind::knowledge_answer, EventKind::knowledge_answer, answer.answer);
            remember({entry.action, std::string(kDoneObservation), Feedback::success});
        } else {
            remember({entry.action, "no answer found", Feedback::fail});
        }
        return;
    }

    if (api) remember({entry.action, api->observation, Feedback::success});
}

void Session::remember(MemoryEntry entry) {
    json trace{{"action", entry.action},
               {"observation", entry.observation},
               {"feedback", std::string(to_string(entry.feedback))}};
    ++state_.repeat_counters[entry.action];
    state_.memory.append(std::move(entry));
    emit(EventKind::state_trace, trace.dump());
}

void Session::emit(EventKind kind, std::string payload) {
    SessionEvent e{state_.session_id, events_.size() + 1, kind, std::move(payload)};
    events_.push_back(e);
    if (listener_) listener_(e);
}

void Session::say(OutboundKind kind, EventKind event, const std::string& message) {
    env_.user->send({kind, message});
    emit(event, message);
}

void Session::terminate(SessionStatus status, std::string reason) {
    if (!running()) return;
    state_.status = status;
    state_.termination_reason = std::move(reason);
    if (status == SessionStatus::terminated_grace) {
        say(OutboundKind::farewell, EventKind::grace_termination, config_.grace_message);
    } else {
        say(OutboundKind::farewell, EventKind::normal_termination, config_.completion_message);
    }
}

Transcript Session::transcript() const {
    return {state_.session_id, state_.memory.entries(), events_, state_.status, state_.termination_reason};
}

std::unique_ptr<Session> start_session(std::string session_id, std::shared_ptr<const SopWorkflow> workflow,
                                       std::shared_ptr<const AgentToolkit> toolkit, RoleBackends backends,
                                       SessionEnvironment environment, EngineConfig config,
                                       std::function<void(const SessionEvent&)> listener) {
    if (!workflow || !toolkit || !toolkit->gar || !toolkit->index) {
        throw Error(ErrorCode::InvalidArgument, "start_session needs a workflow, GAR and retrieval index");
    }
    const auto diagnostics = lint_sop(*workflow, *toolkit->gar, *toolkit->index);
    if (!diagnostics.empty()) {
        std::vector<std::string> lines;
        for (const auto& d : diagnostics) lines.push_back(d.message);
        throw Error(ErrorCode::LintFailure, text::join(lines, "; "));
    }
    auto session = std::make_unique<Session>(std::move(session_id), std::move(workflow), std::move(toolkit),
                                             std::move(backends), std::move(environment), std::move(config));
    if (listener) session->set_event_listener(std::move(listener));
    session->step();
    return session;
}

Transcript run_to_completion(Session& session) {
    while (session.running()) session.step();
    return session.transcript();
}

}  // namespace sopagent
