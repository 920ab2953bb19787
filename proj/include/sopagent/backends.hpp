// SPDX-License-Identifier: Apache-2.0
//
// Backend contract for the three roles. Every request carries the rendered
// prompt (what a hosted model reads) and the structured context it was built
// from (what the scripted oracle reads). Backends always answer with raw
// text, which the engine parses the same way whatever the backend.
#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sopagent/action_repository.hpp"
#include "sopagent/execution_memory.hpp"
#include "sopagent/roles.hpp"
#include "sopagent/sop.hpp"

namespace sopagent {

class RetrievalIndex;

struct StateRequest {
    std::shared_ptr<const SopWorkflow> workflow;
    ExecutionMemory memory;
};

struct ActionRequest {
    std::string action;
    ActionTypeSet types;            // the task being dispatched
    std::string context_text;       // <action_context> as rendered into the prompt
    std::vector<std::string> params;  // api_call: required params
    SlotMap slots;                  // api_call: slots collected so far
    std::string message;            // message_to_user: text to convey
    ExecutionMemory memory;         // external_knowledge: history
};

struct UserRequest {
    std::string question;
    std::string reply;
    std::string expected_format;
};

struct RoleRequest {
    Role role = Role::state;
    std::string prompt;
    std::variant<StateRequest, ActionRequest, UserRequest> context;
};

class Backend {
public:
    virtual ~Backend() = default;
    /// Raw model text. May throw Error{ProviderUnavailable | Timeout |
    /// NoMatchingBranch}.
    virtual std::string complete(const RoleRequest& request) = 0;
    /// Cheap reachability probe used before a session is admitted.
    [[nodiscard]] virtual bool available() const { return true; }
    [[nodiscard]] virtual std::string name() const = 0;
};

/// Deterministic rule-based implementation of all three roles.
class ScriptedBackend final : public Backend {
public:
    ScriptedBackend(std::shared_ptr<const ActionRepository> gar,
                    std::shared_ptr<const RetrievalIndex> index);

    std::string complete(const RoleRequest& request) override;
    [[nodiscard]] std::string name() const override { return "scripted"; }

private:
    std::shared_ptr<const ActionRepository> gar_;
    std::shared_ptr<const RetrievalIndex> index_;
};

struct BackendConfig {
    enum class Kind { scripted, remote };

    Kind kind = Kind::scripted;
    std::optional<std::string> endpoint;
    std::optional<std::string> model_name;
    std::optional<std::string> api_key;  // never logged
    std::chrono::milliseconds timeout{30000};
    int max_retries = 2;

    /// Throws Error{InvalidArgument} unless endpoint is set iff kind is remote.
    void validate() const;
};

/// Single-turn chat completion over HTTP:
///   POST <endpoint> {"model": m, "messages": [{"role": "user", "content": prompt}]}
/// The reply text is choices[0].message.content. Transport errors are retried
/// max_retries times with exponential backoff.
/// Throws Error{ProviderUnavailable} or Error{Timeout}.
std::string remote_complete(const BackendConfig& config, Role role, std::string_view prompt);

class RemoteBackend final : public Backend {
public:
    explicit RemoteBackend(BackendConfig config);

    std::string complete(const RoleRequest& request) override;
    [[nodiscard]] bool available() const override;
    [[nodiscard]] std::string name() const override;

private:
    BackendConfig config_;
};

}  // namespace sopagent
