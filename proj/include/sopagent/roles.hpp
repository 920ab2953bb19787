// SPDX-License-Identifier: Apache-2.0
//
// Prompt construction and reply parsing for the three role contracts:
// state decision, action execution and user interaction.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "sopagent/action_repository.hpp"
#include "sopagent/execution_memory.hpp"

namespace sopagent {

enum class Role { state, action, user };

std::string_view to_string(Role role) noexcept;
std::optional<Role> parse_role(std::string_view name);

using SlotMap = std::map<std::string, std::string>;

struct StateDecision {
    std::string thought;
    std::string next_action;

    friend bool operator==(const StateDecision&, const StateDecision&) = default;
};

struct ActionData {
    std::string thought;
    std::optional<std::string> user_interaction;
    std::optional<std::map<std::string, std::string>> params;
    std::optional<std::string> search_query;

    friend bool operator==(const ActionData&, const ActionData&) = default;
};

struct UserTurn {
    std::string thought;
    Feedback input_validation = Feedback::fail;
    std::string user_response;
    SlotMap slots;
    /// Spell-corrected reply; falls back to the raw reply when a backend omits it.
    std::optional<std::string> corrected_reply;

    friend bool operator==(const UserTurn&, const UserTurn&) = default;
};

using RoleResponse = std::variant<StateDecision, ActionData, UserTurn>;

/// The three prompt templates. Slot markers are the literal tokens
/// <sop_workflow>, <execution_memory>, <action>, <action_type>,
/// <action_context>, <question>, <user_reply> and <expected_format>.
struct PromptTemplates {
    std::string state;
    std::string action;
    std::string user;

    /// Templates compiled into the library from data/prompts.
    static const PromptTemplates& builtin();
    /// Reads state.txt, action.txt and user.txt from a directory.
    static PromptTemplates load(const std::string& directory);

    [[nodiscard]] const std::string& for_role(Role role) const;
};

/// Single pass substitution: replacement values are never rescanned.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& slots);

std::string build_state_prompt(const PromptTemplates& t, std::string_view workflow_text,
                               std::string_view memory_text);
/// Throws Error{InvalidArgument} for an empty action.
std::string build_action_prompt(const PromptTemplates& t, std::string_view action,
                                std::string_view action_type, std::string_view action_context);
/// Quotes, backslashes and newlines in the reply are escaped so the prompt
/// stays one block. Throws Error{InvalidArgument} for an empty expected format.
std::string build_user_prompt(const PromptTemplates& t, std::string_view question,
                              std::string_view user_reply, std::string_view expected_format);

/// Extracts the first balanced JSON object from free text (code fences and
/// surrounding prose are tolerated) and decodes the role's typed reply.
/// Throws Error{MalformedResponse}.
RoleResponse parse_role_response(Role role, std::string_view raw_text);
StateDecision parse_state_decision(std::string_view raw_text);
ActionData parse_action_data(std::string_view raw_text);
UserTurn parse_user_turn(std::string_view raw_text);

/// Extra check for the dispatched task: the key the task needs must be present.
/// Throws Error{MalformedResponse}.
void require_task_key(const ActionData& data, ActionType dispatched);

std::string to_json_text(const StateDecision& v);
std::string to_json_text(const ActionData& v);
std::string to_json_text(const UserTurn& v);

}  // namespace sopagent
