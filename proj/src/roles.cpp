// SPDX-License-Identifier: Apache-2.0
#include "sopagent/roles.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "prompts_builtin.hpp"
#include "sopagent/error.hpp"
#include "sopagent/text.hpp"

namespace sopagent {

using nlohmann::json;

std::string_view to_string(Role role) noexcept {
    switch (role) {
        case Role::state: return "state";
        case Role::action: return "action";
        case Role::user: return "user";
    }
    return "state";
}

std::optional<Role> parse_role(std::string_view name) {
    const auto n = text::to_lower(text::trim(name));
    if (n == "state") return Role::state;
    if (n == "action") return Role::action;
    if (n == "user") return Role::user;
    return std::nullopt;
}

const PromptTemplates& PromptTemplates::builtin() {
    static const PromptTemplates t{detail::kStatePromptText, detail::kActionPromptText, detail::kUserPromptText};
    return t;
}

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

PromptTemplates PromptTemplates::load(const std::string& directory) {
    const std::filesystem::path dir(directory);
    return {read_file(dir / "state.txt"), read_file(dir / "action.txt"), read_file(dir / "user.txt")};
}

const std::string& PromptTemplates::for_role(Role role) const {
    switch (role) {
        case Role::state: return state;
        case Role::action: return action;
        case Role::user: return user;
    }
    return state;
}

std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& slots) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '<') {
            const auto close = tmpl.find('>', i + 1);
            if (close != std::string_view::npos) {
                const auto it = slots.find(std::string(tmpl.substr(i + 1, close - i - 1)));
                if (it != slots.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

std::string build_state_prompt(const PromptTemplates& t, std::string_view workflow_text,
                               std::string_view memory_text) {
    return fill_template(t.state, {{"sop_workflow", std::string(workflow_text)},
                                   {"execution_memory", std::string(memory_text)}});
}

std::string build_action_prompt(const PromptTemplates& t, std::string_view action, std::string_view action_type,
                                std::string_view action_context) {
    if (text::trim(action).empty()) throw Error(ErrorCode::InvalidArgument, "action prompt needs an action");
    return fill_template(t.action, {{"action", std::string(action)},
                                    {"action_type", std::string(action_type)},
                                    {"action_context", std::string(action_context)}});
}

namespace {

std::string escape_reply(std::string_view reply) {
    std::string out;
    out.reserve(reply.size());
    for (char c : reply) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string build_user_prompt(const PromptTemplates& t, std::string_view question, std::string_view user_reply,
                              std::string_view expected_format) {
    if (text::trim(expected_format).empty()) {
        throw Error(ErrorCode::InvalidArgument, "user prompt needs an expected format");
    }
    return fill_template(t.user, {{"question", std::string(question)},
                                  {"user_reply", escape_reply(user_reply)},
                                  {"expected_format", std::string(expected_format)}});
}

namespace {

// First balanced {...} in the text, skipping braces inside JSON strings.
std::optional<std::string_view> first_object(std::string_view s) {
    for (std::size_t start = s.find('{'); start != std::string_view::npos; start = s.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < s.size(); ++i) {
            const char c = s[i];
            if (in_string) {
                if (escaped) escaped = false;
                else if (c == '\\') escaped = true;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '{') ++depth;
            else if (c == '}' && --depth == 0) {
                const auto candidate = s.substr(start, i - start + 1);
                if (json::accept(candidate)) return candidate;
                break;
            }
        }
    }
    return std::nullopt;
}

json parse_object(std::string_view raw) {
    const auto obj = first_object(raw);
    if (!obj) throw Error(ErrorCode::MalformedResponse, "no JSON object in backend reply");
    return json::parse(*obj);
}

std::string scalar_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return {};
    return v.dump();
}

std::string required_string(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorCode::MalformedResponse, std::string("missing key '") + key + "'");
    return scalar_text(j.at(key));
}

std::string thought_of(const json& j) { return j.contains("thought") ? scalar_text(j.at("thought")) : std::string(); }

std::optional<std::string> optional_string(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    auto s = scalar_text(j.at(key));
    if (text::trim(s).empty()) return std::nullopt;
    return s;
}

std::map<std::string, std::string> string_map(const json& v, const char* what) {
    std::map<std::string, std::string> out;
    if (v.is_null()) return out;
    if (!v.is_object()) throw Error(ErrorCode::MalformedResponse, std::string(what) + " must be an object");
    for (const auto& [k, val] : v.items()) {
        if (text::trim(k).empty()) throw Error(ErrorCode::MalformedResponse, std::string(what) + " has an empty key");
        out.emplace(k, scalar_text(val));
    }
    return out;
}

}  // namespace

StateDecision parse_state_decision(std::string_view raw_text) {
    const auto j = parse_object(raw_text);
    StateDecision d{thought_of(j), text::trim(required_string(j, "next_action"))};
    if (d.next_action.empty()) throw Error(ErrorCode::MalformedResponse, "empty next_action");
    return d;
}

ActionData parse_action_data(std::string_view raw_text) {
    const auto j = parse_object(raw_text);
    ActionData d;
    d.thought = thought_of(j);
    d.user_interaction = optional_string(j, "user_interaction");
    d.search_query = optional_string(j, "search_query");
    if (j.contains("params") && !j.at("params").is_null()) d.params = string_map(j.at("params"), "params");
    if (!d.user_interaction && !d.search_query && !d.params) {
        throw Error(ErrorCode::MalformedResponse, "action reply carries no user_interaction, params or search_query");
    }
    return d;
}

UserTurn parse_user_turn(std::string_view raw_text) {
    const auto j = parse_object(raw_text);
    UserTurn u;
    u.thought = thought_of(j);
    const auto validation = parse_feedback(required_string(j, "input_validation"));
    if (!validation) throw Error(ErrorCode::MalformedResponse, "input_validation must be success or fail");
    u.input_validation = *validation;
    u.user_response = required_string(j, "user_response");
    if (j.contains("slots")) u.slots = string_map(j.at("slots"), "slots");
    u.corrected_reply = optional_string(j, "corrected_reply");
    return u;
}

RoleResponse parse_role_response(Role role, std::string_view raw_text) {
    try {
        switch (role) {
            case Role::state: return parse_state_decision(raw_text);
            case Role::action: return parse_action_data(raw_text);
            case Role::user: return parse_user_turn(raw_text);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedResponse, e.what());
    }
    throw Error(ErrorCode::InvalidArgument, "unknown role");
}

void require_task_key(const ActionData& data, ActionType dispatched) {
    const char* missing = nullptr;
    switch (dispatched) {
        case ActionType::ask_user_input:
        case ActionType::message_to_user:
            if (!data.user_interaction) missing = "user_interaction";
            break;
        case ActionType::api_call:
            // an api without params is legal; the engine checks required names
            break;
        case ActionType::external_knowledge:
            if (!data.search_query) missing = "search_query";
            break;
    }
    if (missing) throw Error(ErrorCode::MalformedResponse, std::string("action reply lacks ") + missing);
}

std::string to_json_text(const StateDecision& v) {
    return json{{"thought", v.thought}, {"next_action", v.next_action}}.dump();
}

std::string to_json_text(const ActionData& v) {
    json j{{"thought", v.thought}};
    j["user_interaction"] = v.user_interaction ? json(*v.user_interaction) : json(nullptr);
    j["params"] = v.params ? json(*v.params) : json(nullptr);
    j["search_query"] = v.search_query ? json(*v.search_query) : json(nullptr);
    return j.dump();
}

std::string to_json_text(const UserTurn& v) {
    json j{{"thought", v.thought},
           {"input_validation", std::string(to_string(v.input_validation))},
           {"user_response", v.user_response},
           {"slots", v.slots}};
    if (v.corrected_reply) j["corrected_reply"] = *v.corrected_reply;
    return j.dump();
}

}  // namespace sopagent
