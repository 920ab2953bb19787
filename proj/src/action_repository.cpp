// SPDX-License-Identifier: Apache-2.0
#include "sopagent/action_repository.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sopagent/error.hpp"
#include "sopagent/text.hpp"

namespace sopagent {

namespace {

constexpr ActionType kAllTypes[] = {ActionType::api_call, ActionType::ask_user_input,
                                    ActionType::message_to_user, ActionType::external_knowledge};

constexpr std::string_view kColumns[] = {"action", "action_type", "user_interaction_metadata", "API",
                                         "params"};

ActionTypeSet parse_type_list(const std::vector<std::string>& names, const std::string& action) {
    ActionTypeSet set;
    for (const auto& raw : names) {
        const std::string name = text::trim(raw);
        if (name.empty()) continue;
        auto t = parse_action_type(name);
        if (!t) throw Error(ErrorCode::InvariantError, "'" + action + "': unknown action type '" + name + "'");
        set.insert(*t);
    }
    return set;
}

std::vector<std::string> split_csv_cell(std::string_view cell) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : cell) {
        if (c == ',') {
            if (auto t = text::trim(cur); !t.empty()) out.push_back(t);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (auto t = text::trim(cur); !t.empty()) out.push_back(t);
    return out;
}

std::optional<std::string> optional_text(const nlohmann::json& v) {
    if (v.is_null()) return std::nullopt;
    if (!v.is_string()) throw Error(ErrorCode::SchemaError, "expected a string or null");
    return v.get<std::string>();
}

GarEntry entry_from_json(const nlohmann::json& row, std::size_t index) {
    if (!row.is_object()) throw Error(ErrorCode::SchemaError, "row " + std::to_string(index) + " is not an object");
    for (auto column : kColumns) {
        if (!row.contains(std::string(column))) {
            throw Error(ErrorCode::SchemaError,
                        "row " + std::to_string(index) + " is missing column '" + std::string(column) + "'");
        }
    }
    GarEntry e;
    if (!row["action"].is_string()) throw Error(ErrorCode::SchemaError, "row " + std::to_string(index) + ": action must be a string");
    e.action = text::collapse_whitespace(row["action"].get<std::string>());

    const auto& types = row["action_type"];
    std::vector<std::string> type_names;
    if (types.is_string()) {
        type_names = split_csv_cell(types.get<std::string>());
    } else if (types.is_array()) {
        for (const auto& t : types) {
            if (!t.is_string()) throw Error(ErrorCode::SchemaError, "'" + e.action + "': action_type entries must be strings");
            type_names.push_back(t.get<std::string>());
        }
    } else {
        throw Error(ErrorCode::SchemaError, "'" + e.action + "': action_type must be a string or an array");
    }
    e.action_types = parse_type_list(type_names, e.action);
    e.user_interaction_metadata = optional_text(row["user_interaction_metadata"]);
    e.api = optional_text(row["API"]);
    if (e.api && text::trim(*e.api).empty()) e.api.reset();

    const auto& params = row["params"];
    if (params.is_string()) {
        e.params = split_csv_cell(params.get<std::string>());
    } else if (params.is_array()) {
        for (const auto& p : params) {
            if (!p.is_string()) throw Error(ErrorCode::SchemaError, "'" + e.action + "': params must be strings");
            e.params.push_back(p.get<std::string>());
        }
    } else if (!params.is_null()) {
        throw Error(ErrorCode::SchemaError, "'" + e.action + "': params must be an array");
    }
    return e;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

std::string_view to_string(ActionType type) noexcept {
    switch (type) {
        case ActionType::api_call: return "api_call";
        case ActionType::ask_user_input: return "ask_user_input";
        case ActionType::message_to_user: return "message_to_user";
        case ActionType::external_knowledge: return "external_knowledge";
    }
    return "api_call";
}

std::optional<ActionType> parse_action_type(std::string_view name) {
    for (auto t : kAllTypes) {
        if (to_string(t) == name) return t;
    }
    return std::nullopt;
}

std::vector<ActionType> ActionTypeSet::values() const {
    std::vector<ActionType> out;
    for (auto t : kAllTypes) {
        if (contains(t)) out.push_back(t);
    }
    return out;
}

std::string ActionTypeSet::str() const {
    std::string out;
    for (auto t : values()) {
        if (!out.empty()) out += ", ";
        out += to_string(t);
    }
    return out;
}

void validate_entry(const GarEntry& e) {
    if (text::trim(e.action).empty()) throw Error(ErrorCode::InvariantError, "empty action identifier");
    if (e.action_types.empty()) throw Error(ErrorCode::InvariantError, "'" + e.action + "': no action type");
    const bool api = e.has(ActionType::api_call);
    if (api != e.api.has_value()) {
        throw Error(ErrorCode::InvariantError,
                    "'" + e.action + "': API endpoint must be present exactly when api_call is a type");
    }
    if (!e.params.empty() && !e.api) {
        throw Error(ErrorCode::InvariantError, "'" + e.action + "': params without an API endpoint");
    }
    const bool interactive = e.has(ActionType::ask_user_input) || e.has(ActionType::message_to_user);
    if (interactive != e.user_interaction_metadata.has_value()) {
        throw Error(ErrorCode::InvariantError,
                    "'" + e.action +
                        "': user_interaction_metadata must be present exactly for ask_user_input / message_to_user");
    }
}

ActionRepository::ActionRepository(std::vector<GarEntry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw Error(ErrorCode::EmptyRepository, "the action repository has no rows");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        validate_entry(entries_[i]);
        auto [it, inserted] = by_action_.emplace(entries_[i].action, i);
        if (!inserted) throw Error(ErrorCode::DuplicateAction, "'" + entries_[i].action + "' appears twice");
    }
}

const GarEntry* ActionRepository::find(std::string_view action) const noexcept {
    auto it = by_action_.find(action);
    return it == by_action_.end() ? nullptr : &entries_[it->second];
}

const GarEntry& ActionRepository::get_entry(std::string_view action) const {
    if (const auto* e = find(action)) return *e;
    throw Error(ErrorCode::UnknownAction, "'" + std::string(action) + "' is not in the action repository");
}

const GarEntry* ActionRepository::terminal_entry() const noexcept {
    for (const auto& e : entries_) {
        if (text::contains_ci(e.action, "terminate the flow")) return &e;
    }
    return nullptr;
}

ActionRepository load_gar_json(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, std::string("not valid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw Error(ErrorCode::SchemaError, "the GAR file must be a JSON array of rows");
    std::vector<GarEntry> entries;
    entries.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) entries.push_back(entry_from_json(doc[i], i));
    return ActionRepository(std::move(entries));
}

ActionRepository load_gar(const std::string& path) { return load_gar_json(read_file(path)); }

ActionRepository load_gar_tsv(std::string_view tsv_text) {
    auto lines = text::split_lines(tsv_text);
    std::erase_if(lines, [](const std::string& l) { return text::trim(l).empty(); });
    if (lines.empty()) throw Error(ErrorCode::EmptyRepository, "empty table");

    auto split_tabs = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cur;
        for (char c : line) {
            if (c == '\t') {
                cells.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        cells.push_back(cur);
        return cells;
    };

    const auto header = split_tabs(lines.front());
    std::vector<std::size_t> col(std::size(kColumns));
    for (std::size_t c = 0; c < std::size(kColumns); ++c) {
        auto it = std::find_if(header.begin(), header.end(),
                               [&](const std::string& h) { return text::trim(h) == kColumns[c]; });
        if (it == header.end()) {
            throw Error(ErrorCode::SchemaError, "missing column '" + std::string(kColumns[c]) + "'");
        }
        col[c] = static_cast<std::size_t>(it - header.begin());
    }

    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto cells = split_tabs(lines[i]);
        cells.resize(std::max(cells.size(), header.size()));
        auto cell = [&](std::size_t c) { return text::trim(cells[col[c]]); };
        nlohmann::json row;
        row["action"] = cell(0);
        row["action_type"] = cell(1);
        const auto meta = cell(2);
        const auto api = cell(3);
        row["user_interaction_metadata"] = meta.empty() ? nlohmann::json(nullptr) : nlohmann::json(meta);
        row["API"] = api.empty() ? nlohmann::json(nullptr) : nlohmann::json(api);
        row["params"] = cell(4);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(ErrorCode::EmptyRepository, "the table has a header but no rows");
    return load_gar_json(rows.dump());
}

}  // namespace sopagent
