// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sopagent {

enum class ActionType : std::uint8_t {
    api_call = 1U << 0U,
    ask_user_input = 1U << 1U,
    message_to_user = 1U << 2U,
    external_knowledge = 1U << 3U,
};

std::string_view to_string(ActionType type) noexcept;
std::optional<ActionType> parse_action_type(std::string_view name);

/// Small set of ActionType values, kept in declaration order.
class ActionTypeSet {
public:
    ActionTypeSet() = default;
    ActionTypeSet(std::initializer_list<ActionType> types) {
        for (auto t : types) insert(t);
    }

    void insert(ActionType t) noexcept { bits_ |= static_cast<std::uint8_t>(t); }
    [[nodiscard]] bool contains(ActionType t) const noexcept {
        return (bits_ & static_cast<std::uint8_t>(t)) != 0;
    }
    [[nodiscard]] bool empty() const noexcept { return bits_ == 0; }
    [[nodiscard]] std::vector<ActionType> values() const;
    /// "api_call, ask_user_input"
    [[nodiscard]] std::string str() const;

    friend bool operator==(ActionTypeSet, ActionTypeSet) = default;

private:
    std::uint8_t bits_ = 0;
};

struct GarEntry {
    std::string action;
    ActionTypeSet action_types;
    std::optional<std::string> user_interaction_metadata;
    std::optional<std::string> api;
    std::vector<std::string> params;

    [[nodiscard]] bool has(ActionType t) const noexcept { return action_types.contains(t); }
};

/// Throws Error{InvariantError} when the row breaks a GAR invariant.
void validate_entry(const GarEntry& entry);

/// Immutable table of every action available to every SOP. Load order is
/// preserved because retrieval breaks ties by it.
class ActionRepository {
public:
    explicit ActionRepository(std::vector<GarEntry> entries);

    [[nodiscard]] const GarEntry& get_entry(std::string_view action) const;
    [[nodiscard]] const GarEntry* find(std::string_view action) const noexcept;
    [[nodiscard]] const std::vector<GarEntry>& entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

    /// The entry that ends a flow ("terminate the flow"), if the table has one.
    [[nodiscard]] const GarEntry* terminal_entry() const noexcept;

private:
    std::vector<GarEntry> entries_;
    std::map<std::string, std::size_t, std::less<>> by_action_;
};

/// JSON array of rows with keys action, action_type, user_interaction_metadata,
/// API, params. action_type may be an array or a comma separated string.
ActionRepository load_gar_json(std::string_view json_text);
ActionRepository load_gar(const std::string& path);

/// Tab separated import with the same five columns as a header row;
/// action_type and params cells are comma separated.
ActionRepository load_gar_tsv(std::string_view tsv_text);

}  // namespace sopagent
