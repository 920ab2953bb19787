// SPDX-License-Identifier: Apache-2.0
//
// Synthetic session generation and role accuracy scoring.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sopagent/engine.hpp"
#include "sopagent/scripts.hpp"
#include "sopagent/workspace.hpp"

namespace sopagent {

enum class InputCategory { valid, chitchat, gibberish, question, invalid, bad_format };

std::string_view to_string(InputCategory c) noexcept;
std::optional<InputCategory> parse_input_category(std::string_view s);

/// Suite file:
///   {
///     "sop": "listing_blocked", "sessions": 80,
///     "user_inputs": {"<action>": {"valid": [...], "question": [...], ...}},
///     "api_responses": {"<endpoint>": [{"response": ...} | {"error": ...}]},
///     "category_weights": {"valid": 2.0}        (optional, default uniform)
///   }
struct SyntheticSuite {
    std::string name;
    std::string sop;
    std::size_t sessions = 0;
    std::map<std::string, std::map<InputCategory, std::vector<std::string>>> user_inputs;
    std::map<std::string, std::vector<ApiResult>> api_responses;
    std::map<InputCategory, double> category_weights;
};

SyntheticSuite suite_from_json(const nlohmann::json& j, std::string name);
SyntheticSuite load_suite(const std::string& path);
/// Every *.json suite in a directory, sorted by file name.
std::vector<SyntheticSuite> load_suite_dir(const std::string& dir);

struct GeneratedSession {
    std::string name;  // "<suite>#<index>"
    SessionScript script;
};

/// Samples n scripts. Each interactive action gets a queue of replies (category
/// first, then value) and each endpoint a queue of outcomes, enough to reach
/// the loop guard. Throws Error{EmptyPool}.
std::vector<GeneratedSession> generate_sessions(const SyntheticSuite& suite, std::size_t n,
                                                std::uint64_t seed, std::size_t queue_length = 3);
/// Each suite's default session count; suite i uses seed + i.
std::vector<GeneratedSession> generate_suite_sessions(std::span<const SyntheticSuite> suites,
                                                      std::uint64_t seed);

/// Sentinel label for "no action could be decided".
inline constexpr std::string_view kUnresolvedState = "<unresolved>";

struct StateLabel {
    std::string predicted;
    std::string expected;
};

/// Correct states under the point-of-failure rule: every state from the
/// first mismatch onwards counts as incorrect.
std::size_t count_correct_states(std::span<const StateLabel> labels);

struct SessionOutcome {
    std::string name;
    std::vector<StateLabel> states;
    /// Action-role calls made after each state decision.
    std::vector<std::vector<ActionTaskRecord>> tasks;
    SessionStatus status = SessionStatus::running;
    std::size_t turns = 0;
};

struct TaskScore {
    std::size_t correct = 0;
    std::size_t total = 0;

    [[nodiscard]] double accuracy() const noexcept {
        return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
    }
    TaskScore& operator+=(const TaskScore& o) noexcept {
        correct += o.correct;
        total += o.total;
        return *this;
    }
    friend bool operator==(const TaskScore&, const TaskScore&) = default;
};

struct AccuracyReport {
    std::size_t sessions = 0;
    std::size_t states = 0;
    std::size_t state_correct = 0;
    TaskScore question_generation;
    TaskScore parameter_extraction;
    TaskScore search_query_generation;

    [[nodiscard]] double state_accuracy() const noexcept {
        return states == 0 ? 0.0 : static_cast<double>(state_correct) / static_cast<double>(states);
    }
    AccuracyReport& operator+=(const AccuracyReport& o) noexcept;
    friend bool operator==(const AccuracyReport&, const AccuracyReport&) = default;

    [[nodiscard]] nlohmann::json to_json(std::string_view backend = {}) const;
    /// Human-readable accuracy table.
    [[nodiscard]] std::string to_table(std::string_view backend = {}) const;
};

/// Runs one generated session with the predictor backends and labels every
/// state decision with the oracle's choice for the same memory.
SessionOutcome run_scored_session(const Workspace& ws, const GeneratedSession& session,
                                  RoleBackends predictor);

AccuracyReport score_state_accuracy(std::span<const SessionOutcome> outcomes);
/// Scores action-role calls made after correct state decisions only.
AccuracyReport score_action_tasks(std::span<const SessionOutcome> outcomes);

/// Fresh predictor backends for one session.
using PredictorFactory = std::function<RoleBackends()>;

/// Runs and scores all sessions, in parallel when `threads` > 1.
AccuracyReport evaluate(const Workspace& ws, std::span<const GeneratedSession> sessions,
                        const PredictorFactory& predictor, unsigned threads = 0);

}  // namespace sopagent
