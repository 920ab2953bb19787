// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sopagent {

enum class Feedback { success, fail };

std::string_view to_string(Feedback f) noexcept;
std::optional<Feedback> parse_feedback(std::string_view s);

struct MemoryEntry {
    std::string action;
    std::string observation;
    Feedback feedback = Feedback::success;

    friend bool operator==(const MemoryEntry&, const MemoryEntry&) = default;
};

/// Observation used for message_to_user and external_knowledge actions.
inline constexpr std::string_view kDoneObservation = "done";

/// Append-only history of one session.
class ExecutionMemory {
public:
    ExecutionMemory() = default;

    /// Rejects entries with an empty action or observation.
    void append(MemoryEntry entry);

    [[nodiscard]] const std::vector<MemoryEntry>& entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] const MemoryEntry& back() const { return entries_.back(); }

    [[nodiscard]] std::size_t repeat_count(std::string_view action) const noexcept;

    /// One numbered line per entry:
    ///   N. action:<a>, observation:<o>, feedback:<f>
    /// Lines are joined with '\n' (no trailing newline); newlines inside
    /// fields become single spaces.
    [[nodiscard]] std::string serialize_for_prompt() const;

    /// One JSON object per line, for transcripts.
    [[nodiscard]] std::string to_jsonl() const;
    static ExecutionMemory from_jsonl(std::string_view text);

private:
    std::vector<MemoryEntry> entries_;
};

}  // namespace sopagent
