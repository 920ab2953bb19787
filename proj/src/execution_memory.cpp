// SPDX-License-Identifier: Apache-2.0
#include "sopagent/execution_memory.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "sopagent/error.hpp"
#include "sopagent/text.hpp"

namespace sopagent {

namespace {

std::string one_line(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return out;
}

}  // namespace

std::string_view to_string(Feedback f) noexcept { return f == Feedback::success ? "success" : "fail"; }

std::optional<Feedback> parse_feedback(std::string_view s) {
    const auto t = text::to_lower(text::trim(s));
    if (t == "success") return Feedback::success;
    if (t == "fail" || t == "failure" || t == "failed") return Feedback::fail;
    return std::nullopt;
}

void ExecutionMemory::append(MemoryEntry entry) {
    if (text::trim(entry.action).empty()) throw Error(ErrorCode::InvalidArgument, "memory entry without an action");
    if (text::trim(entry.observation).empty()) {
        throw Error(ErrorCode::InvalidArgument, "memory entry for '" + entry.action + "' has an empty observation");
    }
    entries_.push_back(std::move(entry));
}

std::size_t ExecutionMemory::repeat_count(std::string_view action) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(), [&](const MemoryEntry& e) { return e.action == action; }));
}

std::string ExecutionMemory::serialize_for_prompt() const {
    std::string out;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (i != 0) out += '\n';
        out += std::to_string(i + 1) + ". action:" + one_line(e.action) + ", observation:" + one_line(e.observation) +
               ", feedback:" + std::string(to_string(e.feedback));
    }
    return out;
}

std::string ExecutionMemory::to_jsonl() const {
    std::string out;
    for (const auto& e : entries_) {
        nlohmann::json j{{"action", e.action}, {"observation", e.observation}, {"feedback", to_string(e.feedback)}};
        out += j.dump() + '\n';
    }
    return out;
}

ExecutionMemory ExecutionMemory::from_jsonl(std::string_view text_in) {
    ExecutionMemory memory;
    for (const auto& line : text::split_lines(text_in)) {
        if (text::trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::InvalidArgument, std::string("bad transcript line: ") + e.what());
        }
        auto fb = parse_feedback(j.value("feedback", ""));
        if (!fb) throw Error(ErrorCode::InvalidArgument, "bad feedback in transcript line");
        memory.append({j.value("action", ""), j.value("observation", ""), *fb});
    }
    return memory;
}

}  // namespace sopagent
