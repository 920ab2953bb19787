// SPDX-License-Identifier: Apache-2.0
//
// SOP workflows written as indented text.
//
// Every non-blank line becomes one node. Lines starting with "if " / "else"
// are condition nodes, lines containing "terminate the flow" are terminal
// nodes, everything else is an action. A line indented deeper than its
// predecessor opens a sub-block owned by that line; returning to an earlier
// indent closes blocks, Python style. Edges only ever point to later lines,
// so the result is acyclic by construction.
#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sopagent {

enum class NodeId : std::uint32_t {};

constexpr std::uint32_t index_of(NodeId id) noexcept { return static_cast<std::uint32_t>(id); }

enum class NodeKind { action, condition, terminal };

std::string_view to_string(NodeKind kind) noexcept;

struct SopEdge {
    std::optional<std::string> guard;  // condition text, set on edges into and out of conditions
    NodeId target;

    friend bool operator==(const SopEdge&, const SopEdge&) = default;
};

struct SopNode {
    NodeId id{};
    NodeKind kind = NodeKind::action;
    std::string label;  // conditions are stored without the trailing ':'
    int depth = 0;      // block nesting level, needed to render the text back
    std::vector<SopEdge> children;
};

struct SopWorkflow {
    std::string name;
    NodeId root{};
    std::map<NodeId, SopNode> nodes;
    std::string source_text;

    [[nodiscard]] const SopNode& node(NodeId id) const;
    [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
};

/// True for "if ...", "else", "else if ..." lines (case-insensitive, trimmed).
bool is_condition_line(std::string_view line);
bool is_terminal_label(std::string_view label);

/// Throws Error{IndentationError | EmptyWorkflow | DanglingBranch | InvalidRoot}.
SopWorkflow parse_sop(std::string_view text, std::string name = "sop");

/// Canonical text: two spaces per nesting level, ':' after conditions.
std::string render_sop(const SopWorkflow& workflow);

SopWorkflow load_sop_file(const std::string& path);

}  // namespace sopagent
