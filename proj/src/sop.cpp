// SPDX-License-Identifier: Apache-2.0
#include "sopagent/sop.hpp"

#include <fstream>
#include <sstream>

#include "sopagent/error.hpp"
#include "sopagent/text.hpp"

namespace sopagent {

namespace {

struct Item {
    NodeKind kind = NodeKind::action;
    std::string label;
    int depth = 0;
    std::size_t line_no = 0;
    std::vector<std::size_t> block;  // items of the sub-block this line opens
};

class Linker {
public:
    Linker(const std::vector<Item>& items, SopWorkflow& wf) : items_(items), wf_(wf) {}

    // Entry points of block[k..]: a single line, or the whole run of
    // consecutive conditions starting at k.
    std::vector<std::size_t> entries(const std::vector<std::size_t>& block, std::size_t k) const {
        std::vector<std::size_t> out;
        if (k >= block.size()) return out;
        if (items_[block[k]].kind != NodeKind::condition) return {block[k]};
        for (std::size_t j = k; j < block.size() && items_[block[j]].kind == NodeKind::condition; ++j) {
            out.push_back(block[j]);
        }
        return out;
    }

    void link(const std::vector<std::size_t>& block, const std::vector<std::size_t>& continuation) {
        for (std::size_t k = 0; k < block.size(); ++k) {
            const Item& item = items_[block[k]];
            if (item.kind == NodeKind::condition) {
                std::size_t run_end = k;
                while (run_end < block.size() && items_[block[run_end]].kind == NodeKind::condition) ++run_end;
                const auto after = run_end < block.size() ? entries(block, run_end) : continuation;
                connect(block[k], entries(item.block, 0));
                link(item.block, after);
                continue;
            }
            const auto next = k + 1 < block.size() ? entries(block, k + 1) : continuation;
            if (item.block.empty()) {
                if (item.kind == NodeKind::action) connect(block[k], next);
            } else {
                if (item.kind == NodeKind::action) connect(block[k], entries(item.block, 0));
                link(item.block, next);
            }
        }
    }

private:
    void connect(std::size_t from, const std::vector<std::size_t>& targets) {
        auto& node = wf_.nodes.at(NodeId{static_cast<std::uint32_t>(from)});
        for (auto t : targets) {
            SopEdge edge{std::nullopt, NodeId{static_cast<std::uint32_t>(t)}};
            if (items_[t].kind == NodeKind::condition) {
                edge.guard = items_[t].label;
            } else if (items_[from].kind == NodeKind::condition) {
                edge.guard = items_[from].label;
            }
            node.children.push_back(std::move(edge));
        }
    }

    const std::vector<Item>& items_;
    SopWorkflow& wf_;
};

std::string strip_condition_colon(std::string label) {
    while (!label.empty() && (label.back() == ':' || label.back() == ' ')) label.pop_back();
    return label;
}

}  // namespace

std::string_view to_string(NodeKind kind) noexcept {
    switch (kind) {
        case NodeKind::action: return "action";
        case NodeKind::condition: return "condition";
        case NodeKind::terminal: return "terminal";
    }
    return "action";
}

const SopNode& SopWorkflow::node(NodeId id) const {
    auto it = nodes.find(id);
    if (it == nodes.end()) {
        throw Error(ErrorCode::InvalidArgument, "unknown node id " + std::to_string(index_of(id)));
    }
    return it->second;
}

bool is_condition_line(std::string_view line) {
    const std::string t = text::to_lower(text::trim(line));
    if (t.rfind("if ", 0) == 0 || t == "if" || t.rfind("if:", 0) == 0) return true;
    if (t.rfind("else", 0) == 0) {
        return t.size() == 4 || t[4] == ' ' || t[4] == ':';
    }
    return false;
}

bool is_terminal_label(std::string_view label) { return text::contains_ci(label, "terminate the flow"); }

SopWorkflow parse_sop(std::string_view source, std::string name) {
    constexpr std::size_t kTop = static_cast<std::size_t>(-1);
    std::vector<Item> items;
    std::vector<std::size_t> top;
    std::vector<int> indents;        // open indentation levels
    std::vector<std::size_t> owners;  // line owning the block at that level, kTop for the top level

    const auto lines = text::split_lines(source);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const std::string& raw = lines[n];
        if (text::trim(raw).empty()) continue;
        int indent = 0;
        for (char c : raw) {
            if (c == ' ') {
                ++indent;
            } else if (c == '\t') {
                throw Error(ErrorCode::IndentationError,
                            "line " + std::to_string(n + 1) + ": tab in indentation");
            } else {
                break;
            }
        }
        if (indents.empty()) {
            indents.push_back(indent);
            owners.push_back(kTop);
        } else if (indent > indents.back()) {
            indents.push_back(indent);
            owners.push_back(items.size() - 1);
        } else {
            while (!indents.empty() && indent < indents.back()) {
                indents.pop_back();
                owners.pop_back();
            }
            if (indents.empty() || indent != indents.back()) {
                throw Error(ErrorCode::IndentationError,
                            "line " + std::to_string(n + 1) + ": dedent to a level that was never opened");
            }
        }

        Item item;
        item.line_no = n + 1;
        item.depth = static_cast<int>(indents.size()) - 1;
        std::string label = text::trim(raw);
        if (is_condition_line(label)) {
            item.kind = NodeKind::condition;
            item.label = strip_condition_colon(std::move(label));
        } else {
            item.kind = is_terminal_label(label) ? NodeKind::terminal : NodeKind::action;
            item.label = std::move(label);
        }
        const std::size_t index = items.size();
        items.push_back(std::move(item));
        if (owners.back() == kTop) {
            top.push_back(index);
        } else {
            items[owners.back()].block.push_back(index);
        }
    }
    if (items.empty()) throw Error(ErrorCode::EmptyWorkflow, "no non-blank lines");

    for (const Item& item : items) {
        if (item.kind == NodeKind::condition && item.block.empty()) {
            throw Error(ErrorCode::DanglingBranch,
                        "line " + std::to_string(item.line_no) + ": '" + item.label + "' has no sub-flow");
        }
    }
    if (items[top.front()].kind == NodeKind::condition) {
        throw Error(ErrorCode::InvalidRoot, "the first line must be an action, not a condition");
    }

    SopWorkflow wf;
    wf.name = std::move(name);
    wf.source_text = std::string(source);
    wf.root = NodeId{static_cast<std::uint32_t>(top.front())};
    for (std::size_t i = 0; i < items.size(); ++i) {
        const NodeId id{static_cast<std::uint32_t>(i)};
        wf.nodes.emplace(id, SopNode{id, items[i].kind, items[i].label, items[i].depth, {}});
    }
    Linker(items, wf).link(top, {});
    return wf;
}

std::string render_sop(const SopWorkflow& workflow) {
    std::string out;
    for (const auto& [id, node] : workflow.nodes) {
        out.append(static_cast<std::size_t>(node.depth) * 2, ' ');
        out += node.label;
        if (node.kind == NodeKind::condition) out += ':';
        out += '\n';
    }
    return out;
}

SopWorkflow load_sop_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string stem = path;
    if (auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
    if (auto dot = stem.find_last_of('.'); dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
    return parse_sop(buf.str(), stem);
}

}  // namespace sopagent
