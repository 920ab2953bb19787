// SPDX-License-Identifier: Apache-2.0
#include "sopagent/lint.hpp"

#include <deque>
#include <set>

#include "sopagent/action_repository.hpp"
#include "sopagent/retrieval.hpp"

namespace sopagent {

std::string_view to_string(DiagnosticKind kind) noexcept {
    switch (kind) {
        case DiagnosticKind::LowSimilarity: return "LowSimilarity";
        case DiagnosticKind::UnreachableNode: return "UnreachableNode";
        case DiagnosticKind::MissingTermination: return "MissingTermination";
    }
    return "LowSimilarity";
}

std::vector<Diagnostic> lint_sop(const SopWorkflow& workflow, const ActionRepository& gar,
                                 const RetrievalIndex& index) {
    std::vector<Diagnostic> out;
    for (const auto& [id, node] : workflow.nodes) {
        if (node.kind == NodeKind::condition || gar.find(node.label)) continue;
        const auto m = index.best_match(node.label);
        if (m.score < index.threshold()) {
            out.push_back({DiagnosticKind::LowSimilarity, id,
                           "line '" + node.label + "' best matches '" + m.action + "' at " + std::to_string(m.score)});
        }
    }

    std::set<NodeId> seen{workflow.root};
    std::deque<NodeId> queue{workflow.root};
    while (!queue.empty()) {
        const auto id = queue.front();
        queue.pop_front();
        for (const auto& e : workflow.node(id).children) {
            if (seen.insert(e.target).second) queue.push_back(e.target);
        }
    }
    for (const auto& [id, node] : workflow.nodes) {
        if (!seen.count(id)) {
            out.push_back({DiagnosticKind::UnreachableNode, id, "line '" + node.label + "' is unreachable"});
        }
        if (node.kind == NodeKind::action && node.children.empty()) {
            out.push_back({DiagnosticKind::MissingTermination, id,
                           "flow ends after '" + node.label + "' without terminate the flow"});
        }
    }
    return out;
}

}  // namespace sopagent
