// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "sopagent/sop.hpp"

namespace sopagent {

class ActionRepository;
class RetrievalIndex;

enum class DiagnosticKind { LowSimilarity, UnreachableNode, MissingTermination };

std::string_view to_string(DiagnosticKind kind) noexcept;

struct Diagnostic {
    DiagnosticKind kind;
    NodeId node;
    std::string message;
};

/// Reports action lines whose best GAR match scores below the index threshold,
/// nodes not reachable from the root, and paths that end without
/// "terminate the flow".
std::vector<Diagnostic> lint_sop(const SopWorkflow& workflow, const ActionRepository& gar,
                                 const RetrievalIndex& index);

}  // namespace sopagent
