// SPDX-License-Identifier: Apache-2.0
#include "sopagent/error.hpp"

namespace sopagent {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IndentationError: return "IndentationError";
        case ErrorCode::EmptyWorkflow: return "EmptyWorkflow";
        case ErrorCode::DanglingBranch: return "DanglingBranch";
        case ErrorCode::InvalidRoot: return "InvalidRoot";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::InvariantError: return "InvariantError";
        case ErrorCode::DuplicateAction: return "DuplicateAction";
        case ErrorCode::EmptyRepository: return "EmptyRepository";
        case ErrorCode::UnknownAction: return "UnknownAction";
        case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::BelowThreshold: return "BelowThreshold";
        case ErrorCode::MalformedResponse: return "MalformedResponse";
        case ErrorCode::NoMatchingBranch: return "NoMatchingBranch";
        case ErrorCode::MissingParam: return "MissingParam";
        case ErrorCode::UnregisteredEndpoint: return "UnregisteredEndpoint";
        case ErrorCode::KnowledgeUnavailable: return "KnowledgeUnavailable";
        case ErrorCode::SessionClosed: return "SessionClosed";
        case ErrorCode::TurnTimeout: return "TurnTimeout";
        case ErrorCode::LintFailure: return "LintFailure";
        case ErrorCode::EmptyPool: return "EmptyPool";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace sopagent
