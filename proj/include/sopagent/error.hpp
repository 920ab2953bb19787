// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sopagent {

enum class ErrorCode {
    InvalidArgument,
    // sop text
    IndentationError,
    EmptyWorkflow,
    DanglingBranch,
    InvalidRoot,
    // action repository
    SchemaError,
    InvariantError,
    DuplicateAction,
    EmptyRepository,
    UnknownAction,
    // retrieval and backends
    ProviderUnavailable,
    Timeout,
    BelowThreshold,
    MalformedResponse,
    NoMatchingBranch,
    MissingParam,
    // environments
    UnregisteredEndpoint,
    KnowledgeUnavailable,
    SessionClosed,
    TurnTimeout,
    // engine / harness
    LintFailure,
    EmptyPool,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace sopagent
