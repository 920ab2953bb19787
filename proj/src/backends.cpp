// SPDX-License-Identifier: Apache-2.0
#include "sopagent/backends.hpp"

#include <thread>

#include <nlohmann/json.hpp>

#include "http_client.hpp"
#include "sopagent/error.hpp"
#include "sopagent/oracle.hpp"
#include "sopagent/retrieval.hpp"

namespace sopagent {

using nlohmann::json;

ScriptedBackend::ScriptedBackend(std::shared_ptr<const ActionRepository> gar,
                                 std::shared_ptr<const RetrievalIndex> index)
    : gar_(std::move(gar)), index_(std::move(index)) {
    if (!gar_) throw Error(ErrorCode::InvalidArgument, "scripted backend needs a GAR");
}

std::string ScriptedBackend::complete(const RoleRequest& request) {
    switch (request.role) {
        case Role::state: {
            const auto& ctx = std::get<StateRequest>(request.context);
            if (!ctx.workflow) throw Error(ErrorCode::InvalidArgument, "state request without a workflow");
            return to_json_text(oracle::StateOracle(gar_, index_).decide(*ctx.workflow, ctx.memory));
        }
        case Role::action: {
            const auto& ctx = std::get<ActionRequest>(request.context);
            try {
                return to_json_text(oracle::execute_action(ctx));
            } catch (const Error& e) {
                if (e.code() != ErrorCode::MissingParam) throw;
                ActionData partial;
                partial.thought = "Some required params have no value in the slots collected so far.";
                partial.params = oracle::map_available_params(ctx.params, ctx.slots);
                return to_json_text(partial);
            }
        }
        case Role::user:
            return to_json_text(oracle::user_turn(std::get<UserRequest>(request.context)));
    }
    throw Error(ErrorCode::InvalidArgument, "unknown role");
}

void BackendConfig::validate() const {
    const bool has_endpoint = endpoint.has_value() && !endpoint->empty();
    if ((kind == Kind::remote) != has_endpoint) {
        throw Error(ErrorCode::InvalidArgument, "backend endpoint is required for remote backends only");
    }
    if (max_retries < 0) throw Error(ErrorCode::InvalidArgument, "max_retries must be non-negative");
    if (timeout.count() <= 0) throw Error(ErrorCode::InvalidArgument, "timeout must be positive");
}

std::string remote_complete(const BackendConfig& config, Role role, std::string_view prompt) {
    config.validate();
    if (config.kind != BackendConfig::Kind::remote) {
        throw Error(ErrorCode::InvalidArgument, "remote_complete needs a remote backend config");
    }
    json body{{"messages", json::array({json{{"role", "user"}, {"content", std::string(prompt)}}})}};
    if (config.model_name) body["model"] = *config.model_name;
    http::Headers headers;
    if (config.api_key) headers.emplace_back("Authorization", "Bearer " + *config.api_key);

    ErrorCode last_code = ErrorCode::ProviderUnavailable;
    std::string last_error;
    auto backoff = std::chrono::milliseconds(100);
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        const auto res = http::post_json(*config.endpoint, body.dump(), config.timeout, headers);
        if (res.failure == http::Failure::timeout) {
            last_code = ErrorCode::Timeout;
            last_error = "no reply within " + std::to_string(config.timeout.count()) + " ms";
            continue;
        }
        if (res.failure != http::Failure::none) {
            last_code = ErrorCode::ProviderUnavailable;
            last_error = res.error;
            continue;
        }
        if (res.status == 429 || res.status >= 500) {
            last_code = ErrorCode::ProviderUnavailable;
            last_error = "HTTP " + std::to_string(res.status);
            continue;
        }
        if (!res.ok()) {
            throw Error(ErrorCode::ProviderUnavailable, "HTTP " + std::to_string(res.status) + " from " +
                                                            std::string(to_string(role)) + " backend");
        }
        try {
            return json::parse(res.body).at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw Error(ErrorCode::MalformedResponse, std::string("unexpected completion payload: ") + e.what());
        }
    }
    throw Error(last_code, *config.endpoint + ": " + last_error);
}

RemoteBackend::RemoteBackend(BackendConfig config) : config_(std::move(config)) {
    config_.validate();
    if (config_.kind != BackendConfig::Kind::remote) {
        throw Error(ErrorCode::InvalidArgument, "RemoteBackend needs a remote config");
    }
}

std::string RemoteBackend::complete(const RoleRequest& request) {
    return remote_complete(config_, request.role, request.prompt);
}

bool RemoteBackend::available() const {
    const auto probe = std::min(config_.timeout, std::chrono::milliseconds(2000));
    const auto res = http::get(*config_.endpoint, probe);
    return res.failure == http::Failure::none && res.status < 500;
}

std::string RemoteBackend::name() const { return config_.model_name.value_or("remote"); }

}  // namespace sopagent
