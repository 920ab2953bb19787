// SPDX-License-Identifier: Apache-2.0
#include "sopagent/environments.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "http_client.hpp"
#include "sopagent/error.hpp"
#include "sopagent/text.hpp"

namespace sopagent {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

bool is_error_observation(std::string_view observation) {
    static constexpr std::array<std::string_view, 8> kMarkers = {
        "api call failed", "invalid", "error", "failed", "not found", "missing", "expired", "incorrect"};
    const auto lower = text::to_lower(observation);
    for (auto m : kMarkers) {
        if (lower.find(m) != std::string::npos) return true;
    }
    return false;
}

ApiResult ApiResult::ok(std::string observation) {
    if (text::trim(observation).empty()) throw Error(ErrorCode::InvalidArgument, "empty api observation");
    if (is_error_observation(observation)) {
        throw Error(ErrorCode::InvalidArgument, "success observation looks like an error: " + observation);
    }
    return {std::move(observation), Feedback::success};
}

ApiResult ApiResult::error(std::string_view message) {
    auto normalized = text::collapse_whitespace(text::to_lower(message));
    if (normalized.empty()) normalized = std::string(kApiCallFailed);
    if (!is_error_observation(normalized)) normalized += " error";
    return {std::move(normalized), Feedback::fail};
}

ApiResult ScriptedEndpoint::call(const ParamMap& params) const {
    for (const auto& rule : rules_) {
        bool match = true;
        for (const auto& [k, v] : rule.when) {
            const auto it = params.find(k);
            if (it == params.end() || (v != "*" && it->second != v)) {
                match = false;
                break;
            }
        }
        if (match) return rule.result;
    }
    return ApiResult::transport_failure();
}

ApiResult RemoteEndpoint::call(const ParamMap& params) const {
    const json body{{"params", params}};
    const auto res = http::post_json(url_, body.dump(), timeout_);
    if (!res.ok()) return ApiResult::transport_failure();
    try {
        const auto j = json::parse(res.body);
        if (j.contains("error") && j.at("error").is_string()) return ApiResult::error(j.at("error").get<std::string>());
        const auto status = j.at("status").get<std::string>();
        if (is_error_observation(status)) return ApiResult::error(status);
        if (text::trim(status).empty()) return ApiResult::transport_failure();
        return ApiResult::ok(status);
    } catch (const json::exception&) {
        return ApiResult::transport_failure();
    }
}

void ApiRegistry::add(std::string endpoint, std::shared_ptr<const ApiHandler> handler) {
    if (endpoint.empty() || !handler) throw Error(ErrorCode::InvalidArgument, "bad endpoint registration");
    handlers_[std::move(endpoint)] = std::move(handler);
}

ApiResult ApiRegistry::call(std::string_view endpoint, const ParamMap& params) const {
    const auto it = handlers_.find(endpoint);
    if (it == handlers_.end()) {
        throw Error(ErrorCode::UnregisteredEndpoint, "endpoint '" + std::string(endpoint) + "' is not registered");
    }
    return it->second->call(params);
}

ApiResult ApiRegistry::call_api(std::string_view endpoint, const ParamMap& params) { return call(endpoint, params); }

bool ApiRegistry::has_endpoint(std::string_view endpoint) const { return handlers_.find(endpoint) != handlers_.end(); }

std::vector<std::string> ApiRegistry::endpoints() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : handlers_) out.push_back(k);
    return out;
}

const ApiHandler* ApiRegistry::handler(std::string_view endpoint) const {
    const auto it = handlers_.find(endpoint);
    return it == handlers_.end() ? nullptr : it->second.get();
}

namespace {

ApiResult rule_result(const json& r) {
    if (r.value("outage", false)) return ApiResult::transport_failure();
    if (r.contains("error")) return ApiResult::error(r.at("error").get<std::string>());
    if (r.contains("response")) return ApiResult::ok(r.at("response").get<std::string>());
    throw Error(ErrorCode::SchemaError, "api rule needs response, error or outage: " + r.dump());
}

}  // namespace

ApiRegistry load_api_registry_json(std::string_view json_text) {
    ApiRegistry reg;
    try {
        const auto j = json::parse(json_text);
        if (!j.is_object()) throw Error(ErrorCode::SchemaError, "api registry must be an object");
        for (const auto& [endpoint, spec] : j.items()) {
            if (spec.is_object() && spec.contains("remote")) {
                const auto timeout = std::chrono::milliseconds(spec.value("timeout_ms", 10000));
                reg.add(endpoint, std::make_shared<RemoteEndpoint>(spec.at("remote").get<std::string>(), timeout));
                continue;
            }
            if (!spec.is_array()) throw Error(ErrorCode::SchemaError, "endpoint '" + endpoint + "' needs a rule array");
            std::vector<ApiRule> rules;
            for (const auto& r : spec) {
                ApiRule rule;
                if (r.contains("when")) rule.when = r.at("when").get<ParamMap>();
                rule.result = rule_result(r);
                rules.push_back(std::move(rule));
            }
            reg.add(endpoint, std::make_shared<ScriptedEndpoint>(std::move(rules)));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("api registry: ") + e.what());
    }
    return reg;
}

ApiRegistry load_api_registry(const std::string& path) { return load_api_registry_json(read_file(path)); }

ScriptedApiTool::ScriptedApiTool(std::shared_ptr<const ApiRegistry> registry,
                                 std::map<std::string, std::vector<ApiResult>> queued)
    : registry_(std::move(registry)) {
    for (auto& [k, v] : queued) queued_[k] = std::deque<ApiResult>(v.begin(), v.end());
}

ApiResult ScriptedApiTool::call_api(std::string_view endpoint, const ParamMap& params) {
    if (!has_endpoint(endpoint)) {
        throw Error(ErrorCode::UnregisteredEndpoint, "endpoint '" + std::string(endpoint) + "' is not registered");
    }
    const auto it = queued_.find(endpoint);
    if (it != queued_.end() && !it->second.empty()) {
        auto r = it->second.front();
        it->second.pop_front();
        return r;
    }
    if (!registry_ || !registry_->has_endpoint(endpoint)) return ApiResult::transport_failure();
    return registry_->call(endpoint, params);
}

bool ScriptedApiTool::has_endpoint(std::string_view endpoint) const {
    return (registry_ && registry_->has_endpoint(endpoint)) || queued_.find(endpoint) != queued_.end();
}

// ---------------------------------------------------------------------------

StubKnowledge::StubKnowledge(std::vector<std::pair<std::string, std::string>> entries, std::string fallback)
    : fallback_(std::move(fallback)) {
    for (auto& [pattern, answer] : entries) {
        try {
            entries_.emplace_back(std::regex(pattern, std::regex::ECMAScript | std::regex::icase), std::move(answer));
        } catch (const std::regex_error& e) {
            throw Error(ErrorCode::SchemaError, "bad knowledge pattern '" + pattern + "': " + e.what());
        }
    }
}

KnowledgeAnswer StubKnowledge::query(std::string_view search_query) const {
    const std::string q(search_query);
    std::string answer = fallback_;
    for (const auto& [re, a] : entries_) {
        if (std::regex_search(q, re)) {
            answer = a;
            break;
        }
    }
    if (text::trim(answer).empty()) return {"", Feedback::fail};
    return {answer, Feedback::success};
}

StubKnowledge load_knowledge_stub_json(std::string_view json_text) {
    try {
        const auto j = json::parse(json_text);
        std::vector<std::pair<std::string, std::string>> entries;
        const auto list = j.value("entries", json::array());
        for (const auto& e : list) {
            entries.emplace_back(e.at("pattern").get<std::string>(), e.at("answer").get<std::string>());
        }
        return StubKnowledge(std::move(entries), j.value("fallback", std::string(StubKnowledge::kDefaultFallback)));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("knowledge stub: ") + e.what());
    }
}

StubKnowledge load_knowledge_stub(const std::string& path) { return load_knowledge_stub_json(read_file(path)); }

KnowledgeAnswer RemoteKnowledge::query(std::string_view search_query) const {
    const json body{{"query", std::string(search_query)}};
    const auto res = http::post_json(url_, body.dump(), timeout_);
    if (!res.ok()) return {"", Feedback::fail};
    try {
        const auto answer = json::parse(res.body).at("answer").get<std::string>();
        if (text::trim(answer).empty()) return {"", Feedback::fail};
        return {answer, Feedback::success};
    } catch (const json::exception&) {
        return {"", Feedback::fail};
    }
}

KnowledgeAnswer query_knowledge(const KnowledgeClient& client, std::string_view search_query) {
    if (text::trim(search_query).empty()) throw Error(ErrorCode::InvalidArgument, "empty search query");
    return client.query(search_query);
}

// ---------------------------------------------------------------------------

ScriptedUserChannel::ScriptedUserChannel(std::vector<std::string> replies,
                                         std::map<std::string, std::vector<std::string>> by_action)
    : replies_(replies.begin(), replies.end()) {
    for (auto& [k, v] : by_action) by_action_[k] = std::deque<std::string>(v.begin(), v.end());
}

std::string ScriptedUserChannel::receive(std::string_view action) {
    const auto it = by_action_.find(action);
    if (it != by_action_.end() && !it->second.empty()) {
        auto r = std::move(it->second.front());
        it->second.pop_front();
        return r;
    }
    if (replies_.empty()) throw Error(ErrorCode::TurnTimeout, "scripted user has no reply for '" + std::string(action) + "'");
    auto r = std::move(replies_.front());
    replies_.pop_front();
    return r;
}

void LiveUserChannel::send(const OutboundMessage& message) {
    if (message.kind != OutboundKind::question) return;
    const std::lock_guard lock(mutex_);
    awaiting_ = true;
}

std::string LiveUserChannel::receive(std::string_view) {
    std::unique_lock lock(mutex_);
    awaiting_ = true;
    const bool ready = cv_.wait_for(lock, turn_timeout_, [this] { return closed_ || !pending_.empty(); });
    if (closed_) {
        awaiting_ = false;
        throw Error(ErrorCode::SessionClosed, "session closed while waiting for the user");
    }
    if (!ready) {
        awaiting_ = false;
        throw Error(ErrorCode::TurnTimeout, "no user reply within the turn timeout");
    }
    auto r = std::move(pending_.front());
    pending_.pop_front();
    awaiting_ = false;
    return r;
}

bool LiveUserChannel::offer_reply(std::string reply) {
    {
        const std::lock_guard lock(mutex_);
        if (closed_ || !awaiting_ || !pending_.empty()) return false;
        pending_.push_back(std::move(reply));
    }
    cv_.notify_all();
    return true;
}

void LiveUserChannel::close() {
    {
        const std::lock_guard lock(mutex_);
        closed_ = true;
        awaiting_ = false;
    }
    cv_.notify_all();
}

bool LiveUserChannel::awaiting_input() const {
    const std::lock_guard lock(mutex_);
    return awaiting_ && !closed_ && pending_.empty();
}

}  // namespace sopagent
