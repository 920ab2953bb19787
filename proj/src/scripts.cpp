// SPDX-License-Identifier: Apache-2.0
#include "sopagent/scripts.hpp"

#include <fstream>

#include "sopagent/error.hpp"

namespace sopagent {

using nlohmann::json;

ApiResult api_outcome_from_json(const json& j) {
    if (j.is_string()) return ApiResult::ok(j.get<std::string>());
    if (!j.is_object()) throw Error(ErrorCode::SchemaError, "api outcome must be an object: " + j.dump());
    if (j.value("outage", false)) return ApiResult::transport_failure();
    if (j.contains("error")) return ApiResult::error(j.at("error").get<std::string>());
    if (j.contains("response")) return ApiResult::ok(j.at("response").get<std::string>());
    throw Error(ErrorCode::SchemaError, "api outcome needs response, error or outage: " + j.dump());
}

json to_json(const ApiResult& r) {
    if (r.feedback == Feedback::success) return json{{"response", r.observation}};
    return json{{"error", r.observation}};
}

SessionScript session_script_from_json(const json& j) {
    SessionScript s;
    try {
        s.sop = j.at("sop").get<std::string>();
        s.user_replies = j.value("user_replies", std::vector<std::string>{});
        s.user_replies_by_action =
            j.value("user_replies_by_action", std::map<std::string, std::vector<std::string>>{});
        if (j.contains("api_responses")) {
            for (const auto& [endpoint, outcomes] : j.at("api_responses").items()) {
                auto& list = s.api_responses[endpoint];
                for (const auto& o : outcomes) list.push_back(api_outcome_from_json(o));
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("session script: ") + e.what());
    }
    return s;
}

json to_json(const SessionScript& s) {
    json j{{"sop", s.sop}, {"user_replies", s.user_replies}, {"user_replies_by_action", s.user_replies_by_action}};
    json api = json::object();
    for (const auto& [endpoint, outcomes] : s.api_responses) {
        json list = json::array();
        for (const auto& o : outcomes) list.push_back(to_json(o));
        api[endpoint] = std::move(list);
    }
    j["api_responses"] = std::move(api);
    return j;
}

SessionScript load_session_script(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
    try {
        return session_script_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, path + ": " + e.what());
    }
}

SessionEnvironment scripted_environment(const SessionScript& script, std::shared_ptr<const ApiRegistry> registry,
                                        std::shared_ptr<const KnowledgeClient> knowledge) {
    SessionEnvironment env;
    env.api = std::make_shared<ScriptedApiTool>(std::move(registry), script.api_responses);
    env.knowledge = std::move(knowledge);
    env.user = std::make_shared<ScriptedUserChannel>(script.user_replies, script.user_replies_by_action);
    return env;
}

}  // namespace sopagent
