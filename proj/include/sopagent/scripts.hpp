// SPDX-License-Identifier: Apache-2.0
//
// Fully scripted sessions: canned user replies and API outcomes.
//
//   {
//     "sop": "listing_blocked",
//     "user_replies": ["LSTFYDF12G"],
//     "user_replies_by_action": {"ask user to provide listing id": ["LST1234"]},
//     "api_responses": {
//       "listing_status_check": [{"error": "api call failed"}, {"response": "Active"}]
//     }
//   }
#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sopagent/engine.hpp"
#include "sopagent/environments.hpp"

namespace sopagent {

struct SessionScript {
    std::string sop;
    std::vector<std::string> user_replies;
    std::map<std::string, std::vector<std::string>> user_replies_by_action;
    std::map<std::string, std::vector<ApiResult>> api_responses;

    friend bool operator==(const SessionScript&, const SessionScript&) = default;
};

ApiResult api_outcome_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ApiResult& r);

SessionScript session_script_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SessionScript& s);
SessionScript load_session_script(const std::string& path);

/// Environment bundle replaying the script over the shared registry.
SessionEnvironment scripted_environment(const SessionScript& script,
                                        std::shared_ptr<const ApiRegistry> registry,
                                        std::shared_ptr<const KnowledgeClient> knowledge);

}  // namespace sopagent
