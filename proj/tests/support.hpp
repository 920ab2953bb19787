// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures: the shipped workspace and scripted session helpers.
#pragma once

#include <memory>
#include <random>
#include <string>

#include "sopagent/engine.hpp"
#include "sopagent/eval.hpp"
#include "sopagent/scripts.hpp"
#include "sopagent/workspace.hpp"

namespace sopagent::fixture {

inline std::string data_path(const std::string& rel) { return std::string(SOPAGENT_TEST_DATA_DIR) + "/" + rel; }

inline const Workspace& shipped_workspace() {
    static const Workspace ws = load_workspace(AppConfig::defaults(SOPAGENT_TEST_DATA_DIR));
    return ws;
}

inline std::unique_ptr<Session> scripted_session(const SessionScript& script, RoleBackends backends = {},
                                                 EngineConfig config = {}) {
    const auto& ws = shipped_workspace();
    if (!backends.state) backends = RoleBackends::all(ws.scripted_backend());
    return std::make_unique<Session>(script.sop, ws.sop(script.sop), ws.toolkit, std::move(backends),
                                     scripted_environment(script, ws.registry, ws.knowledge), std::move(config));
}

inline Transcript run_script(const SessionScript& script) {
    auto s = scripted_session(script);
    return run_to_completion(*s);
}

inline Transcript run_script_file(const std::string& name) {
    return run_script(load_session_script(data_path("scripts/" + name + ".json")));
}

// Random scripts: sampled from the shipped suites, with extra noise replies
// and outcomes mixed in.
inline std::vector<SessionScript> random_scripts(std::size_t n, std::uint64_t seed) {
    const auto& ws = shipped_workspace();
    const auto suites = load_suite_dir(ws.config.suite_dir);
    std::mt19937_64 rng(seed);
    const std::vector<std::string> noise{"yes", "no", "what?", "go back please", "LST0000", "482913", "bob@",
                                         "a@b.com", "9876543210", "BRQ20002", "", "asdf qwer", "LSTBLOCK01"};
    const std::vector<ApiResult> outcomes{ApiResult::transport_failure(), ApiResult::error("invalid listing id"),
                                          ApiResult::ok("active"), ApiResult::ok("blocked"),
                                          ApiResult::ok("in-progress, submitted 10 hrs ago")};
    std::vector<SessionScript> out;
    while (out.size() < n) {
        const auto& suite = suites[rng() % suites.size()];
        auto gen = generate_sessions(suite, 1, rng(), 1 + rng() % 4);
        auto script = gen.front().script;
        for (std::size_t k = rng() % 4; k > 0; --k) script.user_replies.push_back(noise[rng() % noise.size()]);
        if (rng() % 3 == 0) {
            auto& q = script.api_responses["listing_status_check"];
            q.insert(q.begin(), outcomes[rng() % outcomes.size()]);
        }
        out.push_back(std::move(script));
    }
    return out;
}

inline const std::vector<std::pair<std::string, std::string>>& curated_paraphrases() {
    // Each pair was checked by hand against the full score list before being frozen here.
    static const std::vector<std::pair<std::string, std::string>> cases{
        {"verify user status", "check user status"},
        {"ask the user for the listing id", "ask user to provide listing id"},
        {"check status of listing id", "check listing id status"},
        {"show message that listing is inactive", "show message listing inactive"},
        {"show message listing is active", "show message active listing"},
        {"check the block reason", "check block reason"},
        {"check whether listing can be reactivated", "check if listing can be reactivated"},
        {"show reactivation message", "show message reactivation"},
        {"create a ticket", "create ticket"},
        {"check the reason code and inform the user", "check reason code and inform user"},
        {"show message that email update is not possible", "show message email update not possible"},
        {"ask user whether they have access to old email", "ask user about access to the old email"},
        {"ask user for old email", "ask user to provide old email"},
        {"validate otp for old email and inform user of validation status",
         "validate otp old email and inform user on validation status"},
        {"ask user to give new email", "ask user to provide new email"},
        {"ask user for phone number", "ask user to provide phone number"},
        {"ask user for the request id", "ask user to provide request id"},
        {"show brand approved message", "show message brand approved"},
        {"create ticket for brand approval", "create ticket brand approval"},
        {"seek knowledge externally", "seek external knowledge"},
    };
    return cases;
}

}  // namespace sopagent::fixture
