// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <atomic>
#include <nlohmann/json.hpp>

#include "sopagent/backends.hpp"
#include "sopagent/environments.hpp"
#include "sopagent/error.hpp"
#include "sopagent/retrieval.hpp"
#include "stub_server.hpp"
#include "support.hpp"

using namespace sopagent;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

std::string completion(const std::string& content) {
    return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}}.dump();
}

BackendConfig remote_config(std::string url, std::chrono::milliseconds timeout = 2000ms) {
    BackendConfig c;
    c.kind = BackendConfig::Kind::remote;
    c.endpoint = std::move(url);
    c.model_name = "test-model";
    c.api_key = "secret";
    c.timeout = timeout;
    return c;
}

ErrorCode remote_error(const BackendConfig& c) {
    try {
        (void)remote_complete(c, Role::state, "prompt");
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error";
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(RemoteBackend, EchoedReplyParsesDownstream) {
    fixture::StubServer stub;
    json seen;
    std::string auth;
    stub.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen = json::parse(req.body);
        auth = req.get_header_value("Authorization");
        res.set_content(completion("```json\n{\"thought\": \"retry\", \"next_action\": \"check listing id status\"}\n```"),
                        "application/json");
    });
    stub.start();
    RemoteBackend backend(remote_config(stub.url("/v1/chat/completions")));
    EXPECT_TRUE(backend.available());
    EXPECT_EQ(backend.name(), "test-model");
    const RoleRequest req{Role::state, "the prompt", StateRequest{}};
    const auto decision = parse_state_decision(backend.complete(req));
    EXPECT_EQ(decision.next_action, "check listing id status");
    EXPECT_EQ(seen.at("model"), "test-model");
    EXPECT_EQ(seen.at("messages").at(0).at("content"), "the prompt");
    EXPECT_EQ(auth, "Bearer secret");
}

TEST(RemoteBackend, UnreachableEndpoint) {
    const auto c = remote_config("http://127.0.0.1:1/v1/chat/completions", 300ms);
    EXPECT_EQ(remote_error(c), ErrorCode::ProviderUnavailable);
    EXPECT_FALSE(RemoteBackend(c).available());
}

TEST(RemoteBackend, SlowServerTimesOut) {
    fixture::StubServer stub;
    stub.server().Post("/slow", [](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(600ms);
        res.set_content(completion("{}"), "application/json");
    });
    stub.start();
    auto c = remote_config(stub.url("/slow"), 100ms);
    c.max_retries = 0;
    EXPECT_EQ(remote_error(c), ErrorCode::Timeout);
}

TEST(RemoteBackend, ServerErrorsAreRetried) {
    fixture::StubServer stub;
    std::atomic<int> calls{0};
    stub.server().Post("/flaky", [&](const httplib::Request&, httplib::Response& res) {
        if (++calls < 3) {
            res.status = 503;
            return;
        }
        res.set_content(completion("{\"next_action\": \"check user status\"}"), "application/json");
    });
    stub.start();
    EXPECT_EQ(parse_state_decision(remote_complete(remote_config(stub.url("/flaky")), Role::state, "p")).next_action,
              "check user status");
    EXPECT_EQ(calls.load(), 3);

    auto once = remote_config(stub.url("/flaky"));
    once.max_retries = 0;
    calls = 0;
    EXPECT_EQ(remote_error(once), ErrorCode::ProviderUnavailable);
}

TEST(RemoteBackend, BadPayloadIsMalformed) {
    fixture::StubServer stub;
    stub.server().Post("/bad", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"unexpected": true})", "application/json");
    });
    stub.start();
    EXPECT_EQ(remote_error(remote_config(stub.url("/bad"))), ErrorCode::MalformedResponse);
}

TEST(RemoteClients, EmbedderEndpointAndKnowledge) {
    fixture::StubServer stub;
    stub.server().Post("/embed", [](const httplib::Request& req, httplib::Response& res) {
        const auto text = json::parse(req.body).at("input").get<std::string>();
        res.set_content(json{{"embedding", {1.0, static_cast<double>(text.size()), 0.0}}}.dump(), "application/json");
    });
    stub.server().Post("/status", [](const httplib::Request& req, httplib::Response& res) {
        const auto id = json::parse(req.body).at("params").at("listing_id").get<std::string>();
        if (id == "LSTFYDF12G") res.set_content(R"({"status": "Active"})", "application/json");
        else res.set_content(R"({"error": "Invalid Listing ID"})", "application/json");
    });
    stub.server().Post("/rag", [](const httplib::Request& req, httplib::Response& res) {
        const auto q = json::parse(req.body).at("query").get<std::string>();
        res.set_content(json{{"answer", q == "empty" ? "" : "answer to " + q}}.dump(), "application/json");
    });
    stub.start();

    const RemoteEmbedder emb(stub.url("/embed"), 3, 1000ms);
    const auto e = emb.embed("abcd").values;
    ASSERT_EQ(e.size(), 3U);
    EXPECT_NEAR(e[1] / e[0], 4.0, 1e-12);
    EXPECT_NEAR(e[0] * e[0] + e[1] * e[1], 1.0, 1e-12);
    const RemoteEmbedder wrong_dim(stub.url("/embed"), 4, 1000ms);
    EXPECT_THROW((void)wrong_dim.embed("x"), Error);

    const RemoteEndpoint api(stub.url("/status"), 1000ms);
    EXPECT_EQ(api.call({{"listing_id", "LSTFYDF12G"}}), (ApiResult{"Active", Feedback::success}));
    EXPECT_EQ(api.call({{"listing_id", "LST1"}}), (ApiResult{"invalid listing id", Feedback::fail}));
    const RemoteEndpoint gone(stub.url("/missing"), 1000ms);
    EXPECT_EQ(gone.call({}), ApiResult::transport_failure());

    const RemoteKnowledge kb(stub.url("/rag"), 1000ms);
    EXPECT_EQ(kb.query("q").answer, "answer to q");
    EXPECT_EQ(kb.query("empty").feedback, Feedback::fail);
}
