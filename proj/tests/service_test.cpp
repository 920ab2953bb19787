// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <httplib.h>

#include <nlohmann/json.hpp>
#include <thread>

#include "sopagent/service.hpp"
#include "sopagent/text.hpp"
#include "support.hpp"

using namespace sopagent;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

struct Frame {
    std::uint64_t id = 0;
    std::string event;
    json data;
};

std::vector<Frame> parse_frames(const std::string& body) {
    std::vector<Frame> out;
    std::size_t pos = 0;
    while (pos < body.size()) {
        auto end = body.find("\n\n", pos);
        if (end == std::string::npos) end = body.size();
        const auto block = body.substr(pos, end - pos);
        pos = end + 2;
        Frame f;
        bool any = false;
        for (const auto& line : text::split_lines(block)) {
            if (line.rfind("id: ", 0) == 0) f.id = std::stoull(line.substr(4)), any = true;
            else if (line.rfind("event: ", 0) == 0) f.event = line.substr(7);
            else if (line.rfind("data: ", 0) == 0) f.data = json::parse(line.substr(6));
        }
        if (any) out.push_back(std::move(f));
    }
    return out;
}

class ServiceTest : public ::testing::Test {
protected:
    void start(Workspace ws) {
        service_ = std::make_unique<ChatService>(std::move(ws));
        port_ = service_->bind("127.0.0.1", 0);
        thread_ = std::thread([this] { service_->serve(); });
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
        client_->set_read_timeout(10, 0);
        for (int i = 0; i < 100 && !client_->Get("/sops"); ++i) std::this_thread::sleep_for(10ms);
    }
    void SetUp() override { start(fixture::shipped_workspace()); }
    void TearDown() override {
        service_->stop();
        if (thread_.joinable()) thread_.join();
    }

    std::string create(const std::string& sop) {
        auto res = client_->Post("/sessions", json{{"sop_name", sop}}.dump(), "application/json");
        EXPECT_TRUE(res);
        EXPECT_EQ(res->status, 201);
        return json::parse(res->body).at("session_id").get<std::string>();
    }

    json status(const std::string& id) { return json::parse(client_->Get("/sessions/" + id)->body); }

    // Waits until the session asks for input (true) or ends (false).
    bool wait_for_question(const std::string& id) {
        for (int i = 0; i < 500; ++i) {
            const auto s = status(id);
            if (s.at("awaiting_input").get<bool>()) return true;
            if (s.at("status") != "running") return false;
            std::this_thread::sleep_for(10ms);
        }
        ADD_FAILURE() << "session " << id << " stalled";
        return false;
    }

    int reply(const std::string& id, const std::string& text) {
        return client_->Post("/sessions/" + id + "/reply", json{{"text", text}}.dump(), "application/json")->status;
    }

    std::vector<Frame> events(const std::string& id, const std::string& query = "", const std::string& last = "") {
        httplib::Headers headers;
        if (!last.empty()) headers.emplace("Last-Event-Id", last);
        httplib::Client reader("127.0.0.1", port_);
        reader.set_read_timeout(10, 0);
        auto res = reader.Get("/sessions/" + id + "/events" + query, headers);
        EXPECT_TRUE(res);
        EXPECT_EQ(res->status, 200);
        return parse_frames(res->body);
    }

    void drive(const std::string& id, const std::vector<std::string>& replies) {
        for (const auto& r : replies) {
            ASSERT_TRUE(wait_for_question(id)) << r;
            ASSERT_EQ(reply(id, r), 202) << r;
        }
        for (int i = 0; i < 500 && status(id).at("status") == "running"; ++i) std::this_thread::sleep_for(10ms);
    }

    std::unique_ptr<ChatService> service_;
    std::unique_ptr<httplib::Client> client_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace

TEST_F(ServiceTest, ListsSops) {
    const auto body = json::parse(client_->Get("/sops")->body);
    EXPECT_EQ(body.at("sops"), (json{"brand_approval", "email_update", "listing_blocked"}));
}

TEST_F(ServiceTest, QuestionDetourOverTheWire) {
    const auto id = create("listing_blocked");
    drive(id, {"how to find it", "my lisint id is LSTHFKKFL"});
    EXPECT_EQ(status(id).at("status"), "terminated_normal");

    const auto frames = events(id);
    ASSERT_FALSE(frames.empty());
    std::vector<std::string> kinds;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        EXPECT_EQ(frames[i].id, i + 1);
        EXPECT_EQ(frames[i].data.at("seq"), i + 1);
        EXPECT_EQ(frames[i].data.at("session_id"), id);
        EXPECT_NE(frames[i].event, "state_trace");
        kinds.push_back(frames[i].event);
    }
    EXPECT_EQ(kinds, (std::vector<std::string>{"agent_question", "agent_message", "knowledge_answer",
                                               "agent_question", "agent_message", "agent_message",
                                               "normal_termination"}));
    EXPECT_EQ(frames[0].data.at("payload"), "Could you please provide the listing ID?");
    EXPECT_EQ(frames[3].data.at("payload"), "Could you please provide the listing ID?");
}

TEST_F(ServiceTest, ResumeAfterLastEventId) {
    const auto id = create("listing_blocked");
    drive(id, {"LSTFYDF12G"});
    const auto all = events(id);
    ASSERT_GE(all.size(), 3U);
    for (std::size_t k = 0; k <= all.size(); ++k) {
        const auto rest = events(id, "", std::to_string(k));
        ASSERT_EQ(rest.size(), all.size() - k);
        for (std::size_t i = 0; i < rest.size(); ++i) EXPECT_EQ(rest[i].data, all[k + i].data);
    }
    const auto via_query = events(id, "?last_event_id=2");
    EXPECT_EQ(via_query.size(), all.size() - 2);
}

TEST_F(ServiceTest, DebugStreamAddsStateTraces) {
    const auto id = create("listing_blocked");
    drive(id, {"LSTFYDF12G"});
    const auto debug = events(id, "?debug=1");
    std::vector<json> traces;
    for (std::size_t i = 0; i < debug.size(); ++i) {
        EXPECT_EQ(debug[i].id, i + 1);
        if (debug[i].event == "state_trace") traces.push_back(debug[i].data.at("payload"));
    }
    ASSERT_EQ(traces.size(), 4U);
    EXPECT_EQ(traces[0], (json{{"action", "check user status"}, {"observation", "active"}, {"feedback", "success"}}));
    EXPECT_EQ(traces[2].at("observation"), "Active");
    EXPECT_EQ(debug.size(), events(id).size() + traces.size());
}

TEST_F(ServiceTest, LiveStreamSeesEveryEventOnce) {
    const auto id = create("listing_blocked");
    std::vector<Frame> live;
    std::thread reader([&] { live = events(id); });
    drive(id, {"LST1234", "LSTFYDF12G"});
    reader.join();
    const auto after = events(id);
    ASSERT_EQ(live.size(), after.size());
    for (std::size_t i = 0; i < live.size(); ++i) EXPECT_EQ(live[i].data, after[i].data);
    EXPECT_EQ(live.back().event, "normal_termination");
}

TEST_F(ServiceTest, GraceTerminationEvent) {
    const auto id = create("listing_blocked");
    drive(id, {"LST1234", "LST5678", "LST9012"});
    EXPECT_EQ(status(id).at("status"), "terminated_grace");
    const auto frames = events(id);
    ASSERT_FALSE(frames.empty());
    EXPECT_EQ(frames.back().event, "grace_termination");
    EXPECT_EQ(frames.back().data.at("payload"), EngineConfig{}.grace_message);
    EXPECT_EQ(reply(id, "LSTFYDF12G"), 409);
}

TEST_F(ServiceTest, ErrorStatuses) {
    EXPECT_EQ(client_->Post("/sessions", R"({"sop_name": "nope"})", "application/json")->status, 404);
    EXPECT_EQ(client_->Post("/sessions", "{", "application/json")->status, 400);
    EXPECT_EQ(client_->Post("/sessions", R"({"sop_name": "listing_blocked", "backend": "magic"})", "application/json")->status,
              400);
    EXPECT_EQ(client_->Post("/sessions", R"({"sop_name": "listing_blocked", "backend": "remote"})", "application/json")->status,
              503);
    EXPECT_EQ(reply("s999", "x"), 404);
    EXPECT_EQ(client_->Get("/sessions/s999")->status, 404);
    EXPECT_EQ(client_->Get("/sessions/s999/events")->status, 404);

    const auto id = create("listing_blocked");
    ASSERT_TRUE(wait_for_question(id));
    EXPECT_EQ(client_->Post("/sessions/" + id + "/reply", "not json", "application/json")->status, 400);
    EXPECT_EQ(client_->Get("/sessions/" + id + "/events?last_event_id=abc")->status, 400);
}

TEST_F(ServiceTest, ReplyWhileNotAwaitingIsRefused) {
    const auto id = create("listing_blocked");
    ASSERT_TRUE(wait_for_question(id));
    EXPECT_EQ(reply(id, "LSTFYDF12G"), 202);
    // The agent is now busy checking status or already done; a second reply has nowhere to go.
    for (int i = 0; i < 500 && status(id).at("status") == "running"; ++i) std::this_thread::sleep_for(10ms);
    EXPECT_EQ(reply(id, "again"), 409);
}

TEST(Service, RemoteBackendDownIs503) {
    auto ws = fixture::shipped_workspace();
    ws.config.backend.kind = BackendConfig::Kind::remote;
    ws.config.backend.endpoint = "http://127.0.0.1:1/v1/chat/completions";
    ws.config.backend.timeout = 200ms;
    ChatService service(ws);
    const int port = service.bind("127.0.0.1", 0);
    std::thread t([&] { service.serve(); });
    httplib::Client c("127.0.0.1", port);
    httplib::Result res;
    for (int i = 0; i < 100 && !(res = c.Post("/sessions", R"({"sop_name": "listing_blocked", "backend": "remote"})",
                                                "application/json"));
         ++i)
        std::this_thread::sleep_for(10ms);
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 503);
    EXPECT_EQ(service.session_count(), 0U);
    service.stop();
    t.join();
}

TEST(Service, LintFailureIs422) {
    auto ws = fixture::shipped_workspace();
    ws.sops["broken"] = std::make_shared<const SopWorkflow>(parse_sop("check user status\nfrobnicate the widget\n", "broken"));
    ChatService service(ws);
    const int port = service.bind("127.0.0.1", 0);
    std::thread t([&] { service.serve(); });
    httplib::Client c("127.0.0.1", port);
    httplib::Result res;
    for (int i = 0; i < 100 && !(res = c.Post("/sessions", R"({"sop_name": "broken"})", "application/json")); ++i)
        std::this_thread::sleep_for(10ms);
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 422);
    service.stop();
    t.join();
}
