// SPDX-License-Identifier: Apache-2.0
#include "sopagent/service.hpp"

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sopagent/error.hpp"
#include "sopagent/lint.hpp"

namespace sopagent {

using nlohmann::json;

namespace {

struct LiveSession {
    std::string id;
    std::mutex mutex;
    std::condition_variable cv;
    std::vector<SessionEvent> all;     // engine numbering, includes state_trace
    std::vector<SessionEvent> visible;  // conversational events, renumbered
    bool finished = false;
    SessionStatus status = SessionStatus::running;
    std::shared_ptr<LiveUserChannel> channel;
    std::unique_ptr<Session> session;
    std::thread worker;

    void record(const SessionEvent& e) {
        {
            const std::lock_guard lock(mutex);
            all.push_back(e);
            if (e.kind != EventKind::state_trace) {
                auto v = e;
                v.seq = visible.size() + 1;
                visible.push_back(std::move(v));
            }
        }
        cv.notify_all();
    }
};

std::string sse_frame(const SessionEvent& e) {
    json data{{"session_id", e.session_id}, {"seq", e.seq}, {"kind", std::string(to_string(e.kind))}};
    if (e.kind == EventKind::state_trace) data["payload"] = json::parse(e.payload);
    else data["payload"] = e.payload;
    return "id: " + std::to_string(e.seq) + "\nevent: " + std::string(to_string(e.kind)) + "\ndata: " + data.dump() +
           "\n\n";
}

void reply_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

}  // namespace

struct ChatService::Impl {
    Workspace ws;
    httplib::Server server;
    mutable std::mutex mutex;
    std::map<std::string, std::shared_ptr<LiveSession>> sessions;
    std::atomic<std::uint64_t> next_id{1};
    std::atomic<bool> stopping{false};

    explicit Impl(Workspace workspace) : ws(std::move(workspace)) { routes(); }

    std::shared_ptr<LiveSession> find(const std::string& id) const {
        const std::lock_guard lock(mutex);
        const auto it = sessions.find(id);
        return it == sessions.end() ? nullptr : it->second;
    }

    void routes() {
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                    {"Access-Control-Allow-Headers", "Content-Type, Last-Event-Id"}});
        server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

        server.Get("/sops", [this](const httplib::Request&, httplib::Response& res) {
            json names = json::array();
            for (const auto& [name, _] : ws.sops) names.push_back(name);
            reply_json(res, 200, {{"sops", names}});
        });

        server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) { create(req, res); });

        server.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            const auto s = find(req.matches[1]);
            if (!s) return reply_json(res, 404, {{"error", "unknown session"}});
            const std::lock_guard lock(s->mutex);
            reply_json(res, 200,
                       {{"session_id", s->id},
                        {"status", std::string(to_string(s->status))},
                        {"awaiting_input", !s->finished && s->channel->awaiting_input()},
                        {"events", s->visible.size()}});
        });

        server.Post(R"(/sessions/([^/]+)/reply)", [this](const httplib::Request& req, httplib::Response& res) {
            const auto s = find(req.matches[1]);
            if (!s) return reply_json(res, 404, {{"error", "unknown session"}});
            std::string reply;
            try {
                reply = json::parse(req.body).at("text").get<std::string>();
            } catch (const json::exception&) {
                return reply_json(res, 400, {{"error", "body must be {\"text\": \"...\"}"}});
            }
            if (!s->channel->offer_reply(std::move(reply))) {
                return reply_json(res, 409, {{"error", "session is not awaiting input"}});
            }
            reply_json(res, 202, {{"accepted", true}});
        });

        server.Get(R"(/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
            stream(req, res);
        });
    }

    void create(const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = json::parse(req.body.empty() ? "{}" : req.body);
        } catch (const json::exception&) {
            return reply_json(res, 400, {{"error", "body must be JSON"}});
        }
        const auto sop_name = body.value("sop_name", std::string());
        const auto it = ws.sops.find(sop_name);
        if (it == ws.sops.end()) return reply_json(res, 404, {{"error", "unknown SOP '" + sop_name + "'"}});

        const auto backend_name = body.value("backend", std::string("scripted"));
        std::shared_ptr<Backend> backend;
        if (backend_name == "scripted") {
            backend = ws.scripted_backend();
        } else if (backend_name == "remote") {
            if (ws.config.backend.kind != BackendConfig::Kind::remote) {
                return reply_json(res, 503, {{"error", "no remote backend configured"}});
            }
            backend = ws.configured_backend();
        } else {
            return reply_json(res, 400, {{"error", "unknown backend '" + backend_name + "'"}});
        }
        if (!backend->available()) return reply_json(res, 503, {{"error", "backend unavailable"}});

        const auto diagnostics = lint_sop(*it->second, *ws.toolkit->gar, *ws.toolkit->index);
        if (!diagnostics.empty()) return reply_json(res, 422, {{"error", diagnostics.front().message}});

        auto live = std::make_shared<LiveSession>();
        live->id = "s" + std::to_string(next_id++);
        live->channel = std::make_shared<LiveUserChannel>(ws.config.turn_timeout);
        SessionEnvironment env{std::make_shared<ScriptedApiTool>(ws.registry, std::map<std::string, std::vector<ApiResult>>{}),
                               ws.knowledge, live->channel};
        live->session = std::make_unique<Session>(live->id, it->second, ws.toolkit, RoleBackends::all(backend),
                                                  std::move(env), ws.config.engine);
        std::weak_ptr<LiveSession> weak = live;
        live->session->set_event_listener([weak](const SessionEvent& e) {
            if (auto s = weak.lock()) s->record(e);
        });
        {
            const std::lock_guard lock(mutex);
            sessions.emplace(live->id, live);
        }
        live->worker = std::thread([this, live] {
            const auto transcript = run_to_completion(*live->session);
            {
                const std::lock_guard lock(live->mutex);
                live->finished = true;
                live->status = transcript.status;
            }
            live->cv.notify_all();
            if (ws.config.transcript_dir) {
                std::filesystem::create_directories(*ws.config.transcript_dir);
                std::ofstream out(std::filesystem::path(*ws.config.transcript_dir) / (live->id + ".jsonl"));
                out << transcript.to_jsonl();
            }
        });
        reply_json(res, 201, {{"session_id", live->id}});
    }

    void stream(const httplib::Request& req, httplib::Response& res) {
        const auto s = find(req.matches[1]);
        if (!s) return reply_json(res, 404, {{"error", "unknown session"}});
        const bool debug = req.has_param("debug") && req.get_param_value("debug") != "0";
        std::uint64_t cursor = 0;
        auto last = req.get_header_value("Last-Event-Id");
        if (last.empty() && req.has_param("last_event_id")) last = req.get_param_value("last_event_id");
        if (!last.empty()) {
            try {
                cursor = std::stoull(last);
            } catch (const std::exception&) {
                return reply_json(res, 400, {{"error", "bad Last-Event-Id"}});
            }
        }
        auto position = std::make_shared<std::uint64_t>(cursor);
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "text/event-stream", [this, s, debug, position](std::size_t, httplib::DataSink& sink) {
                std::unique_lock lock(s->mutex);
                const auto& events = debug ? s->all : s->visible;
                s->cv.wait_for(lock, std::chrono::milliseconds(250),
                               [&] { return stopping.load() || s->finished || events.size() > *position; });
                std::string chunk;
                while (*position < events.size()) chunk += sse_frame(events[(*position)++]);
                const bool done = s->finished && *position >= events.size();
                lock.unlock();
                if (!chunk.empty() && !sink.write(chunk.data(), chunk.size())) return false;
                if (done || stopping.load()) {
                    sink.done();
                    return true;
                }
                if (chunk.empty()) {
                    static constexpr std::string_view kKeepAlive = ": keep-alive\n\n";
                    if (!sink.write(kKeepAlive.data(), kKeepAlive.size())) return false;
                }
                return true;
            });
    }

    void shutdown() {
        if (stopping.exchange(true)) return;
        server.stop();
        std::vector<std::shared_ptr<LiveSession>> all;
        {
            const std::lock_guard lock(mutex);
            for (auto& [_, s] : sessions) all.push_back(s);
        }
        for (auto& s : all) {
            s->channel->close();
            s->cv.notify_all();
        }
        for (auto& s : all) {
            if (s->worker.joinable()) s->worker.join();
        }
    }
};

ChatService::ChatService(Workspace workspace) : impl_(std::make_unique<Impl>(std::move(workspace))) {}

ChatService::~ChatService() { stop(); }

int ChatService::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) {
        throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
}

void ChatService::serve() { impl_->server.listen_after_bind(); }

void ChatService::stop() {
    if (impl_) impl_->shutdown();
}

std::size_t ChatService::session_count() const {
    const std::lock_guard lock(impl_->mutex);
    return impl_->sessions.size();
}

}  // namespace sopagent
