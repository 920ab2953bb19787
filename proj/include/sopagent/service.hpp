// SPDX-License-Identifier: Apache-2.0
//
// HTTP API for live sessions.
//
//   POST /sessions               {"sop_name": "...", "backend": "scripted"|"remote"}
//                                -> 201 {"session_id": "..."} | 404 | 503
//   POST /sessions/{id}/reply    {"text": "..."} -> 202 | 404 | 409
//   GET  /sessions/{id}/events   server-sent events; "Last-Event-Id" resumes,
//                                "?debug=1" adds state_trace events
//   GET  /sops                   {"sops": [...]}
//
// Conversational and debug streams number their events independently so
// neither ever shows a gap in seq.
#pragma once

#include <memory>
#include <string>

#include "sopagent/workspace.hpp"

namespace sopagent {

class ChatService {
public:
    explicit ChatService(Workspace workspace);
    ~ChatService();

    ChatService(const ChatService&) = delete;
    ChatService& operator=(const ChatService&) = delete;

    /// Binds the listener; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    void serve();
    void stop();

    [[nodiscard]] std::size_t session_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace sopagent
