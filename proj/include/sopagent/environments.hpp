// SPDX-License-Identifier: Apache-2.0
//
// The environments an agent acts on: the API tool, the external knowledge
// source and the user channel.
#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "sopagent/execution_memory.hpp"

namespace sopagent {

using ParamMap = std::map<std::string, std::string>;

inline constexpr std::string_view kApiCallFailed = "api call failed";

struct ApiResult {
    std::string observation;
    Feedback feedback = Feedback::success;

    /// Throws Error{InvalidArgument} if the text is empty or error-shaped.
    static ApiResult ok(std::string observation);
    /// Normalizes the message to a lowercase, whitespace-collapsed phrase.
    static ApiResult error(std::string_view message);
    static ApiResult transport_failure() { return error(kApiCallFailed); }

    friend bool operator==(const ApiResult&, const ApiResult&) = default;
};

/// Error-shaped observations: "api call failed", or anything mentioning
/// invalid / error / failed / not found / missing / expired / incorrect.
bool is_error_observation(std::string_view observation);

class ApiHandler {
public:
    virtual ~ApiHandler() = default;
    [[nodiscard]] virtual ApiResult call(const ParamMap& params) const = 0;
};

/// One rule of a scripted endpoint. Every key in `when` must be present in the
/// call with the same value ("*" matches any value).
struct ApiRule {
    ParamMap when;
    ApiResult result;
};

/// Ordered rule table; the first matching rule answers. No match behaves like
/// a transport failure.
class ScriptedEndpoint final : public ApiHandler {
public:
    explicit ScriptedEndpoint(std::vector<ApiRule> rules) : rules_(std::move(rules)) {}
    [[nodiscard]] ApiResult call(const ParamMap& params) const override;
    [[nodiscard]] const std::vector<ApiRule>& rules() const noexcept { return rules_; }

private:
    std::vector<ApiRule> rules_;
};

/// HTTP endpoint.
///   request:  POST <url>  {"params": {...}}
///   response: {"status": "<text>"} or {"error": "<text>"}
/// Transport failures and non-2xx replies map to "api call failed".
class RemoteEndpoint final : public ApiHandler {
public:
    RemoteEndpoint(std::string url, std::chrono::milliseconds timeout)
        : url_(std::move(url)), timeout_(timeout) {}
    [[nodiscard]] ApiResult call(const ParamMap& params) const override;

private:
    std::string url_;
    std::chrono::milliseconds timeout_;
};

class ApiTool {
public:
    virtual ~ApiTool() = default;
    /// Throws Error{UnregisteredEndpoint}.
    virtual ApiResult call_api(std::string_view endpoint, const ParamMap& params) = 0;
    [[nodiscard]] virtual bool has_endpoint(std::string_view endpoint) const = 0;
};

/// Endpoint name to handler. Immutable once built and safe to share.
class ApiRegistry final : public ApiTool {
public:
    void add(std::string endpoint, std::shared_ptr<const ApiHandler> handler);

    ApiResult call_api(std::string_view endpoint, const ParamMap& params) override;
    [[nodiscard]] ApiResult call(std::string_view endpoint, const ParamMap& params) const;
    [[nodiscard]] bool has_endpoint(std::string_view endpoint) const override;
    [[nodiscard]] std::vector<std::string> endpoints() const;
    [[nodiscard]] const ApiHandler* handler(std::string_view endpoint) const;

private:
    std::map<std::string, std::shared_ptr<const ApiHandler>, std::less<>> handlers_;
};

/// JSON object: endpoint -> array of rules
///   {"when": {"listing_id": "LST1234"}, "response": "Active"}
///   {"when": {...}, "error": "invalid listing id"}
///   {"outage": true}
/// or endpoint -> {"remote": "http://host:port/path"}.
ApiRegistry load_api_registry_json(std::string_view json_text);
ApiRegistry load_api_registry(const std::string& path);

/// Per-session API tool: queued outcomes per endpoint are served first, in
/// order; once a queue is drained calls fall through to the shared registry.
class ScriptedApiTool final : public ApiTool {
public:
    ScriptedApiTool(std::shared_ptr<const ApiRegistry> registry,
                    std::map<std::string, std::vector<ApiResult>> queued);

    ApiResult call_api(std::string_view endpoint, const ParamMap& params) override;
    [[nodiscard]] bool has_endpoint(std::string_view endpoint) const override;

private:
    std::shared_ptr<const ApiRegistry> registry_;
    std::map<std::string, std::deque<ApiResult>, std::less<>> queued_;
};

// ---------------------------------------------------------------------------
// External knowledge

struct KnowledgeAnswer {
    std::string answer;
    Feedback feedback = Feedback::success;
};

class KnowledgeClient {
public:
    virtual ~KnowledgeClient() = default;
    [[nodiscard]] virtual KnowledgeAnswer query(std::string_view search_query) const = 0;
};

/// Canned question-pattern -> answer table. Patterns are case-insensitive
/// ECMAScript regexes searched anywhere in the query. Unknown queries get the
/// fallback apology (success); an empty answer maps to fail.
class StubKnowledge final : public KnowledgeClient {
public:
    static constexpr std::string_view kDefaultFallback =
        "Sorry, I could not find an answer to that right now. Let us continue with your request.";

    StubKnowledge(std::vector<std::pair<std::string, std::string>> entries,
                  std::string fallback = std::string(kDefaultFallback));

    [[nodiscard]] KnowledgeAnswer query(std::string_view search_query) const override;

private:
    std::vector<std::pair<std::regex, std::string>> entries_;
    std::string fallback_;
};

/// {"fallback": "...", "entries": [{"pattern": "...", "answer": "..."}]}
StubKnowledge load_knowledge_stub_json(std::string_view json_text);
StubKnowledge load_knowledge_stub(const std::string& path);

/// RAG service.
///   request:  POST <url>  {"query": "<text>"}
///   response: {"answer": "<text>"}
/// Unreachable service or empty answer -> fail.
class RemoteKnowledge final : public KnowledgeClient {
public:
    RemoteKnowledge(std::string url, std::chrono::milliseconds timeout)
        : url_(std::move(url)), timeout_(timeout) {}
    [[nodiscard]] KnowledgeAnswer query(std::string_view search_query) const override;

private:
    std::string url_;
    std::chrono::milliseconds timeout_;
};

/// Throws Error{InvalidArgument} for an empty query.
KnowledgeAnswer query_knowledge(const KnowledgeClient& client, std::string_view search_query);

// ---------------------------------------------------------------------------
// User channel

enum class OutboundKind { question, message, knowledge_answer, farewell };

struct OutboundMessage {
    OutboundKind kind;
    std::string text;
};

class UserChannel {
public:
    virtual ~UserChannel() = default;
    virtual void send(const OutboundMessage& message) = 0;
    /// Blocks until the user's next reply. `action` is the action that asked.
    /// Throws Error{TurnTimeout} or Error{SessionClosed}.
    virtual std::string receive(std::string_view action) = 0;
};

/// Replays canned replies. Replies keyed by action are used first, then the
/// shared ordered list. Running dry raises TurnTimeout.
class ScriptedUserChannel final : public UserChannel {
public:
    ScriptedUserChannel() = default;
    explicit ScriptedUserChannel(std::vector<std::string> replies,
                                 std::map<std::string, std::vector<std::string>> by_action = {});

    void send(const OutboundMessage& message) override { sent_.push_back(message); }
    std::string receive(std::string_view action) override;

    [[nodiscard]] const std::vector<OutboundMessage>& sent() const noexcept { return sent_; }

private:
    std::deque<std::string> replies_;
    std::map<std::string, std::deque<std::string>, std::less<>> by_action_;
    std::vector<OutboundMessage> sent_;
};

/// Channel fed by a live client. Sending a question marks the channel as
/// awaiting input before anything is published, so a reply racing the
/// question event is never refused.
class LiveUserChannel final : public UserChannel {
public:
    explicit LiveUserChannel(std::chrono::milliseconds turn_timeout) : turn_timeout_(turn_timeout) {}

    void send(const OutboundMessage& message) override;
    std::string receive(std::string_view action) override;

    /// False when the session is not awaiting input or is closed.
    bool offer_reply(std::string text);
    void close();
    [[nodiscard]] bool awaiting_input() const;

private:
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<std::string> pending_;
    bool awaiting_ = false;
    bool closed_ = false;
    std::chrono::milliseconds turn_timeout_;
};

}  // namespace sopagent
