// SPDX-License-Identifier: Apache-2.0
#include "http_client.hpp"

#include <httplib.h>

namespace sopagent::http {

namespace {

httplib::Client make_client(const std::string& base, std::chrono::milliseconds timeout) {
    httplib::Client client(base);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    return client;
}

Outcome to_outcome(const httplib::Result& res) {
    Outcome out;
    if (!res) {
        const auto err = res.error();
        out.error = httplib::to_string(err);
        switch (err) {
            case httplib::Error::Connection:
            case httplib::Error::ConnectionTimeout:
            case httplib::Error::BindIPAddress:
            case httplib::Error::ProxyConnection:
                out.failure = Failure::connection;
                break;
            case httplib::Error::Read:
                out.failure = Failure::timeout;
                break;
            default:
                out.failure = Failure::other;
                break;
        }
        return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
}

}  // namespace

std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme = url.find("://");
    const auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

Outcome post_json(const std::string& url, const std::string& body, std::chrono::milliseconds timeout,
                  const Headers& headers) {
    auto [base, path] = split_url(url);
    auto client = make_client(base, timeout);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    return to_outcome(client.Post(path, h, body, "application/json"));
}

Outcome get(const std::string& url, std::chrono::milliseconds timeout) {
    auto [base, path] = split_url(url);
    auto client = make_client(base, timeout);
    return to_outcome(client.Get(path));
}

}  // namespace sopagent::http
