// SPDX-License-Identifier: Apache-2.0
//
// Thin blocking HTTP helpers over cpp-httplib for the remote clients.
#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace sopagent::http {

enum class Failure { none, connection, timeout, other };

struct Outcome {
    Failure failure = Failure::none;
    int status = 0;
    std::string body;
    std::string error;

    [[nodiscard]] bool ok() const noexcept { return failure == Failure::none && status >= 200 && status < 300; }
};

using Headers = std::vector<std::pair<std::string, std::string>>;

/// Splits "http://host:port/path" into ("http://host:port", "/path").
std::pair<std::string, std::string> split_url(const std::string& url);

Outcome post_json(const std::string& url, const std::string& body, std::chrono::milliseconds timeout,
                  const Headers& headers = {});
Outcome get(const std::string& url, std::chrono::milliseconds timeout);

}  // namespace sopagent::http
