// SPDX-License-Identifier: Apache-2.0
//
// Configuration and the loaded, shared resources built from it.
#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "sopagent/backends.hpp"
#include "sopagent/engine.hpp"
#include "sopagent/environments.hpp"

namespace sopagent {

/// SOPAGENT_DATA_DIR if set, else the data directory of the source tree.
std::string default_data_dir();

struct RetrievalConfig {
    std::string provider = "hashing";  // "hashing" | "remote"
    std::optional<std::string> endpoint;
    std::size_t dim = 512;
    double threshold = 0.55;
    std::chrono::milliseconds timeout{10000};
};

/// Keys (all optional):
///   data_dir, sop_dir, gar, api_registry, knowledge, knowledge_endpoint,
///   suite_dir, transcript_dir, listen ("host:port"), turn_timeout_ms,
///   backend.{kind, endpoint, model, timeout_ms, max_retries},
///   retrieval.{provider, endpoint, dim, threshold, timeout_ms},
///   engine.{max_action_repeats, max_backend_retries, grace_message}
/// Relative paths resolve against the directory holding the config file.
struct AppConfig {
    std::string data_dir;
    std::string sop_dir;
    std::string gar_path;
    std::string registry_path;
    std::string knowledge_path;
    std::string suite_dir;
    std::optional<std::string> knowledge_endpoint;
    std::optional<std::string> transcript_dir;
    BackendConfig backend;
    RetrievalConfig retrieval;
    EngineConfig engine;
    std::string listen_host = "127.0.0.1";
    int listen_port = 8080;
    std::chrono::milliseconds turn_timeout{600000};

    static AppConfig defaults(const std::string& data_dir = default_data_dir());
    static AppConfig from_json(const nlohmann::json& j, const std::string& base_dir);
    static AppConfig load(const std::string& path);

    /// SOPAGENT_BACKEND_ENDPOINT, SOPAGENT_BACKEND_MODEL, SOPAGENT_BACKEND_API_KEY.
    void apply_env();
};

/// Every *.sop file in a directory, keyed by file stem.
std::map<std::string, std::shared_ptr<const SopWorkflow>> load_sop_dir(const std::string& dir);

struct Workspace {
    AppConfig config;
    std::shared_ptr<const AgentToolkit> toolkit;
    std::map<std::string, std::shared_ptr<const SopWorkflow>> sops;
    std::shared_ptr<const ApiRegistry> registry;
    std::shared_ptr<const KnowledgeClient> knowledge;

    [[nodiscard]] std::shared_ptr<Backend> scripted_backend() const;
    /// Backend selected by config.backend.
    [[nodiscard]] std::shared_ptr<Backend> configured_backend() const;
    /// Throws Error{InvalidArgument} for an unknown SOP.
    [[nodiscard]] std::shared_ptr<const SopWorkflow> sop(const std::string& name) const;
};

Workspace load_workspace(AppConfig config);

}  // namespace sopagent
