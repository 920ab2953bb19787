// SPDX-License-Identifier: Apache-2.0
#include "sopagent/workspace.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "sopagent/error.hpp"
#include "sopagent/retrieval.hpp"

#ifndef SOPAGENT_DATA_DIR
#define SOPAGENT_DATA_DIR "data"
#endif

namespace sopagent {

namespace fs = std::filesystem;
using nlohmann::json;

std::string default_data_dir() {
    if (const char* env = std::getenv("SOPAGENT_DATA_DIR"); env != nullptr && *env != '\0') return env;
    return SOPAGENT_DATA_DIR;
}

AppConfig AppConfig::defaults(const std::string& data_dir) {
    AppConfig c;
    const fs::path d(data_dir);
    c.data_dir = data_dir;
    c.sop_dir = (d / "sops").string();
    c.gar_path = (d / "gar.json").string();
    c.registry_path = (d / "api_registry.json").string();
    c.knowledge_path = (d / "knowledge.json").string();
    c.suite_dir = (d / "suites").string();
    return c;
}

namespace {

std::string resolve(const std::string& base, const std::string& p) {
    const fs::path path(p);
    if (path.is_absolute() || base.empty()) return path.string();
    return (fs::path(base) / path).lexically_normal().string();
}

std::chrono::milliseconds ms(const json& j, const char* key, std::chrono::milliseconds fallback) {
    return j.contains(key) ? std::chrono::milliseconds(j.at(key).get<long long>()) : fallback;
}

}  // namespace

AppConfig AppConfig::from_json(const json& j, const std::string& base_dir) {
    try {
        const auto data_dir = j.contains("data_dir") ? resolve(base_dir, j.at("data_dir").get<std::string>())
                                                     : default_data_dir();
        AppConfig c = defaults(data_dir);
        auto path_key = [&](const char* key, std::string& target) {
            if (j.contains(key)) target = resolve(base_dir, j.at(key).get<std::string>());
        };
        path_key("sop_dir", c.sop_dir);
        path_key("gar", c.gar_path);
        path_key("api_registry", c.registry_path);
        path_key("knowledge", c.knowledge_path);
        path_key("suite_dir", c.suite_dir);
        if (j.contains("knowledge_endpoint")) c.knowledge_endpoint = j.at("knowledge_endpoint").get<std::string>();
        if (j.contains("transcript_dir")) c.transcript_dir = resolve(base_dir, j.at("transcript_dir").get<std::string>());
        if (j.contains("listen")) {
            const auto listen = j.at("listen").get<std::string>();
            const auto colon = listen.rfind(':');
            if (colon == std::string::npos) throw Error(ErrorCode::SchemaError, "listen must be host:port");
            c.listen_host = listen.substr(0, colon);
            c.listen_port = std::stoi(listen.substr(colon + 1));
        }
        c.turn_timeout = ms(j, "turn_timeout_ms", c.turn_timeout);

        if (j.contains("backend")) {
            const auto& b = j.at("backend");
            const auto kind = b.value("kind", std::string("scripted"));
            if (kind == "remote") c.backend.kind = BackendConfig::Kind::remote;
            else if (kind != "scripted") throw Error(ErrorCode::SchemaError, "unknown backend kind '" + kind + "'");
            if (b.contains("endpoint")) c.backend.endpoint = b.at("endpoint").get<std::string>();
            if (b.contains("model")) c.backend.model_name = b.at("model").get<std::string>();
            c.backend.timeout = ms(b, "timeout_ms", c.backend.timeout);
            c.backend.max_retries = b.value("max_retries", c.backend.max_retries);
        }
        if (j.contains("retrieval")) {
            const auto& r = j.at("retrieval");
            c.retrieval.provider = r.value("provider", c.retrieval.provider);
            if (r.contains("endpoint")) c.retrieval.endpoint = r.at("endpoint").get<std::string>();
            c.retrieval.dim = r.value("dim", c.retrieval.dim);
            c.retrieval.threshold = r.value("threshold", c.retrieval.threshold);
            c.retrieval.timeout = ms(r, "timeout_ms", c.retrieval.timeout);
        }
        if (j.contains("engine")) {
            const auto& e = j.at("engine");
            c.engine.max_action_repeats = e.value("max_action_repeats", c.engine.max_action_repeats);
            c.engine.max_backend_retries = e.value("max_backend_retries", c.engine.max_backend_retries);
            c.engine.grace_message = e.value("grace_message", c.engine.grace_message);
            c.engine.completion_message = e.value("completion_message", c.engine.completion_message);
        }
        return c;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("config: ") + e.what());
    }
}

AppConfig AppConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, path + ": " + e.what());
    }
    auto c = from_json(j, fs::absolute(path).parent_path().string());
    c.apply_env();
    return c;
}

void AppConfig::apply_env() {
    auto env = [](const char* name) -> std::optional<std::string> {
        const char* v = std::getenv(name);
        if (v == nullptr || *v == '\0') return std::nullopt;
        return std::string(v);
    };
    if (auto v = env("SOPAGENT_BACKEND_ENDPOINT")) {
        backend.endpoint = *v;
        backend.kind = BackendConfig::Kind::remote;
    }
    if (auto v = env("SOPAGENT_BACKEND_MODEL")) backend.model_name = *v;
    if (auto v = env("SOPAGENT_BACKEND_API_KEY")) backend.api_key = *v;
}

std::map<std::string, std::shared_ptr<const SopWorkflow>> load_sop_dir(const std::string& dir) {
    std::map<std::string, std::shared_ptr<const SopWorkflow>> out;
    if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "no SOP directory at " + dir);
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() != ".sop") continue;
        auto wf = std::make_shared<SopWorkflow>(load_sop_file(e.path().string()));
        out.emplace(wf->name, std::move(wf));
    }
    return out;
}

std::shared_ptr<Backend> Workspace::scripted_backend() const {
    return std::make_shared<ScriptedBackend>(toolkit->gar, toolkit->index);
}

std::shared_ptr<Backend> Workspace::configured_backend() const {
    if (config.backend.kind == BackendConfig::Kind::remote) return std::make_shared<RemoteBackend>(config.backend);
    return scripted_backend();
}

std::shared_ptr<const SopWorkflow> Workspace::sop(const std::string& name) const {
    const auto it = sops.find(name);
    if (it == sops.end()) throw Error(ErrorCode::InvalidArgument, "unknown SOP '" + name + "'");
    return it->second;
}

Workspace load_workspace(AppConfig config) {
    Workspace ws;
    auto gar = std::make_shared<const ActionRepository>(load_gar(config.gar_path));
    std::shared_ptr<const EmbeddingProvider> provider;
    if (config.retrieval.provider == "remote") {
        if (!config.retrieval.endpoint) throw Error(ErrorCode::InvalidArgument, "remote retrieval needs an endpoint");
        provider = std::make_shared<RemoteEmbedder>(*config.retrieval.endpoint, config.retrieval.dim,
                                                    config.retrieval.timeout);
    } else if (config.retrieval.provider == "hashing") {
        provider = std::make_shared<HashingEmbedder>(config.retrieval.dim);
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown retrieval provider '" + config.retrieval.provider + "'");
    }
    auto index = std::make_shared<const RetrievalIndex>(RetrievalIndex::build(*gar, provider, config.retrieval.threshold));
    auto toolkit = std::make_shared<AgentToolkit>();
    toolkit->gar = gar;
    toolkit->index = index;
    const auto prompt_dir = fs::path(config.data_dir) / "prompts";
    if (fs::exists(prompt_dir / "state.txt")) toolkit->prompts = PromptTemplates::load(prompt_dir.string());
    ws.toolkit = std::move(toolkit);
    ws.sops = load_sop_dir(config.sop_dir);
    auto registry = std::make_shared<ApiRegistry>(load_api_registry(config.registry_path));
    for (const auto& e : gar->entries()) {
        if (e.api && !registry->has_endpoint(*e.api)) {
            throw Error(ErrorCode::UnregisteredEndpoint, "GAR endpoint '" + *e.api + "' has no registry entry");
        }
    }
    ws.registry = std::move(registry);
    if (config.knowledge_endpoint) {
        ws.knowledge = std::make_shared<RemoteKnowledge>(*config.knowledge_endpoint, config.backend.timeout);
    } else {
        ws.knowledge = std::make_shared<StubKnowledge>(load_knowledge_stub(config.knowledge_path));
    }
    ws.config = std::move(config);
    return ws;
}

}  // namespace sopagent
