// SPDX-License-Identifier: Apache-2.0
//
// sop: command line entry point for parsing, linting, running, evaluating
// and serving SOP workflows.
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sopagent/error.hpp"
#include "sopagent/eval.hpp"
#include "sopagent/lint.hpp"
#include "sopagent/scripts.hpp"
#include "sopagent/service.hpp"
#include "sopagent/workspace.hpp"

using namespace sopagent;
using nlohmann::json;

namespace {

AppConfig config_from(const std::string& path) {
    if (path.empty()) {
        auto c = AppConfig::defaults();
        c.apply_env();
        return c;
    }
    return AppConfig::load(path);
}

json workflow_json(const SopWorkflow& wf) {
    json nodes = json::array();
    for (const auto& [id, node] : wf.nodes) {
        json children = json::array();
        for (const auto& e : node.children) {
            json edge{{"target", index_of(e.target)}};
            if (e.guard) edge["guard"] = *e.guard;
            children.push_back(std::move(edge));
        }
        nodes.push_back({{"id", index_of(id)},
                         {"kind", std::string(to_string(node.kind))},
                         {"label", node.label},
                         {"depth", node.depth},
                         {"children", std::move(children)}});
    }
    return {{"name", wf.name}, {"root", index_of(wf.root)}, {"nodes", std::move(nodes)}};
}

ChatService* g_service = nullptr;

void on_signal(int) {
    if (g_service != nullptr) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SOP workflow agent"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "Workspace config (JSON)");

    std::string sop_file;
    auto* parse = app.add_subcommand("parse", "Parse an SOP file and print its DAG as JSON");
    parse->add_option("file", sop_file)->required()->check(CLI::ExistingFile);
    bool render = false;
    parse->add_flag("--render", render, "Print the canonical text instead");

    std::string gar_file;
    auto* lint = app.add_subcommand("lint", "Check an SOP file against the GAR");
    lint->add_option("file", sop_file)->required()->check(CLI::ExistingFile);
    lint->add_option("--gar", gar_file, "GAR file (defaults to the workspace GAR)");

    auto* gar = app.add_subcommand("gar", "GAR utilities");
    gar->require_subcommand(1);
    auto* gar_validate = gar->add_subcommand("validate", "Validate a GAR file");
    gar_validate->add_option("file", gar_file)->required()->check(CLI::ExistingFile);

    std::string role_name;
    auto* prompts = app.add_subcommand("prompts", "Prompt templates");
    prompts->require_subcommand(1);
    auto* prompts_show = prompts->add_subcommand("show", "Print a role's template");
    prompts_show->add_option("role", role_name, "state | action | user")->required();

    std::string script_file;
    std::string out_file;
    auto* run = app.add_subcommand("run", "Run a scripted session and print its transcript");
    run->add_option("file", sop_file)->required()->check(CLI::ExistingFile);
    run->add_option("--script", script_file)->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_file, "Also write the transcript here");

    std::string suite_dir;
    std::string backend_name = "scripted";
    std::uint64_t seed = 1;
    unsigned threads = 0;
    auto* eval = app.add_subcommand("eval", "Score a backend on the synthetic suites");
    eval->add_option("--suite", suite_dir, "Suite directory (defaults to the workspace suites)");
    eval->add_option("--backend", backend_name, "scripted | remote")->check(CLI::IsMember({"scripted", "remote"}));
    eval->add_option("--seed", seed);
    eval->add_option("--threads", threads);
    eval->add_option("--out", out_file, "Write the JSON report here");

    std::string listen;
    auto* serve = app.add_subcommand("serve", "Serve the chat HTTP API");
    serve->add_option("--listen", listen, "host:port (overrides the config)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*parse) {
            const auto wf = load_sop_file(sop_file);
            if (render) std::cout << render_sop(wf);
            else std::cout << workflow_json(wf).dump(2) << "\n";
            return 0;
        }
        if (*lint) {
            auto config = config_from(config_path);
            if (!gar_file.empty()) config.gar_path = gar_file;
            const ActionRepository repo = load_gar(config.gar_path);
            const auto index = RetrievalIndex::build(repo, std::make_shared<HashingEmbedder>(config.retrieval.dim),
                                                     config.retrieval.threshold);
            const auto diagnostics = lint_sop(load_sop_file(sop_file), repo, index);
            for (const auto& d : diagnostics) {
                std::cout << to_string(d.kind) << " line " << index_of(d.node) + 1 << ": " << d.message << "\n";
            }
            if (diagnostics.empty()) std::cout << "ok\n";
            return diagnostics.empty() ? 0 : 1;
        }
        if (*gar_validate) {
            const auto repo = load_gar(gar_file);
            std::cout << "ok: " << repo.size() << " actions\n";
            return 0;
        }
        if (*prompts_show) {
            const auto role = parse_role(role_name);
            if (!role) throw Error(ErrorCode::InvalidArgument, "unknown role '" + role_name + "'");
            std::cout << PromptTemplates::builtin().for_role(*role);
            return 0;
        }
        if (*run) {
            const auto ws = load_workspace(config_from(config_path));
            const auto script = load_session_script(script_file);
            auto wf = std::make_shared<const SopWorkflow>(load_sop_file(sop_file));
            auto session = start_session(wf->name, wf, ws.toolkit, RoleBackends::all(ws.configured_backend()),
                                         scripted_environment(script, ws.registry, ws.knowledge), ws.config.engine);
            const auto transcript = run_to_completion(*session).to_jsonl();
            std::cout << transcript;
            if (!out_file.empty()) std::ofstream(out_file) << transcript;
            return 0;
        }
        if (*eval) {
            auto config = config_from(config_path);
            if (!suite_dir.empty()) config.suite_dir = suite_dir;
            if (backend_name == "remote" && config.backend.kind != BackendConfig::Kind::remote) {
                throw Error(ErrorCode::InvalidArgument,
                            "remote backend needs backend.endpoint in the config or SOPAGENT_BACKEND_ENDPOINT");
            }
            const auto ws = load_workspace(config);
            const auto suites = load_suite_dir(ws.config.suite_dir);
            const auto sessions = generate_suite_sessions(suites, seed);
            const auto started = std::chrono::steady_clock::now();
            const PredictorFactory factory = [&ws, &backend_name] {
                return RoleBackends::all(backend_name == "remote" ? ws.configured_backend() : ws.scripted_backend());
            };
            const auto report = evaluate(ws, sessions, factory, threads);
            const auto secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            const auto label = backend_name == "remote" ? ws.configured_backend()->name() : backend_name;
            std::cout << report.to_table(label) << "\nElapsed: " << secs << " s\n";
            if (!out_file.empty()) std::ofstream(out_file) << report.to_json(label).dump(2) << "\n";
            return 0;
        }
        if (*serve) {
            auto config = config_from(config_path);
            if (!listen.empty()) {
                const auto colon = listen.rfind(':');
                config.listen_host = listen.substr(0, colon);
                config.listen_port = std::stoi(listen.substr(colon + 1));
            }
            const auto host = config.listen_host;
            const auto port = config.listen_port;
            ChatService service(load_workspace(std::move(config)));
            const int bound = service.bind(host, port);
            std::cout << "listening on http://" << host << ":" << bound << std::endl;
            g_service = &service;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            service.serve();
            g_service = nullptr;
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
