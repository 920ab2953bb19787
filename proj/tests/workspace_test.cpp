// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "sopagent/error.hpp"
#include "sopagent/workspace.hpp"
#include "support.hpp"

using namespace sopagent;

TEST(Workspace, DefaultsLoadEverything) {
    const auto& ws = fixture::shipped_workspace();
    EXPECT_EQ(ws.sops.size(), 3U);
    EXPECT_EQ(ws.toolkit->index->size(), ws.toolkit->gar->size());
    for (const auto& e : ws.toolkit->gar->entries()) {
        if (e.api) EXPECT_TRUE(ws.registry->has_endpoint(*e.api)) << *e.api;
    }
    EXPECT_THROW((void)ws.sop("nope"), Error);
    EXPECT_EQ(ws.configured_backend()->name(), "scripted");
}

TEST(Workspace, ConfigFileResolvesRelativePaths) {
    const auto dir = std::filesystem::temp_directory_path() / "sopagent_ws_test";
    std::filesystem::create_directories(dir);
    const auto cfg = dir / "config.json";
    std::ofstream(cfg) << R"({"data_dir": ")" << SOPAGENT_TEST_DATA_DIR << R"(",
        "transcript_dir": "out", "listen": "0.0.0.0:9191",
        "retrieval": {"threshold": 0.6},
        "engine": {"max_action_repeats": 4}})";
    const auto c = AppConfig::load(cfg.string());
    EXPECT_EQ(c.transcript_dir, (dir / "out").string());
    EXPECT_EQ(c.listen_host, "0.0.0.0");
    EXPECT_EQ(c.listen_port, 9191);
    EXPECT_DOUBLE_EQ(c.retrieval.threshold, 0.6);
    EXPECT_EQ(c.engine.max_action_repeats, 4U);
    EXPECT_EQ(c.gar_path, std::string(SOPAGENT_TEST_DATA_DIR) + "/gar.json");
    std::filesystem::remove_all(dir);
}

TEST(Workspace, BackendConfigValidation) {
    BackendConfig remote;
    remote.kind = BackendConfig::Kind::remote;
    EXPECT_THROW(remote.validate(), Error);
    remote.endpoint = "http://127.0.0.1:1/v1/chat/completions";
    EXPECT_NO_THROW(remote.validate());
    BackendConfig scripted;
    scripted.endpoint = "http://x";
    EXPECT_THROW(scripted.validate(), Error);
}
