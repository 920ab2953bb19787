// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "sopagent/error.hpp"
#include "sopagent/eval.hpp"
#include "sopagent/oracle.hpp"
#include "support.hpp"

using namespace sopagent;

namespace {

const std::vector<SyntheticSuite>& shipped_suites() {
    static const auto suites = load_suite_dir(fixture::shipped_workspace().config.suite_dir);
    return suites;
}

const SyntheticSuite& suite(const std::string& name) {
    for (const auto& s : shipped_suites())
        if (s.sop == name) return s;
    throw std::runtime_error("no suite " + name);
}

PredictorFactory oracle_predictor() {
    return [] { return RoleBackends::all(fixture::shipped_workspace().scripted_backend()); };
}

// Always proposes the workflow's first line as the next action.
class FirstActionBackend final : public Backend {
public:
    explicit FirstActionBackend(std::shared_ptr<Backend> inner) : inner_(std::move(inner)) {}
    std::string complete(const RoleRequest& r) override {
        if (r.role != Role::state) return inner_->complete(r);
        const auto& wf = *std::get<StateRequest>(r.context).workflow;
        return nlohmann::json{{"thought", "start over"}, {"next_action", wf.node(wf.root).label}}.dump();
    }
    std::string name() const override { return "first-action"; }

private:
    std::shared_ptr<Backend> inner_;
};

// Drops every param from api_call replies.
class WithholdingBackend final : public Backend {
public:
    explicit WithholdingBackend(std::shared_ptr<Backend> inner) : inner_(std::move(inner)) {}
    std::string complete(const RoleRequest& r) override {
        if (r.role == Role::action && std::get<ActionRequest>(r.context).types.contains(ActionType::api_call)) {
            return R"({"thought": "none", "params": {}})";
        }
        return inner_->complete(r);
    }
    std::string name() const override { return "withholding"; }

private:
    std::shared_ptr<Backend> inner_;
};

// Independent replay: step the session by hand and ask the oracle before
// every decision the engine is about to make.
std::pair<std::size_t, std::size_t> brute_force_first_action(const GeneratedSession& g) {
    const auto& ws = fixture::shipped_workspace();
    const oracle::StateOracle labeller(ws.toolkit->gar, ws.toolkit->index);
    const auto wf = ws.sop(g.script.sop);
    auto s = fixture::scripted_session(
        g.script, RoleBackends::all(std::make_shared<FirstActionBackend>(ws.scripted_backend())), ws.config.engine);
    std::size_t states = 0, correct = 0;
    bool failed = false;
    while (s->running()) {
        if (s->state().turns < turn_ceiling(*wf)) {
            std::string expected = "<none>";
            try {
                expected = labeller.decide(*wf, s->state().memory).next_action;
            } catch (const Error&) {
            }
            ++states;
            if (!failed && expected == wf->node(wf->root).label) ++correct;
            else failed = true;
        }
        s->step();
    }
    return {states, correct};
}

}  // namespace

TEST(Generation, SameSeedSameSessions) {
    const auto a = generate_suite_sessions(shipped_suites(), 1);
    const auto b = generate_suite_sessions(shipped_suites(), 1);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].name, b[i].name);
        EXPECT_EQ(a[i].script, b[i].script);
    }
    const auto c = generate_suite_sessions(shipped_suites(), 2);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) differs |= !(a[i].script == c[i].script);
    EXPECT_TRUE(differs);
}

TEST(Generation, DefaultScale) {
    const auto sessions = generate_suite_sessions(shipped_suites(), 1);
    EXPECT_GE(sessions.size(), 220U);
}

TEST(Generation, EmptyPoolRejected) {
    auto s = suite("listing_blocked");
    s.user_inputs.begin()->second.clear();
    try {
        (void)generate_sessions(s, 1, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyPool);
    }
}

TEST(Generation, ValidOnlyPoolsGiveHappyPaths) {
    for (auto s : shipped_suites()) {
        for (auto& [action, pools] : s.user_inputs) {
            const auto valid = pools.at(InputCategory::valid);
            pools.clear();
            pools[InputCategory::valid] = valid;
        }
        for (auto& [endpoint, outcomes] : s.api_responses) {
            std::erase_if(outcomes, [](const ApiResult& r) { return r.feedback == Feedback::fail; });
        }
        for (const auto& g : generate_sessions(s, 30, 4)) {
            const auto t = fixture::run_script(g.script);
            EXPECT_EQ(t.status, SessionStatus::terminated_normal) << g.name << " " << t.termination_reason;
            for (const auto& e : t.entries) EXPECT_EQ(e.feedback, Feedback::success) << g.name << " " << e.action;
        }
    }
}

TEST(Scoring, PointOfFailure) {
    const std::vector<StateLabel> labels{{"a", "a"}, {"b", "b"}, {"x", "c"}, {"d", "d"}};
    EXPECT_EQ(count_correct_states(labels), 2U);
    EXPECT_EQ(count_correct_states({}), 0U);
}

TEST(ScoringProperty, FlippingAStateNeverRaisesTheScore) {
    std::mt19937_64 rng(41);
    for (int iter = 0; iter < 2000; ++iter) {
        std::vector<StateLabel> labels(rng() % 12);
        for (auto& l : labels) {
            l.expected = "e";
            l.predicted = rng() % 5 ? "e" : "p";
        }
        const auto before = count_correct_states(labels);
        std::size_t naive = 0;
        while (naive < labels.size() && labels[naive].predicted == "e") ++naive;
        ASSERT_EQ(before, naive);
        if (labels.empty()) continue;
        const auto k = rng() % labels.size();
        auto flipped = labels;
        flipped[k].predicted = "p";
        const auto after = count_correct_states(flipped);
        ASSERT_LE(after, before);
        ASSERT_LE(after, k);
    }
}

TEST(Scoring, OracleAgainstItselfIsPerfect) {
    const auto sessions = generate_suite_sessions(shipped_suites(), 3);
    const auto report = evaluate(fixture::shipped_workspace(), sessions, oracle_predictor(), 2);
    EXPECT_EQ(report.sessions, sessions.size());
    EXPECT_EQ(report.state_correct, report.states);
    EXPECT_EQ(report.question_generation.correct, report.question_generation.total);
    EXPECT_EQ(report.parameter_extraction.correct, report.parameter_extraction.total);
    EXPECT_EQ(report.search_query_generation.correct, report.search_query_generation.total);
    EXPECT_GT(report.search_query_generation.total, 0U);
}

TEST(Scoring, FirstActionPredictorMatchesBruteForceReplay) {
    const auto& ws = fixture::shipped_workspace();
    const auto sessions = generate_suite_sessions(shipped_suites(), 1);
    std::size_t states = 0, correct = 0;
    for (const auto& g : sessions) {
        const auto [n, c] = brute_force_first_action(g);
        states += n;
        correct += c;
    }
    const auto report = evaluate(ws, sessions, [&] {
        return RoleBackends::all(std::make_shared<FirstActionBackend>(ws.scripted_backend()));
    });
    EXPECT_EQ(report.states, states);
    EXPECT_EQ(report.state_correct, correct);
    EXPECT_LT(report.state_accuracy(), 1.0);
    EXPECT_GT(report.state_accuracy(), 0.0);
}

TEST(Scoring, OrderAndThreadCountDoNotMatter) {
    const auto& ws = fixture::shipped_workspace();
    auto sessions = generate_suite_sessions(shipped_suites(), 8);
    const auto base = evaluate(ws, sessions, oracle_predictor(), 1);
    std::mt19937_64 rng(8);
    std::shuffle(sessions.begin(), sessions.end(), rng);
    EXPECT_EQ(evaluate(ws, sessions, oracle_predictor(), 3), base);
}

TEST(Scoring, WithheldSlotCountsAsIncorrect) {
    const auto& ws = fixture::shipped_workspace();
    GeneratedSession g{"withheld", load_session_script(fixture::data_path("scripts/listing_happy_path.json"))};
    const auto outcome = run_scored_session(
        ws, g, RoleBackends::all(std::make_shared<WithholdingBackend>(ws.scripted_backend())));
    const std::vector<SessionOutcome> outcomes{outcome};
    const auto tasks = score_action_tasks(outcomes);
    EXPECT_GT(tasks.parameter_extraction.total, 0U);
    EXPECT_LT(tasks.parameter_extraction.correct, tasks.parameter_extraction.total);
}

TEST(Report, TableAndJson) {
    AccuracyReport r;
    r.sessions = 2;
    r.states = 4;
    r.state_correct = 3;
    r.question_generation = {1, 2};
    const auto j = r.to_json("scripted");
    EXPECT_DOUBLE_EQ(j.at("state_accuracy").get<double>(), 0.75);
    EXPECT_NE(r.to_table("scripted").find("0.750"), std::string::npos);
}
