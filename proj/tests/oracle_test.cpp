// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "sopagent/error.hpp"
#include "sopagent/oracle.hpp"
#include "support.hpp"

using namespace sopagent;
using namespace sopagent::oracle;

namespace {

StateOracle shipped_oracle() {
    const auto& ws = fixture::shipped_workspace();
    return StateOracle(ws.toolkit->gar, ws.toolkit->index);
}

ExecutionMemory memory_of(std::initializer_list<MemoryEntry> entries) {
    ExecutionMemory m;
    for (const auto& e : entries) m.append(e);
    return m;
}

constexpr auto S = Feedback::success;
constexpr auto F = Feedback::fail;

std::string next(const std::string& sop, const ExecutionMemory& m) {
    return shipped_oracle().decide(*fixture::shipped_workspace().sop(sop), m).next_action;
}

UserRequest listing_question(std::string reply) {
    return {"Could you please provide the listing ID?", std::move(reply), "an alphanumeric listing ID"};
}

}  // namespace

TEST(StateOracle, EmptyMemoryGivesRoot) {
    EXPECT_EQ(next("listing_blocked", {}), "check user status");
    EXPECT_EQ(next("brand_approval", {}), "ask user to provide request id");
}

TEST(StateOracle, ApiFailureRepeatsTheCall) {
    const auto m = memory_of({{"check user status", "active", S},
                              {"ask user to provide listing id", "LSTFYDF12G", S},
                              {"check listing id status", "api call failed", F}});
    EXPECT_EQ(next("listing_blocked", m), "check listing id status");
}

TEST(StateOracle, InvalidIdReturnsToTheQuestion) {
    const auto m = memory_of({{"check user status", "active", S},
                              {"ask user to provide listing id", "LST1234", S},
                              {"check listing id status", "invalid listing id", F}});
    EXPECT_EQ(next("listing_blocked", m), "ask user to provide listing id");
}

TEST(StateOracle, QuestionSeeksKnowledgeThenResumes) {
    auto m = memory_of({{"check user status", "active", S}, {"ask user to provide listing id", "how to find it", F}});
    EXPECT_EQ(next("listing_blocked", m), "seek external knowledge");
    m.append({"seek external knowledge", "done", S});
    EXPECT_EQ(next("listing_blocked", m), "ask user to provide listing id");
}

TEST(StateOracle, BranchesOnObservations) {
    auto m = memory_of({{"check user status", "onboarding", S}});
    EXPECT_EQ(next("listing_blocked", m), "show message onboarding");
    m = memory_of({{"check user status", "on-hold", S}});
    EXPECT_EQ(next("listing_blocked", m), "ask user to provide listing id");
    m = memory_of({{"check user status", "active", S},
                   {"ask user to provide listing id", "LSTBLOCK01", S},
                   {"check listing id status", "blocked", S},
                   {"check block reason", "policy violation in listing content", S}});
    EXPECT_EQ(next("listing_blocked", m), "check if listing can be reactivated");
    m.append({"check if listing can be reactivated", "no, not eligible for reactivation", S});
    EXPECT_EQ(next("listing_blocked", m), "check reason code and inform user");
    m.append({"check reason code and inform user", "done", S});
    EXPECT_EQ(next("listing_blocked", m), "terminate the flow");
}

TEST(StateOracle, NumericGuards) {
    auto m = memory_of({{"ask user to provide request id", "BRQ20001", S},
                        {"check request id status", "in-progress, submitted 48 hrs ago", S}});
    EXPECT_EQ(next("brand_approval", m), "show message less than 72 hrs");
    m = memory_of({{"ask user to provide request id", "BRQ20002", S},
                   {"check request id status", "disapproved, submitted 96 hrs ago", S}});
    EXPECT_EQ(next("brand_approval", m), "create ticket brand approval");
}

TEST(StateOracle, OtpFailureGoesBackToCollector) {
    const auto m = memory_of({{"check user status", "active", S},
                              {"ask user about access to the old email", "yes", S},
                              {"ask user to provide old email", "seller@old-mail.com", S},
                              {"send otp and ask for otp received on old email", "111111", S},
                              {"validate otp old email and inform user on validation status", "incorrect otp", F}});
    EXPECT_EQ(next("email_update", m), "send otp and ask for otp received on old email");
}

TEST(StateOracle, UnmatchedObservationThrows) {
    const auto m = memory_of({{"check user status", "suspended", S}});
    try {
        (void)next("listing_blocked", m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoMatchingBranch);
    }
}

TEST(ChooseBranch, GuardKinds) {
    const std::vector<std::string> status{"if its inactive", "if its active", "if its blocked"};
    EXPECT_EQ(choose_branch(status, "Active"), 1U);
    EXPECT_EQ(choose_branch(status, "inactive"), 0U);
    EXPECT_EQ(choose_branch(status, "blocked"), 2U);
    EXPECT_EQ(choose_branch(status, "deleted"), std::nullopt);

    const std::vector<std::string> access{"if user has access", "if user does not have access"};
    EXPECT_EQ(choose_branch(access, "yes"), 0U);
    EXPECT_EQ(choose_branch(access, "no, I lost access"), 1U);

    const std::vector<std::string> hours{"if less than or equal to 72 hrs", "else"};
    EXPECT_EQ(choose_branch(hours, "submitted 72 hrs ago"), 0U);
    EXPECT_EQ(choose_branch(hours, "submitted 73 hrs ago"), 1U);

    const std::vector<std::string> or_guard{"if its onboarding", "if its active or on-hold"};
    EXPECT_EQ(choose_branch(or_guard, "on-hold"), 1U);
}

TEST(TextClassifiers, Polarity) {
    EXPECT_EQ(polarity("yes I do"), Polarity::positive);
    EXPECT_EQ(polarity("I don't have it"), Polarity::negative);
    EXPECT_EQ(polarity("LST1234"), Polarity::unknown);
    EXPECT_TRUE(looks_like_question("how to find it"));
    EXPECT_TRUE(looks_like_question("LST?"));
    EXPECT_FALSE(looks_like_question("LSTFYDF12G"));
    EXPECT_TRUE(looks_like_go_back("can we go back"));
    EXPECT_TRUE(is_param_error("invalid listing id"));
    EXPECT_FALSE(is_param_error("api call failed"));
}

TEST(ActionRole, QuestionsAndEntities) {
    EXPECT_EQ(asked_entity("ask user to provide listing id"), "listing ID");
    EXPECT_EQ(question_for("ask user to provide listing id"), "Could you please provide the listing ID?");
    EXPECT_EQ(question_for("send otp and ask for otp received on old email"),
              "Could you please provide the OTP received on old email?");
    EXPECT_NE(question_for("ask user about access to the old email").find("access to the old email"),
              std::string::npos);
}

TEST(ActionRole, ParamMapping) {
    const std::vector<std::string> params{"listing_id"};
    EXPECT_EQ(map_params(params, {{"listing id value", "LSTFYDF12G"}}),
              (std::map<std::string, std::string>{{"listing_id", "LSTFYDF12G"}}));
    try {
        (void)map_params(params, {{"request id value", "BRQ1"}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingParam);
    }
    const std::vector<std::string> otp{"old_email", "old_email_otp"};
    const SlotMap slots{{"old email value", "a@b.com"}, {"otp received on old email value", "482913"}};
    EXPECT_EQ(map_params(otp, slots),
              (std::map<std::string, std::string>{{"old_email", "a@b.com"}, {"old_email_otp", "482913"}}));
    EXPECT_EQ(map_available_params(otp, {{"old email value", "a@b.com"}}).size(), 1U);
}

TEST(ActionRole, ExecuteByTask) {
    ActionRequest api;
    api.action = "check listing id status";
    api.types = {ActionType::api_call};
    api.params = {"listing_id"};
    api.slots = {{"listing id value", "LSTFYDF12G"}};
    EXPECT_EQ(execute_action(api).params, (std::map<std::string, std::string>{{"listing_id", "LSTFYDF12G"}}));

    ActionRequest ask;
    ask.action = "ask user to provide listing id";
    ask.types = {ActionType::ask_user_input};
    EXPECT_NE(execute_action(ask).user_interaction->find("listing ID"), std::string::npos);

    ActionRequest seek;
    seek.action = "seek external knowledge";
    seek.types = {ActionType::external_knowledge};
    seek.memory = memory_of({{"check user status", "active", S}, {"ask user to provide listing id", "how to find it", F}});
    EXPECT_EQ(execute_action(seek).search_query, "How to find my listing ID?");
    EXPECT_EQ(search_query_for(seek.memory), "How to find my listing ID?");
}

TEST(UserRole, QuestionDetourReplies) {
    const auto ok = user_turn(listing_question("my lisint id is LSTHFKKFL"));
    EXPECT_EQ(ok.input_validation, Feedback::success);
    EXPECT_EQ(ok.slots.at("listing id value"), "LSTHFKKFL");
    EXPECT_EQ(ok.corrected_reply, "my listing id is LSTHFKKFL");

    const auto doubt = user_turn(listing_question("how to find it"));
    EXPECT_EQ(doubt.input_validation, Feedback::fail);
    EXPECT_NE(doubt.user_response.find("wait"), std::string::npos);
    EXPECT_TRUE(doubt.slots.empty());
}

TEST(UserRole, Formats) {
    EXPECT_EQ(format_for("an email address"), InputFormat::email);
    EXPECT_EQ(format_for("a numeric OTP"), InputFormat::otp);
    EXPECT_EQ(format_for("yes or no"), InputFormat::yes_no);
    EXPECT_EQ(format_for("an alphanumeric listing ID"), InputFormat::identifier);
    EXPECT_EQ(match_format(InputFormat::email, "bob@"), std::nullopt);
    EXPECT_EQ(match_format(InputFormat::email, "it is bob@mail.com"), "bob@mail.com");
    EXPECT_EQ(match_format(InputFormat::otp, "code 482913"), "482913");
    EXPECT_EQ(match_format(InputFormat::otp, "12"), std::nullopt);
    EXPECT_EQ(match_format(InputFormat::identifier, "hello there"), std::nullopt);
    EXPECT_EQ(slot_key_for("an alphanumeric listing ID"), "listing id value");

    const auto bad = user_turn({"Could you please provide the old email?", "bob@", "an email address"});
    EXPECT_EQ(bad.input_validation, Feedback::fail);
}

TEST(UserRole, SpellCorrectionLeavesValuesAlone) {
    const std::vector<std::string> vocab{"listing", "email", "provide"};
    EXPECT_EQ(spell_correct("my lisint id is LSTHFKKFL", vocab), "my listing id is LSTHFKKFL");
    EXPECT_EQ(spell_correct("seller@old-mail.com", vocab), "seller@old-mail.com");
    EXPECT_EQ(spell_correct("emial, please", vocab), "email, please");
}

TEST(OracleProperty, DecisionsAreDeterministic) {
    const auto oracle = shipped_oracle();
    const auto& wf = *fixture::shipped_workspace().sop("listing_blocked");
    std::mt19937_64 rng(23);
    const std::vector<std::string> obs{"active", "on-hold", "LSTFYDF12G", "blocked", "api call failed", "done",
                                       "how to find it", "invalid listing id"};
    for (int iter = 0; iter < 200; ++iter) {
        ExecutionMemory m;
        for (int k = 0; k < 6; ++k) {
            std::string first, second;
            try {
                first = oracle.decide(wf, m).next_action;
            } catch (const Error& e) {
                first = std::string("error:") + e.what();
            }
            try {
                second = shipped_oracle().decide(wf, m).next_action;
            } catch (const Error& e) {
                second = std::string("error:") + e.what();
            }
            ASSERT_EQ(first, second);
            if (first.rfind("error:", 0) == 0 || first == kTerminateFlow) break;
            m.append({first, obs[rng() % obs.size()], rng() % 3 ? S : F});
        }
    }
}
