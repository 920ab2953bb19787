// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sopagent/action_repository.hpp"
#include "sopagent/error.hpp"
#include "sopagent/retrieval.hpp"
#include "support.hpp"

using namespace sopagent;

namespace {

const RetrievalIndex& shipped_index() { return *fixture::shipped_workspace().toolkit->index; }

long double reference_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    long double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<long double>(a[i]) * b[i];
        na += static_cast<long double>(a[i]) * a[i];
        nb += static_cast<long double>(b[i]) * b[i];
    }
    if (na == 0 || nb == 0) return 0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

class ConstantEmbedder final : public EmbeddingProvider {
public:
    EmbeddingVector embed(std::string_view) const override { return {{1.0, 0.0}}; }
    std::size_t dim() const noexcept override { return 2; }
};

}  // namespace

TEST(Retrieval, SelfRetrievalForEveryAction) {
    const auto& idx = shipped_index();
    for (const auto& id : idx.action_ids()) {
        const auto m = idx.match_action(id);
        EXPECT_EQ(m.action, id);
        EXPECT_GE(m.score, 0.999) << id;
    }
}

TEST(Retrieval, CuratedParaphrases) {
    const auto& cases = fixture::curated_paraphrases();
    ASSERT_EQ(cases.size(), 20U);
    for (const auto& [paraphrase, expected] : cases) {
        EXPECT_EQ(shipped_index().match_action(paraphrase).action, expected) << paraphrase;
    }
}

TEST(Retrieval, UnrelatedTextIsBelowThreshold) {
    try {
        (void)shipped_index().match_action("purchase a unicorn");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BelowThreshold);
    }
    EXPECT_LT(shipped_index().best_match("purchase a unicorn").score, kDefaultMatchThreshold);
}

TEST(Retrieval, TiesGoToEarliestEntry) {
    const auto gar = load_gar(fixture::data_path("gar.json"));
    const auto idx = RetrievalIndex::build(gar, std::make_shared<ConstantEmbedder>());
    EXPECT_EQ(idx.best_match("anything").action, gar.entries().front().action);
}

TEST(Retrieval, EmbedderNormalizesAndRejectsEmptyText) {
    const HashingEmbedder emb;
    EXPECT_THROW((void)emb.embed(""), Error);
    const auto v = emb.embed("Check   USER status");
    EXPECT_EQ(v.dim(), HashingEmbedder::kDefaultDim);
    EXPECT_NEAR(reference_cosine(v.values, v.values), 1.0L, 1e-12L);
    EXPECT_EQ(v.values, emb.embed("check user status").values);
}

TEST(RetrievalProperty, CosineSymmetricAndBounded) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> value(-5.0, 5.0);
    for (int iter = 0; iter < 10000; ++iter) {
        const std::size_t dim = 1 + rng() % 16;
        std::vector<double> a(dim), b(dim);
        for (auto& x : a) x = rng() % 8 == 0 ? 0.0 : value(rng);
        for (auto& x : b) x = rng() % 8 == 0 ? 0.0 : value(rng);
        if (iter % 500 == 0) std::fill(b.begin(), b.end(), 0.0);
        const double ab = cosine(a, b);
        const double ba = cosine(b, a);
        ASSERT_EQ(ab, ba);
        ASSERT_GE(ab, -1.0);
        ASSERT_LE(ab, 1.0);
        ASSERT_NEAR(ab, static_cast<double>(reference_cosine(a, b)), 1e-9);
    }
}

TEST(RetrievalProperty, ArgmaxInvariantUnderPositiveScaling) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    std::uniform_real_distribution<double> scale(1e-3, 1e3);
    for (int iter = 0; iter < 500; ++iter) {
        const std::size_t dim = 8;
        std::vector<std::vector<double>> table(10, std::vector<double>(dim));
        for (auto& row : table)
            for (auto& x : row) x = value(rng);
        std::vector<double> q(dim);
        for (auto& x : q) x = value(rng);
        auto argmax = [&](const std::vector<double>& query, const std::vector<std::vector<double>>& rows) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < rows.size(); ++i) {
                if (cosine(query, rows[i]) > cosine(query, rows[best])) best = i;
            }
            return best;
        };
        const auto before = argmax(q, table);
        auto scaled_q = q;
        const double kq = scale(rng);
        for (auto& x : scaled_q) x *= kq;
        auto scaled_table = table;
        for (auto& row : scaled_table) {
            const double k = scale(rng);
            for (auto& x : row) x *= k;
        }
        ASSERT_EQ(argmax(scaled_q, scaled_table), before);
    }
}

TEST(RetrievalProperty, IndexScoresMatchReferenceCosine) {
    const auto& idx = shipped_index();
    for (const std::string q : {"check listing", "ask user", "show message email updated"}) {
        const auto qv = idx.provider().embed(q);
        const auto scores = idx.scores(q);
        ASSERT_EQ(scores.size(), idx.size());
        for (std::size_t i = 0; i < scores.size(); ++i) {
            EXPECT_EQ(scores[i].action, idx.action_ids()[i]);
            EXPECT_NEAR(scores[i].score, static_cast<double>(reference_cosine(qv.values, idx.vectors()[i].values)),
                        1e-9);
        }
    }
}
