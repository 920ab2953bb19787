// SPDX-License-Identifier: Apache-2.0
#include "sopagent/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "http_client.hpp"
#include "sopagent/action_repository.hpp"
#include "sopagent/error.hpp"
#include "sopagent/text.hpp"

namespace sopagent {

namespace {

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void normalize(std::vector<double>& v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return;
    for (double& x : v) x /= norm;
}

}  // namespace

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "cosine of vectors with different dims");
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw Error(ErrorCode::InvalidArgument, "embedding dim must be positive");
}

EmbeddingVector HashingEmbedder::embed(std::string_view input) const {
    const std::string t = text::collapse_whitespace(text::to_lower(input));
    if (t.empty()) throw Error(ErrorCode::InvalidArgument, "cannot embed empty text");
    const std::string padded = " " + t + " ";
    EmbeddingVector v;
    v.values.assign(dim_, 0.0);
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
        v.values[fnv1a(std::string_view(padded).substr(i, 3)) % dim_] += 1.0;
    }
    normalize(v.values);
    return v;
}

RemoteEmbedder::RemoteEmbedder(std::string url, std::size_t dim, std::chrono::milliseconds timeout)
    : url_(std::move(url)), dim_(dim), timeout_(timeout) {}

EmbeddingVector RemoteEmbedder::embed(std::string_view input) const {
    if (text::trim(input).empty()) throw Error(ErrorCode::InvalidArgument, "cannot embed empty text");
    const nlohmann::json body{{"input", std::string(input)}};
    const auto res = http::post_json(url_, body.dump(), timeout_);
    if (!res.ok()) {
        throw Error(ErrorCode::ProviderUnavailable,
                    "embedding endpoint " + url_ + ": " + (res.error.empty() ? std::to_string(res.status) : res.error));
    }
    EmbeddingVector v;
    try {
        const auto j = nlohmann::json::parse(res.body);
        v.values = j.at("embedding").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ProviderUnavailable, std::string("bad embedding response: ") + e.what());
    }
    if (v.dim() != dim_) {
        throw Error(ErrorCode::ProviderUnavailable, "embedding dim " + std::to_string(v.dim()) + " != configured " +
                                                        std::to_string(dim_));
    }
    if (!std::all_of(v.values.begin(), v.values.end(), [](double x) { return std::isfinite(x); })) {
        throw Error(ErrorCode::ProviderUnavailable, "embedding contains non-finite values");
    }
    normalize(v.values);
    return v;
}

RetrievalIndex RetrievalIndex::build(const ActionRepository& repo, std::shared_ptr<const EmbeddingProvider> provider,
                                     double threshold) {
    if (repo.size() == 0) throw Error(ErrorCode::EmptyRepository, "cannot index an empty repository");
    RetrievalIndex index;
    index.provider_ = std::move(provider);
    index.dim_ = index.provider_->dim();
    index.threshold_ = threshold;
    for (const auto& e : repo.entries()) {
        index.ids_.push_back(e.action);
        index.vectors_.push_back(index.provider_->embed(e.action));
    }
    return index;
}

std::vector<ActionMatch> RetrievalIndex::scores(std::string_view query) const {
    const auto q = provider_->embed(query);
    std::vector<ActionMatch> out;
    out.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) out.push_back({ids_[i], cosine(q, vectors_[i])});
    return out;
}

ActionMatch RetrievalIndex::best_match(std::string_view generated_action) const {
    const auto all = scores(generated_action);
    // strict '>' keeps the earliest entry on ties
    std::size_t best = 0;
    for (std::size_t i = 1; i < all.size(); ++i) {
        if (all[i].score > all[best].score) best = i;
    }
    return all[best];
}

ActionMatch RetrievalIndex::match_action(std::string_view generated_action) const {
    auto m = best_match(generated_action);
    if (m.score < threshold_) {
        throw Error(ErrorCode::BelowThreshold, "'" + std::string(generated_action) + "' best matches '" + m.action +
                                                   "' with score " + std::to_string(m.score));
    }
    return m;
}

}  // namespace sopagent
