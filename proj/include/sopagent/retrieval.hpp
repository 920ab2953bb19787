// SPDX-License-Identifier: Apache-2.0
//
// Maps free-text actions produced by the state role onto GAR entries by
// cosine similarity over an embedding of every GAR action identifier.
#pragma once

#include <chrono>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sopagent {

class ActionRepository;

struct EmbeddingVector {
    std::vector<double> values;

    [[nodiscard]] std::size_t dim() const noexcept { return values.size(); }
};

/// Cosine similarity; 0 when either vector has zero norm. Result is clamped to [-1, 1].
double cosine(std::span<const double> a, std::span<const double> b);
inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    return cosine(std::span<const double>(a.values), std::span<const double>(b.values));
}

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    /// Throws Error{ProviderUnavailable} when a remote backend cannot be reached.
    [[nodiscard]] virtual EmbeddingVector embed(std::string_view text) const = 0;
    [[nodiscard]] virtual std::size_t dim() const noexcept = 0;
};

/// Offline default: character 3-grams of the lowercased, whitespace-collapsed
/// text (padded with one space on each side) hashed with FNV-1a into a fixed
/// number of buckets, then L2 normalized.
class HashingEmbedder final : public EmbeddingProvider {
public:
    static constexpr std::size_t kDefaultDim = 512;

    explicit HashingEmbedder(std::size_t dim = kDefaultDim);

    [[nodiscard]] EmbeddingVector embed(std::string_view text) const override;
    [[nodiscard]] std::size_t dim() const noexcept override { return dim_; }

private:
    std::size_t dim_;
};

/// Remote embedding endpoint.
///   request:  POST <url>  {"input": "<text>"}
///   response: {"embedding": [float, ...]}
class RemoteEmbedder final : public EmbeddingProvider {
public:
    RemoteEmbedder(std::string url, std::size_t dim, std::chrono::milliseconds timeout);

    [[nodiscard]] EmbeddingVector embed(std::string_view text) const override;
    [[nodiscard]] std::size_t dim() const noexcept override { return dim_; }

private:
    std::string url_;
    std::size_t dim_;
    std::chrono::milliseconds timeout_;
};

struct ActionMatch {
    std::string action;
    double score = 0.0;
};

inline constexpr double kDefaultMatchThreshold = 0.55;

class RetrievalIndex {
public:
    /// Throws Error{EmptyRepository} for an empty repository.
    static RetrievalIndex build(const ActionRepository& repo,
                                std::shared_ptr<const EmbeddingProvider> provider,
                                double threshold = kDefaultMatchThreshold);

    /// Best entry by cosine, ties broken by GAR load order. Never throws for a
    /// non-empty query.
    [[nodiscard]] ActionMatch best_match(std::string_view generated_action) const;

    /// As best_match, but throws Error{BelowThreshold} when the best score is
    /// under the configured threshold.
    [[nodiscard]] ActionMatch match_action(std::string_view generated_action) const;

    /// Scores every entry, load order.
    [[nodiscard]] std::vector<ActionMatch> scores(std::string_view text) const;

    [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] double threshold() const noexcept { return threshold_; }
    [[nodiscard]] const std::vector<std::string>& action_ids() const noexcept { return ids_; }
    [[nodiscard]] const std::vector<EmbeddingVector>& vectors() const noexcept { return vectors_; }
    [[nodiscard]] const EmbeddingProvider& provider() const noexcept { return *provider_; }

private:
    RetrievalIndex() = default;

    std::vector<std::string> ids_;
    std::vector<EmbeddingVector> vectors_;
    std::size_t dim_ = 0;
    double threshold_ = kDefaultMatchThreshold;
    std::shared_ptr<const EmbeddingProvider> provider_;
};

}  // namespace sopagent
