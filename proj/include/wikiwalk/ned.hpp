#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wikiwalk/dictionary.hpp"
#include "wikiwalk/graph.hpp"
#include "wikiwalk/ppr.hpp"
#include "wikiwalk/relatedness.hpp"

namespace wikiwalk {

struct NedQuery {
    std::string query_id;
    std::string mention;
    std::vector<std::string> context_tokens;  // normalized document tokens (see tokenize)
    std::size_t target_index = 0;
    std::size_t target_length = 0;  // tokens covered by the mention; 0 when it was not located
    std::optional<std::string> gold_article;
};

struct NedPrediction {
    std::string query_id;
    NodeId predicted = kNil;
    std::vector<std::pair<NodeId, double>> candidate_scores;  // descending
    bool fallback_used = false;

    bool is_nil() const { return predicted == kNil; }
    double score() const { return candidate_scores.empty() ? 0.0 : candidate_scores.front().second; }
};

/// Title search used as the last candidate-generation step.
class TitleResolver {
public:
    virtual ~TitleResolver() = default;
    /// Best matching article title, or nullopt when nothing matched or the lookup failed.
    virtual std::optional<std::string> resolve(std::string_view mention) = 0;
};

/// MediaWiki search endpoint (`list=search`) over plain HTTP.
class HttpTitleResolver final : public TitleResolver {
public:
    HttpTitleResolver(std::string host, int port, std::string path = "/w/api.php",
                      std::chrono::milliseconds min_interval = std::chrono::milliseconds(100));
    std::optional<std::string> resolve(std::string_view mention) override;

private:
    std::string host_;
    int port_;
    std::string path_;
    std::chrono::milliseconds min_interval_;
    std::mutex mutex_;
    std::chrono::steady_clock::time_point last_{};
};

/// Disk-backed cache in front of another resolver. Negative answers are cached
/// too; failures of the inner resolver are not. The cache file is rewritten
/// atomically (temp file + rename) after every new answer.
class CachingTitleResolver final : public TitleResolver {
public:
    CachingTitleResolver(TitleResolver& inner, std::filesystem::path cache_file);
    std::optional<std::string> resolve(std::string_view mention) override;
    std::size_t cached() const;

private:
    void persist() const;

    TitleResolver& inner_;
    std::filesystem::path cache_file_;
    mutable std::mutex mutex_;
    std::map<std::string, std::string> cache_;  // empty value = known miss
};

/// Remote step of candidate generation: resolver answer mapped to a node.
struct RemoteCandidates {
    TitleResolver& resolver;
    const NodeTable& nodes;
};

/// Candidate entry for a mention. Tries, first hit wins: direct lookup with the
/// parenthetical stripped, dropping a leading "the", dropping the middle token
/// of a three-token mention, then the remote resolver if given.
std::optional<DictEntry> generate_candidates(std::string_view mention, const Dictionary& dict,
                                             const RemoteCandidates* remote = nullptr);

/// Dictionary mentions in the 101-token window around the target, scanned on
/// each side of the target span separately.
std::vector<DictEntry> extract_context(const NedQuery& q, const Dictionary& dict);

inline constexpr std::size_t kContextRadius = 50;

struct NedOptions {
    PprParams ppr;
    bool include_target_in_teleport = true;
};

/// PPR ranking of the target's candidates, reweighted by prior when the walk
/// was initialized by prior. Falls back to the highest prior without context.
NedPrediction disambiguate(const NedQuery& q, const PprEngine& engine, const Dictionary& dict, const NedOptions& options,
                           const RemoteCandidates* remote = nullptr);

/// Direct-link baseline: prior(c) × Σ weight(m) · NGD(c, article(m)) over the
/// monosemous context mentions m, weight being the occurrences in the window.
NedPrediction ngd_disambiguate(const NedQuery& q, const NgdIndex& ngd, const Dictionary& dict,
                               const RemoteCandidates* remote = nullptr);

/// Counts the distinct context articles adjacent to each candidate in either direction.
NedPrediction direct_link_disambiguate(const NedQuery& q, const TypedGraph& g, const Dictionary& dict,
                                       const RemoteCandidates* remote = nullptr);

/// Highest-prior candidate.
NedPrediction mfs_baseline(const NedQuery& q, const Dictionary& dict, const RemoteCandidates* remote = nullptr);

/// Builds a query from raw document text. The mention is located among the
/// normalized tokens, preferring the occurrence nearest `char_offset` when given.
NedQuery make_query(std::string query_id, std::string mention, std::string_view document,
                    std::optional<std::size_t> char_offset = std::nullopt,
                    std::optional<std::string> gold = std::nullopt);

}  // namespace wikiwalk
