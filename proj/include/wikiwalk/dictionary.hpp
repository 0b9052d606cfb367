#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wikiwalk/common.hpp"

namespace wikiwalk {

struct Candidate {
    NodeId article = kNil;
    std::uint64_t count = 0;
    double prior = 0.0;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// One mention with its candidate articles, sorted by descending prior and
/// then ascending article id.
struct DictEntry {
    std::string mention;
    std::vector<Candidate> candidates;

    /// Highest-prior candidate (lowest id on ties). Entry must be non-empty.
    const Candidate& best() const { return candidates.front(); }
    double prior_of(NodeId article) const;
    bool monosemous() const { return candidates.size() == 1; }

    friend bool operator==(const DictEntry&, const DictEntry&) = default;
};

/// Lowercases, removes parenthesized text (nested-aware, an unmatched '('
/// removes to the end), collapses whitespace and trims. An empty result means
/// the mention is unusable.
std::string normalize_mention(std::string_view raw);

/// normalize_mention followed by a whitespace split.
std::vector<std::string> tokenize(std::string_view text);

std::size_t token_count(std::string_view normalized);

/// Aggregated (mention, article, count) row as found in dict_counts.tsv.
struct CountRow {
    std::string mention;
    NodeId article = kNil;
    std::uint64_t count = 0;
};

std::vector<CountRow> load_count_file(const std::filesystem::path& path);

/// Storage behind a Dictionary. Implementations are immutable once built and
/// must tolerate concurrent readers.
class DictionaryStore {
public:
    virtual ~DictionaryStore() = default;
    virtual std::optional<DictEntry> find(std::string_view normalized) const = 0;
    virtual std::size_t size() const = 0;
    virtual std::size_t max_tokens() const = 0;
    /// All entries in ascending byte order of the mention.
    virtual std::vector<DictEntry> entries() const = 0;
};

enum class DictionaryBackend { Memory, Disk };

struct DictMatch {
    std::size_t begin = 0;  // first token
    std::size_t end = 0;    // one past the last token
    DictEntry entry;
};

class Dictionary {
public:
    struct BuildTally {
        std::uint64_t dropped_zero_total = 0;
        std::uint64_t dropped_empty_mention = 0;
    };

    Dictionary() = default;
    explicit Dictionary(std::shared_ptr<const DictionaryStore> store);

    /// prior(article | mention) = count / total count of the mention. Mentions
    /// whose total is zero are dropped and tallied. When `node_count` is given,
    /// candidate ids must lie below it.
    static Dictionary build(std::span<const CountRow> rows, std::optional<std::size_t> node_count = std::nullopt,
                            BuildTally* tally = nullptr);

    /// Writes the GWDICT1 snapshot.
    void save(const std::filesystem::path& path) const;
    static Dictionary open(const std::filesystem::path& path, DictionaryBackend backend = DictionaryBackend::Memory);

    /// Normalizes `raw` first.
    std::optional<DictEntry> lookup(std::string_view raw) const;
    std::optional<DictEntry> find_normalized(std::string_view normalized) const;

    /// Greedy left-to-right longest match over already-normalized tokens.
    /// Matches never overlap and are returned in order.
    std::vector<DictMatch> longest_match_scan(std::span<const std::string> tokens) const;

    std::size_t size() const { return store_ ? store_->size() : 0; }
    std::size_t max_tokens() const { return store_ ? store_->max_tokens() : 0; }
    std::vector<DictEntry> entries() const;

private:
    std::shared_ptr<const DictionaryStore> store_;
};

}  // namespace wikiwalk
