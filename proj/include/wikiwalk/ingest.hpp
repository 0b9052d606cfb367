#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wikiwalk/dictionary.hpp"
#include "wikiwalk/graph.hpp"

namespace wikiwalk {

enum class PageKind : std::uint8_t { Article, Category, Redirect, Disambiguation };

struct PageRecord {
    std::uint64_t page_id = 0;
    std::string title;
    PageKind kind = PageKind::Article;
    std::optional<std::string> redirect_target;
};

struct RawLinkRecord {
    std::string src_title;
    std::string dst_title;
    EdgeKind kind = EdgeKind::H;

    friend bool operator==(const RawLinkRecord&, const RawLinkRecord&) = default;
};

struct AnchorRecord {
    std::string anchor_text;
    std::string dst_title;
    std::uint64_t count = 1;

    friend bool operator==(const AnchorRecord&, const AnchorRecord&) = default;
};

/// Diagnostics gathered across the ingest stages. Serialized as ingest_report.json.
struct IngestTally {
    std::uint64_t pages_read = 0;
    std::uint64_t pages_other_namespace = 0;
    std::uint64_t pages_malformed = 0;

    std::uint64_t links_read = 0;
    std::uint64_t links_malformed = 0;
    std::uint64_t links_unknown_title = 0;
    std::uint64_t links_redirect_cycle = 0;
    std::uint64_t links_self_loop = 0;
    std::uint64_t links_kind_mismatch = 0;

    std::uint64_t anchors_read = 0;
    std::uint64_t anchors_malformed = 0;
    std::uint64_t anchors_unknown_title = 0;
    std::uint64_t anchors_redirect_cycle = 0;
    std::uint64_t anchors_empty_disambiguation = 0;
    std::uint64_t anchors_empty_mention = 0;
    std::uint64_t anchors_not_article = 0;

    // Anchor count mass before disambiguation expansion: in = kept + dropped.
    std::uint64_t anchor_count_in = 0;
    std::uint64_t anchor_count_kept = 0;
    std::uint64_t anchor_count_dropped = 0;

    std::uint64_t dict_pseudo_entries = 0;

    std::string to_json() const;
};

/// Title lookup and redirect resolution over a page record set.
class PageIndex {
public:
    enum class Resolution { Ok, Unknown, Cycle };

    struct Resolved {
        Resolution status = Resolution::Unknown;
        const PageRecord* page = nullptr;
    };

    static constexpr int kMaxRedirectDepth = 16;

    /// Throws DataError on duplicate titles.
    explicit PageIndex(std::vector<PageRecord> pages);

    const PageRecord* find(std::string_view title) const;

    /// Follows redirects to a non-redirect page. Chains longer than
    /// kMaxRedirectDepth are reported as cycles.
    Resolved resolve(std::string_view title) const;

    const std::vector<PageRecord>& pages() const { return pages_; }

    /// Articles and categories, ids assigned by ascending page_id.
    NodeTable node_table() const;

private:
    std::vector<PageRecord> pages_;
    std::unordered_map<std::string, std::size_t> by_title_;
};

/// Dictionary mention for a page title: underscores become spaces, then normalize_mention.
std::string title_mention(std::string_view title);

/// Rewrites both endpoints through redirect chains. Unknown titles, cycles and
/// self-loops are dropped and tallied.
std::vector<RawLinkRecord> resolve_redirects(const PageIndex& pages, std::span<const RawLinkRecord> links,
                                             IngestTally& tally);

/// Resolves anchor targets through redirects and replaces anchors on
/// disambiguation pages with one record per article the page links to (H),
/// each with the original count. `resolved_links` must come from resolve_redirects.
std::vector<AnchorRecord> expand_disambiguation_anchors(const PageIndex& pages, std::span<const AnchorRecord> anchors,
                                                        std::span<const RawLinkRecord> resolved_links,
                                                        IngestTally& tally);

/// Per-kind arc lists indexed by EdgeKind, deduplicated and sorted by (src, dst).
using EdgeLists = std::array<std::vector<Arc>, 3>;

EdgeLists emit_edge_lists(const PageIndex& pages, const NodeTable& nodes, std::span<const RawLinkRecord> resolved_links,
                          IngestTally& tally);

/// Aggregates anchors per (normalized mention, article) and adds title,
/// redirect and disambiguation-page mentions with `pseudo_count` when the pair
/// has no anchor evidence. Rows are sorted by mention then article id.
std::vector<CountRow> emit_anchor_counts(const PageIndex& pages, const NodeTable& nodes,
                                         std::span<const AnchorRecord> expanded_anchors,
                                         std::span<const RawLinkRecord> resolved_links, std::uint64_t pseudo_count,
                                         IngestTally& tally);

// TSV readers; malformed rows are skipped and tallied.
std::vector<PageRecord> read_pages(const std::filesystem::path& path, IngestTally& tally);
std::vector<RawLinkRecord> read_links(const std::filesystem::path& path, IngestTally& tally);
std::vector<AnchorRecord> read_anchors(const std::filesystem::path& path, IngestTally& tally);

void write_edge_file(const std::filesystem::path& path, std::span<const Arc> arcs);
void write_count_file(const std::filesystem::path& path, std::span<const CountRow> rows);

struct IngestOptions {
    std::filesystem::path pages;
    std::filesystem::path links;
    std::filesystem::path anchors;
    std::filesystem::path out_dir;
    std::uint64_t pseudo_count = 1;
};

/// Full pipeline: writes nodes.tsv, edges.{H,I,C}.tsv, dict_counts.tsv and ingest_report.json.
IngestTally run_ingest(const IngestOptions& options);

}  // namespace wikiwalk
