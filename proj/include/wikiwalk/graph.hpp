#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wikiwalk/common.hpp"

namespace wikiwalk {

// Hyperlinks (H), infobox links (I) and category links (C).
enum class EdgeKind : std::uint8_t { H, I, C };
enum class DirectionMode : std::uint8_t { Directed, Undirected, Reciprocal };
enum class NodeKind : std::uint8_t { Article, Category };

char edge_kind_letter(EdgeKind kind);
char direction_mode_letter(DirectionMode mode);

struct GraphPart {
    EdgeKind kind = EdgeKind::H;
    DirectionMode mode = DirectionMode::Directed;

    friend bool operator==(const GraphPart&, const GraphPart&) = default;
};

/// Ordered list of (edge kind, direction mode) parts, written as e.g. "Hr" or "HrCuIu".
class GraphSpec {
public:
    GraphSpec() = default;
    explicit GraphSpec(std::vector<GraphPart> parts);

    /// Throws UsageError on unknown letters, empty specs or repeated parts.
    static GraphSpec parse(std::string_view text);

    const std::vector<GraphPart>& parts() const { return parts_; }
    bool empty() const { return parts_.empty(); }
    std::string str() const;

    /// Reciprocal mode is only evaluated for hyperlinks; Ir and Cr are accepted but flagged.
    bool is_paper_configuration() const;

    /// Concatenation, dropping parts already present.
    GraphSpec joined(const GraphSpec& other) const;

    friend bool operator==(const GraphSpec&, const GraphSpec&) = default;

private:
    std::vector<GraphPart> parts_;
};

/// Article and category nodes with dense ids 0..N-1, as listed in nodes.tsv.
class NodeTable {
public:
    NodeId add(std::string title, NodeKind kind);

    std::size_t size() const { return titles_.size(); }
    const std::string& title(NodeId id) const { return titles_.at(id); }
    NodeKind kind(NodeId id) const { return kinds_.at(id); }
    const std::vector<NodeKind>& kinds() const { return kinds_; }
    std::optional<NodeId> find(std::string_view title) const;

    static NodeTable load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

private:
    std::vector<std::string> titles_;
    std::vector<NodeKind> kinds_;
    std::unordered_map<std::string, NodeId> index_;
};

using Arc = std::pair<NodeId, NodeId>;

/// Immutable adjacency in offsets + sorted neighbor form.
///
/// Undirected and reciprocal parts are stored as arc pairs, so every graph is a
/// set of directed arcs. Neighbor lists are sorted and duplicate free, which
/// fixes the iteration order used for tie-breaking downstream.
class TypedGraph {
public:
    struct PartCount {
        GraphPart part;
        std::uint64_t arcs = 0;
    };

    TypedGraph() = default;

    /// Builds from an arbitrary arc list; duplicates are collapsed. Throws
    /// DataError for arcs outside the node universe.
    static TypedGraph from_arcs(std::vector<NodeKind> node_kinds, std::span<const Arc> arcs, GraphSpec spec);

    /// Builds from per-source neighbor lists that may be unsorted or contain
    /// duplicates. Empty `part_counts` means one entry per part, each equal to
    /// the final arc count.
    static TypedGraph from_rows(std::vector<NodeKind> node_kinds, std::vector<std::uint64_t> offsets,
                                std::vector<NodeId> targets, GraphSpec spec,
                                std::vector<PartCount> part_counts = {});

    std::size_t node_count() const { return node_kinds_.size(); }
    std::uint64_t arc_count() const { return targets_.size(); }

    std::span<const NodeId> neighbors(NodeId u) const {
        return {targets_.data() + offsets_[u], targets_.data() + offsets_[u + 1]};
    }
    std::size_t out_degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }
    bool has_arc(NodeId from, NodeId to) const;

    std::span<const std::uint64_t> offsets() const { return offsets_; }
    std::span<const NodeId> targets() const { return targets_; }
    const std::vector<NodeKind>& node_kinds() const { return node_kinds_; }
    const GraphSpec& spec() const { return spec_; }

    /// Arcs contributed by each part before the union; a single-part graph has one entry.
    const std::vector<PartCount>& part_counts() const { return part_counts_; }

    std::vector<Arc> arcs() const;

    void save(const std::filesystem::path& path) const;
    static TypedGraph load(const std::filesystem::path& path);

private:
    std::vector<NodeKind> node_kinds_;
    std::vector<std::uint64_t> offsets_{0};
    std::vector<NodeId> targets_;
    GraphSpec spec_;
    std::vector<PartCount> part_counts_;
};

/// Adds the reverse of every arc. Arc count becomes twice the number of connected unordered pairs.
TypedGraph to_undirected(const TypedGraph& g);

/// Keeps a->b only when b->a is also present.
TypedGraph filter_reciprocal(const TypedGraph& g);

/// Arc union over a shared node universe. Throws DataError when universes differ.
TypedGraph merge(std::span<const TypedGraph> graphs);

/// Reverses every arc; in-neighbors of v become neighbors(v). Provenance is kept.
TypedGraph transpose(const TypedGraph& g);

TypedGraph apply_mode(const TypedGraph& directed, DirectionMode mode);

struct GraphStats {
    std::uint64_t nodes = 0;
    std::uint64_t non_isolated = 0;
    std::uint64_t arcs = 0;
    std::vector<TypedGraph::PartCount> per_part;
};

GraphStats stats(const TypedGraph& g);

// TSV loaders for the ingest outputs.

/// Reads `src_id \t dst_id` lines after a one-line header. Throws DataError with
/// the line number for ids outside [0, node_count).
std::vector<Arc> load_edge_file(const std::filesystem::path& path, std::size_t node_count);

/// Directed graph for one edge kind.
TypedGraph load_kind_graph(const NodeTable& nodes, const std::filesystem::path& edge_file, EdgeKind kind);

/// Assembles a graph for `spec` from edges.{H,I,C}.tsv in `dir`.
TypedGraph build_graph(const GraphSpec& spec, const NodeTable& nodes, const std::filesystem::path& dir);

}  // namespace wikiwalk
