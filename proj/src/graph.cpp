#include "wikiwalk/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "wikiwalk/binio.hpp"

namespace wikiwalk {

namespace {

constexpr char kGraphMagic[] = {'G', 'W', 'K', 'B', '1'};

EdgeKind parse_edge_kind(char c) {
    switch (c) {
        case 'H': return EdgeKind::H;
        case 'I': return EdgeKind::I;
        case 'C': return EdgeKind::C;
        default: throw UsageError(std::string("unknown edge kind '") + c + "'");
    }
}

DirectionMode parse_mode(char c) {
    switch (c) {
        case 'd': return DirectionMode::Directed;
        case 'u': return DirectionMode::Undirected;
        case 'r': return DirectionMode::Reciprocal;
        default: throw UsageError(std::string("unknown direction mode '") + c + "'");
    }
}

// Sorts each row and removes duplicates in place, compacting the target array.
void normalize_rows(std::vector<std::uint64_t>& offsets, std::vector<NodeId>& targets) {
    std::uint64_t write = 0;
    const std::size_t n = offsets.size() - 1;
    std::uint64_t begin = offsets[0];
    for (std::size_t u = 0; u < n; ++u) {
        const std::uint64_t end = offsets[u + 1];
        auto first = targets.begin() + static_cast<std::ptrdiff_t>(begin);
        auto last = targets.begin() + static_cast<std::ptrdiff_t>(end);
        std::sort(first, last);
        last = std::unique(first, last);
        const auto row = static_cast<std::uint64_t>(last - first);
        std::copy(first, last, targets.begin() + static_cast<std::ptrdiff_t>(write));
        offsets[u] = write;
        write += row;
        begin = end;
    }
    offsets[n] = write;
    targets.resize(write);
    targets.shrink_to_fit();
}

GraphSpec single_part_spec(const GraphSpec& spec, DirectionMode mode) {
    std::vector<GraphPart> parts = spec.parts();
    for (auto& p : parts) p.mode = mode;
    return GraphSpec(std::move(parts));
}

std::vector<TypedGraph::PartCount> with_counts(const GraphSpec& spec, std::uint64_t arcs) {
    std::vector<TypedGraph::PartCount> counts;
    for (const auto& p : spec.parts()) counts.push_back({p, arcs});
    return counts;
}

}  // namespace

char edge_kind_letter(EdgeKind kind) {
    switch (kind) {
        case EdgeKind::H: return 'H';
        case EdgeKind::I: return 'I';
        case EdgeKind::C: return 'C';
    }
    return '?';
}

char direction_mode_letter(DirectionMode mode) {
    switch (mode) {
        case DirectionMode::Directed: return 'd';
        case DirectionMode::Undirected: return 'u';
        case DirectionMode::Reciprocal: return 'r';
    }
    return '?';
}

GraphSpec::GraphSpec(std::vector<GraphPart> parts) : parts_(std::move(parts)) {
    for (std::size_t i = 0; i < parts_.size(); ++i)
        for (std::size_t j = i + 1; j < parts_.size(); ++j)
            if (parts_[i] == parts_[j]) throw UsageError("duplicate graph part in spec " + str());
}

GraphSpec GraphSpec::parse(std::string_view text) {
    if (text.empty()) throw UsageError("empty graph spec");
    if (text.size() % 2 != 0) throw UsageError("malformed graph spec '" + std::string(text) + "'");
    std::vector<GraphPart> parts;
    for (std::size_t i = 0; i < text.size(); i += 2) parts.push_back({parse_edge_kind(text[i]), parse_mode(text[i + 1])});
    return GraphSpec(std::move(parts));
}

std::string GraphSpec::str() const {
    std::string s;
    for (const auto& p : parts_) {
        s += edge_kind_letter(p.kind);
        s += direction_mode_letter(p.mode);
    }
    return s;
}

bool GraphSpec::is_paper_configuration() const {
    return std::none_of(parts_.begin(), parts_.end(), [](const GraphPart& p) {
        return p.mode == DirectionMode::Reciprocal && p.kind != EdgeKind::H;
    });
}

GraphSpec GraphSpec::joined(const GraphSpec& other) const {
    std::vector<GraphPart> parts = parts_;
    for (const auto& p : other.parts_)
        if (std::find(parts.begin(), parts.end(), p) == parts.end()) parts.push_back(p);
    return GraphSpec(std::move(parts));
}

NodeId NodeTable::add(std::string title, NodeKind kind) {
    const auto id = static_cast<NodeId>(titles_.size());
    if (!index_.emplace(title, id).second) throw DataError("duplicate node title '" + title + "'");
    titles_.push_back(std::move(title));
    kinds_.push_back(kind);
    return id;
}

std::optional<NodeId> NodeTable::find(std::string_view title) const {
    const auto it = index_.find(std::string(title));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

NodeTable NodeTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    NodeTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1) continue;
        const auto row = chomp(line);
        if (row.empty()) continue;
        const auto f = split_tabs(row);
        if (f.size() != 3) throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 3 fields");
        std::size_t id = 0;
        const auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), id);
        if (ec != std::errc() || ptr != f[0].data() + f[0].size() || id != table.size())
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": node ids must be contiguous from 0");
        NodeKind kind;
        if (f[2] == "article") kind = NodeKind::Article;
        else if (f[2] == "category") kind = NodeKind::Category;
        else throw DataError(path.string() + ":" + std::to_string(lineno) + ": unknown node kind");
        table.add(std::string(f[1]), kind);
    }
    return table;
}

void NodeTable::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "id\ttitle\tkind\n";
    for (std::size_t i = 0; i < titles_.size(); ++i)
        out << i << '\t' << titles_[i] << '\t' << (kinds_[i] == NodeKind::Article ? "article" : "category") << '\n';
}

TypedGraph TypedGraph::from_arcs(std::vector<NodeKind> node_kinds, std::span<const Arc> arcs, GraphSpec spec) {
    const std::size_t n = node_kinds.size();
    std::vector<std::uint64_t> offsets(n + 1, 0);
    for (const auto& [a, b] : arcs) {
        if (a >= n || b >= n) throw DataError("arc references a node outside the universe");
        ++offsets[a + 1];
    }
    for (std::size_t u = 0; u < n; ++u) offsets[u + 1] += offsets[u];
    std::vector<NodeId> targets(arcs.size());
    std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const auto& [a, b] : arcs) targets[cursor[a]++] = b;
    return from_rows(std::move(node_kinds), std::move(offsets), std::move(targets), std::move(spec));
}

TypedGraph TypedGraph::from_rows(std::vector<NodeKind> node_kinds, std::vector<std::uint64_t> offsets,
                                 std::vector<NodeId> targets, GraphSpec spec, std::vector<PartCount> part_counts) {
    if (offsets.size() != node_kinds.size() + 1 || offsets.back() != targets.size())
        throw DataError("inconsistent adjacency arrays");
    normalize_rows(offsets, targets);
    TypedGraph g;
    g.node_kinds_ = std::move(node_kinds);
    g.offsets_ = std::move(offsets);
    g.targets_ = std::move(targets);
    g.spec_ = std::move(spec);
    g.part_counts_ = part_counts.empty() ? with_counts(g.spec_, g.targets_.size()) : std::move(part_counts);
    return g;
}

bool TypedGraph::has_arc(NodeId from, NodeId to) const {
    if (from >= node_count()) return false;
    const auto row = neighbors(from);
    return std::binary_search(row.begin(), row.end(), to);
}

std::vector<Arc> TypedGraph::arcs() const {
    std::vector<Arc> out;
    out.reserve(targets_.size());
    for (NodeId u = 0; u < node_count(); ++u)
        for (NodeId v : neighbors(u)) out.emplace_back(u, v);
    return out;
}

void TypedGraph::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    binio::put_bytes(out, kGraphMagic, sizeof(kGraphMagic));
    binio::put_u64(out, node_count());
    binio::put_u64(out, arc_count());
    for (auto o : offsets_) binio::put_u64(out, o);
    for (auto t : targets_) binio::put_u32(out, t);
    std::vector<std::uint8_t> bitmap((node_count() + 7) / 8, 0);
    for (std::size_t i = 0; i < node_count(); ++i)
        if (node_kinds_[i] == NodeKind::Category) bitmap[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    binio::put_bytes(out, bitmap.data(), bitmap.size());
    const auto spec = spec_.str();
    binio::put_u64(out, spec.size());
    binio::put_bytes(out, spec.data(), spec.size());
    // Trailer: per-part arc counts, in spec order.
    for (const auto& pc : part_counts_) binio::put_u64(out, pc.arcs);
    if (!out) throw DataError("failed writing " + path.string());
}

TypedGraph TypedGraph::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open graph snapshot " + path.string());
    const auto magic = binio::get_bytes(in, sizeof(kGraphMagic));
    if (magic != std::string_view(kGraphMagic, sizeof(kGraphMagic))) throw DataError(path.string() + ": not a GWKB1 snapshot");
    TypedGraph g;
    const auto n = binio::get_u64(in);
    const auto m = binio::get_u64(in);
    g.offsets_.resize(n + 1);
    for (auto& o : g.offsets_) o = binio::get_u64(in);
    g.targets_.resize(m);
    for (auto& t : g.targets_) t = binio::get_u32(in);
    const auto bitmap = binio::get_bytes(in, (n + 7) / 8);
    g.node_kinds_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        g.node_kinds_[i] = (static_cast<unsigned char>(bitmap[i / 8]) >> (i % 8)) & 1u ? NodeKind::Category : NodeKind::Article;
    const auto spec_len = binio::get_u64(in);
    g.spec_ = GraphSpec::parse(binio::get_bytes(in, spec_len));
    for (const auto& p : g.spec_.parts()) g.part_counts_.push_back({p, binio::get_u64(in)});
    if (g.offsets_.front() != 0 || g.offsets_.back() != m) throw DataError(path.string() + ": corrupt offsets");
    for (std::size_t u = 0; u < n; ++u)
        if (g.offsets_[u] > g.offsets_[u + 1]) throw DataError(path.string() + ": corrupt offsets");
    for (auto t : g.targets_)
        if (t >= n) throw DataError(path.string() + ": neighbor id out of range");
    return g;
}

TypedGraph transpose(const TypedGraph& g) {
    const std::size_t n = g.node_count();
    std::vector<std::uint64_t> offsets(n + 1, 0);
    for (NodeId t : g.targets()) ++offsets[t + 1];
    for (std::size_t u = 0; u < n; ++u) offsets[u + 1] += offsets[u];
    std::vector<NodeId> targets(g.arc_count());
    std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
    // Sources are visited in ascending order, so every reversed row comes out sorted.
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v : g.neighbors(u)) targets[cursor[v]++] = u;
    return TypedGraph::from_rows(g.node_kinds(), std::move(offsets), std::move(targets), g.spec(), g.part_counts());
}

TypedGraph to_undirected(const TypedGraph& g) {
    const std::size_t n = g.node_count();
    std::vector<std::uint64_t> offsets(n + 1, 0);
    for (NodeId u = 0; u < n; ++u) {
        offsets[u + 1] += g.out_degree(u);
        for (NodeId v : g.neighbors(u)) ++offsets[v + 1];
    }
    for (std::size_t u = 0; u < n; ++u) offsets[u + 1] += offsets[u];
    std::vector<NodeId> targets(offsets.back());
    std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v : g.neighbors(u)) {
            targets[cursor[u]++] = v;
            targets[cursor[v]++] = u;
        }
    }
    auto spec = single_part_spec(g.spec(), DirectionMode::Undirected);
    auto out = TypedGraph::from_rows(g.node_kinds(), std::move(offsets), std::move(targets), spec);
    if (g.spec().parts().size() == 1) return out;
    return TypedGraph::from_rows(out.node_kinds(), {out.offsets().begin(), out.offsets().end()},
                                 {out.targets().begin(), out.targets().end()}, g.spec(), g.part_counts());
}

TypedGraph filter_reciprocal(const TypedGraph& g) {
    const std::size_t n = g.node_count();
    std::vector<std::uint64_t> offsets(n + 1, 0);
    std::vector<NodeId> targets;
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v : g.neighbors(u))
            if (g.has_arc(v, u)) targets.push_back(v);
        offsets[u + 1] = targets.size();
    }
    auto spec = single_part_spec(g.spec(), DirectionMode::Reciprocal);
    auto out = TypedGraph::from_rows(g.node_kinds(), std::move(offsets), std::move(targets), spec);
    if (g.spec().parts().size() == 1) return out;
    return TypedGraph::from_rows(out.node_kinds(), {out.offsets().begin(), out.offsets().end()},
                                 {out.targets().begin(), out.targets().end()}, g.spec(), g.part_counts());
}

TypedGraph apply_mode(const TypedGraph& directed, DirectionMode mode) {
    switch (mode) {
        case DirectionMode::Directed: return directed;
        case DirectionMode::Undirected: return to_undirected(directed);
        case DirectionMode::Reciprocal: return filter_reciprocal(directed);
    }
    return directed;
}

TypedGraph merge(std::span<const TypedGraph> graphs) {
    if (graphs.empty()) throw UsageError("merge needs at least one graph");
    const auto& kinds = graphs.front().node_kinds();
    const std::size_t n = kinds.size();
    GraphSpec spec;
    std::vector<TypedGraph::PartCount> counts;
    for (const auto& g : graphs) {
        if (g.node_kinds() != kinds) throw DataError("merge: graphs do not share a node universe");
        for (const auto& pc : g.part_counts()) {
            const bool seen = std::any_of(counts.begin(), counts.end(), [&](const auto& c) { return c.part == pc.part; });
            if (!seen) counts.push_back(pc);
        }
        spec = spec.joined(g.spec());
    }
    std::vector<std::uint64_t> offsets(n + 1, 0);
    for (const auto& g : graphs)
        for (NodeId u = 0; u < n; ++u) offsets[u + 1] += g.out_degree(u);
    for (std::size_t u = 0; u < n; ++u) offsets[u + 1] += offsets[u];
    std::vector<NodeId> targets(offsets.back());
    std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const auto& g : graphs)
        for (NodeId u = 0; u < n; ++u)
            for (NodeId v : g.neighbors(u)) targets[cursor[u]++] = v;
    return TypedGraph::from_rows(kinds, std::move(offsets), std::move(targets), std::move(spec), std::move(counts));
}

GraphStats stats(const TypedGraph& g) {
    GraphStats s;
    s.nodes = g.node_count();
    s.arcs = g.arc_count();
    s.per_part = g.part_counts();
    std::vector<bool> touched(g.node_count(), false);
    for (NodeId u = 0; u < g.node_count(); ++u) {
        if (g.out_degree(u) > 0) touched[u] = true;
        for (NodeId v : g.neighbors(u)) touched[v] = true;
    }
    s.non_isolated = static_cast<std::uint64_t>(std::count(touched.begin(), touched.end(), true));
    return s;
}

std::vector<Arc> load_edge_file(const std::filesystem::path& path, std::size_t node_count) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<Arc> arcs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1) continue;
        const auto row = chomp(line);
        if (row.empty()) continue;
        const auto f = split_tabs(row);
        const auto where = path.string() + ":" + std::to_string(lineno);
        if (f.size() != 2) throw DataError(where + ": expected src_id<TAB>dst_id");
        std::uint64_t a = 0, b = 0;
        try {
            a = std::stoull(std::string(f[0]));
            b = std::stoull(std::string(f[1]));
        } catch (const std::exception&) {
            throw DataError(where + ": non-numeric node id");
        }
        if (a >= node_count || b >= node_count) throw DataError(where + ": edge references unknown node id");
        arcs.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
    }
    return arcs;
}

TypedGraph load_kind_graph(const NodeTable& nodes, const std::filesystem::path& edge_file, EdgeKind kind) {
    const auto arcs = load_edge_file(edge_file, nodes.size());
    return TypedGraph::from_arcs(nodes.kinds(), arcs, GraphSpec({{kind, DirectionMode::Directed}}));
}

TypedGraph build_graph(const GraphSpec& spec, const NodeTable& nodes, const std::filesystem::path& dir) {
    std::vector<TypedGraph> parts;
    for (const auto& part : spec.parts()) {
        const auto file = dir / (std::string("edges.") + edge_kind_letter(part.kind) + ".tsv");
        parts.push_back(apply_mode(load_kind_graph(nodes, file, part.kind), part.mode));
    }
    if (parts.size() == 1) return std::move(parts.front());
    return merge(parts);
}

}  // namespace wikiwalk
