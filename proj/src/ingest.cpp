#include "wikiwalk/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

namespace wikiwalk {

namespace {

bool has_control_chars(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) {
        const auto u = static_cast<unsigned char>(c);
        return u < 0x20 || u == 0x7f;
    });
}

std::optional<PageKind> parse_page_kind(std::string_view s) {
    if (s == "article") return PageKind::Article;
    if (s == "category") return PageKind::Category;
    if (s == "redirect") return PageKind::Redirect;
    if (s == "disambiguation") return PageKind::Disambiguation;
    return std::nullopt;
}

std::optional<EdgeKind> parse_link_kind(std::string_view s) {
    if (s == "H") return EdgeKind::H;
    if (s == "I") return EdgeKind::I;
    if (s == "C") return EdgeKind::C;
    return std::nullopt;
}

template <typename Fn>
void for_each_row(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        const auto row = chomp(line);
        if (row.empty()) continue;
        fn(row);
    }
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) return std::nullopt;
    try {
        return std::stoull(std::string(s));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// Article targets of each disambiguation page, taken from its outgoing H links.
std::map<std::string, std::set<std::string>> disambiguation_targets(const PageIndex& pages,
                                                                     std::span<const RawLinkRecord> resolved_links) {
    std::map<std::string, std::set<std::string>> out;
    for (const auto& link : resolved_links) {
        if (link.kind != EdgeKind::H) continue;
        const auto* src = pages.find(link.src_title);
        const auto* dst = pages.find(link.dst_title);
        if (src && dst && src->kind == PageKind::Disambiguation && dst->kind == PageKind::Article)
            out[link.src_title].insert(link.dst_title);
    }
    return out;
}

}  // namespace

std::string IngestTally::to_json() const {
    nlohmann::ordered_json j;
    j["pages_read"] = pages_read;
    j["pages_other_namespace"] = pages_other_namespace;
    j["pages_malformed"] = pages_malformed;
    j["links_read"] = links_read;
    j["links_malformed"] = links_malformed;
    j["links_unknown_title"] = links_unknown_title;
    j["links_redirect_cycle"] = links_redirect_cycle;
    j["links_self_loop"] = links_self_loop;
    j["links_kind_mismatch"] = links_kind_mismatch;
    j["anchors_read"] = anchors_read;
    j["anchors_malformed"] = anchors_malformed;
    j["anchors_unknown_title"] = anchors_unknown_title;
    j["anchors_redirect_cycle"] = anchors_redirect_cycle;
    j["anchors_empty_disambiguation"] = anchors_empty_disambiguation;
    j["anchors_empty_mention"] = anchors_empty_mention;
    j["anchors_not_article"] = anchors_not_article;
    j["anchor_count_in"] = anchor_count_in;
    j["anchor_count_kept"] = anchor_count_kept;
    j["anchor_count_dropped"] = anchor_count_dropped;
    j["dict_pseudo_entries"] = dict_pseudo_entries;
    return j.dump(2);
}

PageIndex::PageIndex(std::vector<PageRecord> pages) : pages_(std::move(pages)) {
    for (std::size_t i = 0; i < pages_.size(); ++i)
        if (!by_title_.emplace(pages_[i].title, i).second) throw DataError("duplicate page title '" + pages_[i].title + "'");
}

const PageRecord* PageIndex::find(std::string_view title) const {
    const auto it = by_title_.find(std::string(title));
    return it == by_title_.end() ? nullptr : &pages_[it->second];
}

PageIndex::Resolved PageIndex::resolve(std::string_view title) const {
    const PageRecord* page = find(title);
    for (int hop = 0; page; ++hop) {
        if (page->kind != PageKind::Redirect) return {Resolution::Ok, page};
        if (hop == kMaxRedirectDepth) return {Resolution::Cycle, nullptr};
        page = find(*page->redirect_target);
    }
    return {Resolution::Unknown, nullptr};
}

NodeTable PageIndex::node_table() const {
    std::vector<const PageRecord*> kept;
    for (const auto& p : pages_)
        if (p.kind == PageKind::Article || p.kind == PageKind::Category) kept.push_back(&p);
    std::sort(kept.begin(), kept.end(), [](const auto* a, const auto* b) {
        return a->page_id != b->page_id ? a->page_id < b->page_id : a->title < b->title;
    });
    NodeTable table;
    for (const auto* p : kept) table.add(p->title, p->kind == PageKind::Article ? NodeKind::Article : NodeKind::Category);
    return table;
}

std::string title_mention(std::string_view title) {
    std::string s(title);
    std::replace(s.begin(), s.end(), '_', ' ');
    return normalize_mention(s);
}

std::vector<RawLinkRecord> resolve_redirects(const PageIndex& pages, std::span<const RawLinkRecord> links,
                                             IngestTally& tally) {
    std::vector<RawLinkRecord> out;
    out.reserve(links.size());
    for (const auto& link : links) {
        const auto src = pages.resolve(link.src_title);
        const auto dst = pages.resolve(link.dst_title);
        if (src.status == PageIndex::Resolution::Cycle || dst.status == PageIndex::Resolution::Cycle) {
            ++tally.links_redirect_cycle;
            continue;
        }
        if (src.status == PageIndex::Resolution::Unknown || dst.status == PageIndex::Resolution::Unknown) {
            ++tally.links_unknown_title;
            continue;
        }
        if (src.page == dst.page) {
            ++tally.links_self_loop;
            continue;
        }
        out.push_back({src.page->title, dst.page->title, link.kind});
    }
    return out;
}

std::vector<AnchorRecord> expand_disambiguation_anchors(const PageIndex& pages, std::span<const AnchorRecord> anchors,
                                                        std::span<const RawLinkRecord> resolved_links,
                                                        IngestTally& tally) {
    const auto targets = disambiguation_targets(pages, resolved_links);
    std::vector<AnchorRecord> out;
    for (const auto& a : anchors) {
        tally.anchor_count_in += a.count;
        const auto drop = [&](std::uint64_t& counter) {
            ++counter;
            tally.anchor_count_dropped += a.count;
        };
        if (normalize_mention(a.anchor_text).empty()) {
            drop(tally.anchors_empty_mention);
            continue;
        }
        const auto dst = pages.resolve(a.dst_title);
        if (dst.status == PageIndex::Resolution::Cycle) {
            drop(tally.anchors_redirect_cycle);
            continue;
        }
        if (dst.status == PageIndex::Resolution::Unknown) {
            drop(tally.anchors_unknown_title);
            continue;
        }
        if (dst.page->kind == PageKind::Disambiguation) {
            const auto it = targets.find(dst.page->title);
            if (it == targets.end() || it->second.empty()) {
                drop(tally.anchors_empty_disambiguation);
                continue;
            }
            for (const auto& t : it->second) out.push_back({a.anchor_text, t, a.count});
            tally.anchor_count_kept += a.count;
            continue;
        }
        if (dst.page->kind != PageKind::Article) {
            drop(tally.anchors_not_article);
            continue;
        }
        out.push_back({a.anchor_text, dst.page->title, a.count});
        tally.anchor_count_kept += a.count;
    }
    return out;
}

EdgeLists emit_edge_lists([[maybe_unused]] const PageIndex& pages, const NodeTable& nodes,
                          std::span<const RawLinkRecord> resolved_links, IngestTally& tally) {
    EdgeLists lists;
    for (const auto& link : resolved_links) {
        const auto src = nodes.find(link.src_title);
        const auto dst = nodes.find(link.dst_title);
        bool ok = src && dst;
        if (ok) {
            const auto sk = nodes.kind(*src), dk = nodes.kind(*dst);
            if (link.kind == EdgeKind::C) ok = dk == NodeKind::Category;
            else ok = sk == NodeKind::Article && dk == NodeKind::Article;
        }
        if (!ok) {
            // Endpoints on disambiguation pages or with the wrong node kind.
            ++tally.links_kind_mismatch;
            continue;
        }
        lists[static_cast<std::size_t>(link.kind)].emplace_back(*src, *dst);
    }
    for (auto& arcs : lists) {
        std::sort(arcs.begin(), arcs.end());
        arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
    }
    return lists;
}

std::vector<CountRow> emit_anchor_counts(const PageIndex& pages, const NodeTable& nodes,
                                         std::span<const AnchorRecord> expanded_anchors,
                                         std::span<const RawLinkRecord> resolved_links, std::uint64_t pseudo_count,
                                         IngestTally& tally) {
    std::map<std::pair<std::string, NodeId>, std::uint64_t> counts;
    for (const auto& a : expanded_anchors) {
        auto mention = normalize_mention(a.anchor_text);
        if (mention.empty()) {
            ++tally.anchors_empty_mention;
            continue;
        }
        const auto dst = pages.resolve(a.dst_title);
        const auto id = dst.status == PageIndex::Resolution::Ok ? nodes.find(dst.page->title) : std::nullopt;
        if (!id || nodes.kind(*id) != NodeKind::Article) {
            ++tally.anchors_not_article;
            continue;
        }
        counts[{std::move(mention), *id}] += a.count;
    }

    std::set<std::pair<std::string, NodeId>> pseudo;
    const auto add_pseudo = [&](std::string_view title, const std::string& article) {
        auto mention = title_mention(title);
        if (mention.empty()) return;
        const auto id = nodes.find(article);
        if (!id || nodes.kind(*id) != NodeKind::Article) return;
        std::pair<std::string, NodeId> key{std::move(mention), *id};
        if (!counts.contains(key)) pseudo.insert(std::move(key));
    };
    const auto targets = disambiguation_targets(pages, resolved_links);
    for (const auto& p : pages.pages()) {
        switch (p.kind) {
            case PageKind::Article: add_pseudo(p.title, p.title); break;
            case PageKind::Redirect: {
                const auto r = pages.resolve(p.title);
                if (r.status == PageIndex::Resolution::Ok) add_pseudo(p.title, r.page->title);
                break;
            }
            case PageKind::Disambiguation: {
                const auto it = targets.find(p.title);
                if (it != targets.end())
                    for (const auto& t : it->second) add_pseudo(p.title, t);
                break;
            }
            case PageKind::Category: break;
        }
    }
    if (pseudo_count > 0)
        for (auto& key : pseudo) counts[key] += pseudo_count;
    tally.dict_pseudo_entries += pseudo_count > 0 ? pseudo.size() : 0;

    std::vector<CountRow> rows;
    rows.reserve(counts.size());
    for (auto& [key, c] : counts) rows.push_back({key.first, key.second, c});
    return rows;
}

std::vector<PageRecord> read_pages(const std::filesystem::path& path, IngestTally& tally) {
    std::vector<PageRecord> pages;
    for_each_row(path, [&](std::string_view row) {
        ++tally.pages_read;
        const auto f = split_tabs(row);
        if (f.size() < 3 || f.size() > 4 || std::any_of(f.begin(), f.end(), has_control_chars)) {
            ++tally.pages_malformed;
            return;
        }
        const auto id = parse_u64(f[0]);
        const auto kind = parse_page_kind(f[2]);
        if (!kind) {
            ++tally.pages_other_namespace;
            return;
        }
        const bool has_target = f.size() == 4 && !f[3].empty();
        if (!id || f[1].empty() || has_target != (*kind == PageKind::Redirect)) {
            ++tally.pages_malformed;
            return;
        }
        PageRecord p{*id, std::string(f[1]), *kind, std::nullopt};
        if (has_target) p.redirect_target = std::string(f[3]);
        pages.push_back(std::move(p));
    });
    return pages;
}

std::vector<RawLinkRecord> read_links(const std::filesystem::path& path, IngestTally& tally) {
    std::vector<RawLinkRecord> links;
    for_each_row(path, [&](std::string_view row) {
        ++tally.links_read;
        const auto f = split_tabs(row);
        const auto kind = f.size() == 3 ? parse_link_kind(f[2]) : std::nullopt;
        if (!kind || f[0].empty() || f[1].empty() || has_control_chars(f[0]) || has_control_chars(f[1])) {
            ++tally.links_malformed;
            return;
        }
        links.push_back({std::string(f[0]), std::string(f[1]), *kind});
    });
    return links;
}

std::vector<AnchorRecord> read_anchors(const std::filesystem::path& path, IngestTally& tally) {
    std::vector<AnchorRecord> anchors;
    for_each_row(path, [&](std::string_view row) {
        ++tally.anchors_read;
        const auto f = split_tabs(row);
        const auto count = f.size() == 3 ? parse_u64(f[2]) : std::nullopt;
        if (!count || *count == 0 || f[1].empty() || has_control_chars(f[0]) || has_control_chars(f[1])) {
            ++tally.anchors_malformed;
            return;
        }
        anchors.push_back({std::string(f[0]), std::string(f[1]), *count});
    });
    return anchors;
}

void write_edge_file(const std::filesystem::path& path, std::span<const Arc> arcs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "src_id\tdst_id\n";
    for (const auto& [a, b] : arcs) out << a << '\t' << b << '\n';
}

void write_count_file(const std::filesystem::path& path, std::span<const CountRow> rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "mention\tarticle_id\tcount\n";
    for (const auto& r : rows) out << r.mention << '\t' << r.article << '\t' << r.count << '\n';
}

IngestTally run_ingest(const IngestOptions& options) {
    IngestTally tally;
    PageIndex pages(read_pages(options.pages, tally));
    const auto links = read_links(options.links, tally);
    const auto anchors = read_anchors(options.anchors, tally);

    const auto nodes = pages.node_table();
    const auto resolved = resolve_redirects(pages, links, tally);
    const auto expanded = expand_disambiguation_anchors(pages, anchors, resolved, tally);
    const auto edges = emit_edge_lists(pages, nodes, resolved, tally);
    const auto counts = emit_anchor_counts(pages, nodes, expanded, resolved, options.pseudo_count, tally);

    std::filesystem::create_directories(options.out_dir);
    nodes.save(options.out_dir / "nodes.tsv");
    for (EdgeKind kind : {EdgeKind::H, EdgeKind::I, EdgeKind::C})
        write_edge_file(options.out_dir / (std::string("edges.") + edge_kind_letter(kind) + ".tsv"),
                        edges[static_cast<std::size_t>(kind)]);
    write_count_file(options.out_dir / "dict_counts.tsv", counts);
    std::ofstream report(options.out_dir / "ingest_report.json", std::ios::binary);
    report << tally.to_json() << '\n';
    return tally;
}

}  // namespace wikiwalk
