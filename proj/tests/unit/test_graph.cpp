#include <doctest.h>

#include "support/fixtures.hpp"

using namespace wikiwalk;
using fixtures::arc_set;
using fixtures::graph_of;

TEST_SUITE("graph") {

TEST_CASE("graph specs parse into ordered parts") {
    const auto spec = GraphSpec::parse("HrCuIu");
    REQUIRE(spec.parts().size() == 3);
    CHECK(spec.parts()[0] == GraphPart{EdgeKind::H, DirectionMode::Reciprocal});
    CHECK(spec.parts()[1] == GraphPart{EdgeKind::C, DirectionMode::Undirected});
    CHECK(spec.parts()[2] == GraphPart{EdgeKind::I, DirectionMode::Undirected});
    CHECK(spec.str() == "HrCuIu");
    CHECK(spec.is_paper_configuration());
    CHECK_FALSE(GraphSpec::parse("HrIr").is_paper_configuration());
    CHECK(GraphSpec::parse("Hr").joined(GraphSpec::parse("HrCu")).str() == "HrCu");
}

TEST_CASE("malformed graph specs are usage errors") {
    CHECK_THROWS_AS(GraphSpec::parse("Q"), UsageError);
    CHECK_THROWS_AS(GraphSpec::parse(""), UsageError);
    CHECK_THROWS_AS(GraphSpec::parse("H"), UsageError);
    CHECK_THROWS_AS(GraphSpec::parse("Hx"), UsageError);
    CHECK_THROWS_AS(GraphSpec::parse("HrHr"), UsageError);
}

TEST_CASE("from_arcs sorts and collapses duplicates") {
    const auto g = graph_of(4, {{2, 1}, {0, 3}, {0, 1}, {0, 3}, {2, 0}});
    CHECK(g.arc_count() == 4);
    const auto n0 = g.neighbors(0);
    CHECK(std::vector<NodeId>(n0.begin(), n0.end()) == std::vector<NodeId>{1, 3});
    const auto n2 = g.neighbors(2);
    CHECK(std::vector<NodeId>(n2.begin(), n2.end()) == std::vector<NodeId>{0, 1});
    CHECK(g.out_degree(1) == 0);
    CHECK(g.has_arc(0, 3));
    CHECK_FALSE(g.has_arc(3, 0));
    CHECK_THROWS_AS(graph_of(2, {{0, 2}}), DataError);
}

TEST_CASE("transforms match set-based definitions on random graphs") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 30; ++t) {
        const std::size_t n = 2 + rng() % 20;
        const auto arcs = fixtures::random_arcs(rng, n, 0.2, 0.2);
        const auto hd = graph_of(n, arcs);
        const std::set<Arc> base(arcs.begin(), arcs.end());

        std::set<Arc> und, rec, rev;
        for (const auto& [a, b] : base) {
            und.insert({a, b});
            und.insert({b, a});
            if (base.contains({b, a})) rec.insert({a, b});
            rev.insert({b, a});
        }
        const auto hu = to_undirected(hd);
        const auto hr = filter_reciprocal(hd);
        CHECK(arc_set(hu) == und);
        CHECK(arc_set(hr) == rec);
        CHECK(arc_set(transpose(hd)) == rev);
        CHECK(arc_set(transpose(transpose(hd))) == base);

        // Hr is symmetric and sits inside Hd, which sits inside Hu.
        for (const auto& [a, b] : arc_set(hr)) CHECK(hr.has_arc(b, a));
        for (const auto& [a, b] : arc_set(hu)) CHECK(hu.has_arc(b, a));
        for (const auto& arc : rec) CHECK(base.contains(arc));
        for (const auto& arc : base) CHECK(und.contains(arc));
        CHECK(hu.arc_count() % 2 == 0);
    }
}

TEST_CASE("apply_mode dispatches to the transforms") {
    const auto hd = graph_of(3, {{0, 1}, {1, 0}, {1, 2}});
    CHECK(arc_set(apply_mode(hd, DirectionMode::Directed)) == arc_set(hd));
    CHECK(arc_set(apply_mode(hd, DirectionMode::Reciprocal)) == std::set<Arc>{{0, 1}, {1, 0}});
    CHECK(apply_mode(hd, DirectionMode::Undirected).arc_count() == 4);
}

TEST_CASE("merge is the arc union and rejects mismatched universes") {
    const auto a = graph_of(4, {{0, 1}, {1, 2}}, "Hd");
    const auto b = graph_of(4, {{1, 2}, {3, 0}}, "Cd");
    const std::vector<TypedGraph> parts{a, b};
    const auto m = merge(parts);
    CHECK(arc_set(m) == std::set<Arc>{{0, 1}, {1, 2}, {3, 0}});
    CHECK(m.spec().str() == "HdCd");
    REQUIRE(m.part_counts().size() == 2);
    CHECK(m.part_counts()[0].arcs == 2);
    CHECK(m.part_counts()[1].arcs == 2);

    const std::vector<TypedGraph> bad{a, graph_of(5, {}, "Cd")};
    CHECK_THROWS_AS(merge(bad), DataError);
}

TEST_CASE("stats count non-isolated nodes") {
    const auto g = graph_of(5, {{0, 1}, {1, 0}, {2, 1}});
    const auto s = stats(g);
    CHECK(s.nodes == 5);
    CHECK(s.arcs == 3);
    CHECK(s.non_isolated == 3);
}

TEST_CASE("binary snapshots round-trip byte for byte") {
    fixtures::TempDir dir;
    std::mt19937_64 rng(3);
    std::vector<NodeKind> kinds(30, NodeKind::Article);
    kinds[4] = kinds[17] = NodeKind::Category;
    const auto arcs = fixtures::random_arcs(rng, 30, 0.1, 0.1);
    const auto a = TypedGraph::from_arcs(kinds, arcs, GraphSpec::parse("HdCd"));
    const std::vector<TypedGraph> parts{filter_reciprocal(a), to_undirected(graph_of(30, {{1, 2}}, "Cu"))};
    const auto g = TypedGraph::from_rows(kinds, {parts[0].offsets().begin(), parts[0].offsets().end()},
                                         {parts[0].targets().begin(), parts[0].targets().end()},
                                         GraphSpec::parse("HrCu"), {{{EdgeKind::H, DirectionMode::Reciprocal}, 9},
                                                                    {{EdgeKind::C, DirectionMode::Undirected}, 2}});
    g.save(dir / "g.gwkb");
    const auto back = TypedGraph::load(dir / "g.gwkb");
    CHECK(back.spec() == g.spec());
    CHECK(back.node_kinds() == kinds);
    CHECK(arc_set(back) == arc_set(g));
    REQUIRE(back.part_counts().size() == 2);
    CHECK(back.part_counts()[0].arcs == 9);
    CHECK(back.part_counts()[1].arcs == 2);
    back.save(dir / "h.gwkb");
    CHECK(fixtures::read_file(dir / "g.gwkb") == fixtures::read_file(dir / "h.gwkb"));

    auto bytes = fixtures::read_file(dir / "g.gwkb");
    fixtures::write_file(dir / "trunc.gwkb", bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(TypedGraph::load(dir / "trunc.gwkb"), DataError);
    bytes[0] = 'X';
    fixtures::write_file(dir / "magic.gwkb", bytes);
    CHECK_THROWS_AS(TypedGraph::load(dir / "magic.gwkb"), DataError);
    CHECK_THROWS_AS(TypedGraph::load(dir / "missing.gwkb"), DataError);
}

TEST_CASE("node tables and edge files") {
    fixtures::TempDir dir;
    NodeTable nodes;
    nodes.add("Cape_Town", NodeKind::Article);
    nodes.add("Cricket", NodeKind::Category);
    nodes.save(dir / "nodes.tsv");
    const auto back = NodeTable::load(dir / "nodes.tsv");
    CHECK(back.size() == 2);
    CHECK(back.find("Cricket") == NodeId{1});
    CHECK(back.kind(1) == NodeKind::Category);
    CHECK_FALSE(back.find("Durban"));

    fixtures::write_file(dir / "gap.tsv", "id\ttitle\tkind\n0\tA\tarticle\n2\tB\tarticle\n");
    CHECK_THROWS_AS(NodeTable::load(dir / "gap.tsv"), DataError);

    fixtures::write_file(dir / "edges.tsv", "src_id\tdst_id\n0\t1\n1\t5\n");
    try {
        load_edge_file(dir / "edges.tsv", 2);
        FAIL("expected a data error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("edges.tsv:3") != std::string::npos);
    }
}

TEST_CASE("build_graph assembles typed parts") {
    fixtures::TempDir dir;
    NodeTable nodes;
    for (const char* t : {"A", "B", "C"}) nodes.add(t, NodeKind::Article);
    nodes.add("K", NodeKind::Category);
    fixtures::write_file(dir / "edges.H.tsv", "src_id\tdst_id\n0\t1\n1\t0\n1\t2\n");
    fixtures::write_file(dir / "edges.I.tsv", "src_id\tdst_id\n2\t0\n");
    fixtures::write_file(dir / "edges.C.tsv", "src_id\tdst_id\n0\t3\n");
    CHECK(arc_set(build_graph(GraphSpec::parse("Hr"), nodes, dir.path())) == std::set<Arc>{{0, 1}, {1, 0}});
    CHECK(build_graph(GraphSpec::parse("Hd"), nodes, dir.path()).arc_count() == 3);
    CHECK(build_graph(GraphSpec::parse("Hu"), nodes, dir.path()).arc_count() == 4);
    const auto full = build_graph(GraphSpec::parse("HrCuIu"), nodes, dir.path());
    CHECK(arc_set(full) == std::set<Arc>{{0, 1}, {1, 0}, {0, 3}, {3, 0}, {2, 0}, {0, 2}});
    const auto s = stats(full);
    REQUIRE(s.per_part.size() == 3);
    CHECK(s.per_part[0].arcs == 2);
    CHECK(s.per_part[1].arcs == 2);
    CHECK(s.per_part[2].arcs == 2);
}

}
