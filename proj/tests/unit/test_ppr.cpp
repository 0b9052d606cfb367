#include <doctest.h>

#include "support/fixtures.hpp"

using namespace wikiwalk;
using fixtures::graph_of;

namespace {

Eigen::VectorXd dense(const ScoreVector& s) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(s.size());
    for (ScoreVector::InnerIterator it(s); it; ++it) d[it.index()] = it.value();
    return d;
}

ScoreVector unit(std::size_t n, NodeId at) {
    ScoreVector v(static_cast<Eigen::Index>(n));
    v.insert(at) = 1.0;
    return v;
}

}  // namespace

TEST_SUITE("ppr") {

TEST_CASE("two-node cycle matches the linear solve") {
    const auto g = graph_of(2, {{0, 1}, {1, 0}});
    PprParams params;
    params.iterations = 200;
    const auto p = dense(run_ppr(g, unit(2, 0), params));
    // (I - a P^T) p = (1 - a) v
    Eigen::Matrix2d A;
    A << 1.0, -0.85, -0.85, 1.0;
    const Eigen::Vector2d exact = A.lu().solve(Eigen::Vector2d(0.15, 0.0));
    CHECK(std::abs(p[0] - exact[0]) < 1e-12);
    CHECK(std::abs(p[1] - exact[1]) < 1e-12);
    CHECK(p[0] == doctest::Approx(0.540540540540).epsilon(1e-9));
    CHECK(p[1] == doctest::Approx(0.459459459459).epsilon(1e-9));
}

TEST_CASE("engine agrees with the dense oracle on random graphs") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 40; ++t) {
        const std::size_t n = 1 + rng() % 30;
        const auto arcs = fixtures::random_arcs(rng, n, 0.15, 0.3);
        Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
            if (u(rng) < 0.3) v[static_cast<Eigen::Index>(i)] = u(rng);
        if (v.sum() == 0.0) v[0] = 1.0;
        v /= v.sum();
        PprParams params;
        params.alpha = 0.5 + 0.49 * u(rng);
        params.iterations = static_cast<int>(rng() % 40);
        const auto p = dense(run_ppr(graph_of(n, arcs), fixtures::sparse_of(v), params));
        const auto oracle = fixtures::dense_ppr_oracle(n, arcs, v, params.alpha, params.iterations);
        CHECK((p - oracle).lpNorm<1>() <= 1e-9);
    }
}

TEST_CASE("property: mass is conserved with dangling nodes") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 2 + rng() % 40;
        const auto g = graph_of(n, fixtures::random_arcs(rng, n, 0.1, 0.4));
        PprParams params;
        params.iterations = 1 + static_cast<int>(rng() % 50);
        const auto p = PprEngine(g).run_dense(unit(n, static_cast<NodeId>(rng() % n)), params);
        CHECK(std::abs(p.sum() - 1.0) < 1e-12);
        CHECK(p.minCoeff() >= 0.0);
    }
}

TEST_CASE("degenerate walks return the teleport vector") {
    const auto g = graph_of(3, {{0, 1}, {1, 2}, {2, 0}});
    ScoreVector v(3);
    v.insert(0) = 0.25;
    v.insert(2) = 0.75;
    PprParams zero_iter;
    zero_iter.iterations = 0;
    CHECK(dense(run_ppr(g, v, zero_iter)) == dense(v));
    PprParams no_walk;
    no_walk.alpha = 0.0;
    CHECK((dense(run_ppr(g, v, no_walk)) - dense(v)).lpNorm<1>() < 1e-15);
}

TEST_CASE("results do not depend on the worker count") {
    std::mt19937_64 rng(29);
    const std::size_t n = 3 * detail::kChunk + 123;
    std::vector<Arc> arcs;
    for (std::size_t i = 0; i < 4 * n; ++i) arcs.emplace_back(static_cast<NodeId>(rng() % n), static_cast<NodeId>(rng() % n));
    const auto g = graph_of(n, arcs);
    PprParams params;
    params.iterations = 10;
    const auto one = PprEngine(g, 1).run_dense(unit(n, 5), params);
    const auto four = PprEngine(g, 4).run_dense(unit(n, 5), params);
    CHECK(one == four);
}

TEST_CASE("float engine tracks the double engine") {
    const auto g = graph_of(4, {{0, 1}, {1, 2}, {2, 0}, {2, 3}});
    Eigen::SparseVector<float> vf(4);
    vf.insert(0) = 1.0f;
    const auto pf = BasicPprEngine<float>(g).run_dense(vf, PprParams{});
    const auto pd = PprEngine(g).run_dense(unit(4, 0), PprParams{});
    CHECK((pf.cast<double>() - pd).lpNorm<1>() < 1e-5);
}

TEST_CASE("tolerance stops early near the fixed point") {
    const auto g = graph_of(3, {{0, 1}, {1, 2}, {2, 0}, {1, 0}});
    PprParams full;
    full.iterations = 500;
    PprParams tol = full;
    tol.tolerance = 1e-10;
    const auto a = PprEngine(g).run_dense(unit(3, 0), full);
    const auto b = PprEngine(g).run_dense(unit(3, 0), tol);
    CHECK((a - b).lpNorm<1>() < 1e-8);
}

TEST_CASE("invalid parameters and teleports are rejected") {
    const auto g = graph_of(2, {{0, 1}});
    PprParams p;
    p.alpha = 1.0;
    CHECK_THROWS_AS(run_ppr(g, unit(2, 0), p), UsageError);
    p = {};
    p.iterations = -1;
    CHECK_THROWS_AS(p.validate(), UsageError);
    p = {};
    p.k = 0;
    CHECK_THROWS_AS(p.validate(), UsageError);
    CHECK_THROWS_AS(run_ppr(g, unit(3, 0), PprParams{}), DataError);
    ScoreVector neg(2);
    neg.insert(0) = -1.0;
    CHECK_THROWS_AS(run_ppr(g, neg, PprParams{}), DataError);
}

TEST_CASE("teleport vectors spread mention mass by prior or uniformly") {
    const DictEntry lions{"lions", {{0, 6, 0.6}, {1, 4, 0.4}}};
    const DictEntry town{"cape town", {{2, 7, 1.0}}};
    const std::vector<DictEntry> mentions{lions, town};
    const auto by_prior = dense(build_teleport(mentions, true, 4));
    CHECK(by_prior[0] == doctest::Approx(0.3));
    CHECK(by_prior[1] == doctest::Approx(0.2));
    CHECK(by_prior[2] == doctest::Approx(0.5));
    CHECK(by_prior[3] == 0.0);
    const auto uniform = dense(build_teleport(mentions, false, 4));
    CHECK(uniform[0] == doctest::Approx(0.25));
    CHECK(uniform[1] == doctest::Approx(0.25));
    // A repeated article accumulates mass across mentions.
    const std::vector<DictEntry> repeated{town, town, lions};
    const auto rep = dense(build_teleport(repeated, true, 4));
    CHECK(rep[2] == doctest::Approx(2.0 / 3.0));
    CHECK(rep.sum() == doctest::Approx(1.0));
    CHECK_THROWS_AS(build_teleport(std::vector<DictEntry>{}, true, 4), NoContextError);
    CHECK_THROWS_AS(build_teleport(mentions, true, 2), DataError);
}

TEST_CASE("truncation keeps the top k with low ids winning ties") {
    ScoreVector v(6);
    v.insert(0) = 0.1;
    v.insert(1) = 0.3;
    v.insert(2) = 0.2;
    v.insert(3) = 0.2;
    v.insert(5) = 0.2;
    const auto t = dense(truncate_ppv(v, 3));
    CHECK(t[1] == 0.3);
    CHECK(t[2] == 0.2);
    CHECK(t[3] == 0.2);
    CHECK(t[5] == 0.0);
    CHECK(t[0] == 0.0);
    CHECK(t.sum() == doctest::Approx(0.7));
    CHECK(truncate_ppv(v, 10).nonZeros() == 5);
    CHECK_THROWS_AS(truncate_ppv(v, 0), UsageError);
}

TEST_CASE("cosine") {
    ScoreVector a(4), b(4), z(4);
    a.insert(0) = 1.0;
    a.insert(1) = 2.0;
    b.insert(1) = 2.0;
    b.insert(2) = 1.0;
    CHECK(cosine(a, b) == doctest::Approx(4.0 / 5.0));
    CHECK(cosine(a, a) == doctest::Approx(1.0));
    ScoreVector scaled = a * 3.0;
    CHECK(cosine(scaled, b) == doctest::Approx(cosine(a, b)));
    CHECK(cosine(a, z) == 0.0);
    CHECK(cosine(z, z) == 0.0);
}

TEST_CASE("ppv dump lists nonzero entries by id") {
    ScoreVector v(5);
    v.insert(1) = 0.5;
    v.insert(4) = 0.25;
    std::ostringstream os;
    write_ppv_tsv(os, v);
    CHECK(os.str() == "1\t0.5\n4\t0.25\n");
}

}
