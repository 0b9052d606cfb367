#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <thread>
#include <vector>

#include "wikiwalk/common.hpp"
#include "wikiwalk/dictionary.hpp"
#include "wikiwalk/graph.hpp"

namespace wikiwalk {

/// Sparse score vector over node ids; no explicit zeros are stored.
template <typename Scalar>
using BasicScoreVector = Eigen::SparseVector<Scalar>;
using ScoreVector = BasicScoreVector<double>;

template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct PprParams {
    double alpha = 0.85;                       // link-follow probability; teleport weight is 1 - alpha
    int iterations = 30;                       // fixed power-iteration steps
    std::optional<std::size_t> k = 5000;       // PPV truncation rank; nullopt keeps everything
    bool prior_init = true;                    // teleport by prior instead of uniformly
    std::optional<double> tolerance;           // stop early when the L1 change drops below this

    /// alpha in [0,1), iterations >= 0, k >= 1 when set. Throws UsageError.
    void validate() const;
};

/// No mention with candidates was available to seed the walk.
class NoContextError : public std::runtime_error {
public:
    NoContextError() : std::runtime_error("no context mentions to build a teleport vector") {}
};

/// Spreads each mention's unit mass over its candidates (by prior or
/// uniformly), sums across mentions and renormalizes to 1.
ScoreVector build_teleport(std::span<const DictEntry> mentions, bool prior_init, std::size_t dimension);

namespace detail {

inline constexpr std::size_t kChunk = 1 << 15;

// Runs fn(begin, end, chunk) over fixed-size chunks. Chunk boundaries do not
// depend on the worker count, so per-chunk partial results are reproducible.
template <typename Fn>
void for_chunks(std::size_t n, unsigned workers, Fn&& fn) {
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    const std::size_t stride = std::max<std::size_t>(1, std::min<std::size_t>(workers, chunks));
    const auto run = [&](std::size_t first) {
        for (std::size_t c = first; c < chunks; c += stride) fn(c * kChunk, std::min(n, (c + 1) * kChunk), c);
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < stride; ++w) pool.emplace_back(run, w);
    run(0);
    for (auto& t : pool) t.join();
}

}  // namespace detail

/// Personalized PageRank over one immutable graph.
///
/// Iterates p <- (1 - alpha) v + alpha (M^T p + d v), where M spreads each
/// node's mass uniformly over its out-arcs and d is the mass sitting on
/// dangling nodes. The pull formulation over in-neighbors keeps every output
/// entry owned by one worker, so results are bitwise independent of the
/// worker count. The graph must outlive the engine.
template <typename Scalar>
class BasicPprEngine {
public:
    explicit BasicPprEngine(const TypedGraph& graph, unsigned workers = 1)
        : graph_(&graph), in_(transpose(graph)), inv_degree_(graph.node_count()), workers_(std::max(1u, workers)) {
        for (NodeId u = 0; u < graph.node_count(); ++u) {
            const auto d = graph.out_degree(u);
            inv_degree_[u] = d ? Scalar(1) / static_cast<Scalar>(d) : Scalar(0);
        }
    }

    const TypedGraph& graph() const { return *graph_; }
    /// In-neighbor view: in_graph().neighbors(v) lists every u with u->v.
    const TypedGraph& in_graph() const { return in_; }
    std::size_t dimension() const { return graph_->node_count(); }
    unsigned workers() const { return workers_; }
    void set_workers(unsigned workers) { workers_ = std::max(1u, workers); }

    DenseVector<Scalar> run_dense(const BasicScoreVector<Scalar>& teleport, const PprParams& params) const {
        params.validate();
        const std::size_t n = dimension();
        if (static_cast<std::size_t>(teleport.size()) != n)
            throw DataError("teleport dimension " + std::to_string(teleport.size()) + " does not match graph size " +
                            std::to_string(n));
        DenseVector<Scalar> tele = DenseVector<Scalar>::Zero(static_cast<Eigen::Index>(n));
        for (typename BasicScoreVector<Scalar>::InnerIterator it(teleport); it; ++it) {
            if (it.value() < Scalar(0)) throw DataError("teleport vector has a negative entry");
            tele[it.index()] = it.value();
        }

        const Scalar alpha = static_cast<Scalar>(params.alpha);
        DenseVector<Scalar> p = tele;
        DenseVector<Scalar> next(static_cast<Eigen::Index>(n));
        DenseVector<Scalar> contrib(static_cast<Eigen::Index>(n));
        const std::size_t chunks = (n + detail::kChunk - 1) / detail::kChunk;
        std::vector<Scalar> partial(chunks);

        for (int iter = 0; iter < params.iterations; ++iter) {
            detail::for_chunks(n, workers_, [&](std::size_t b, std::size_t e, std::size_t c) {
                Scalar dangling = 0;
                for (std::size_t u = b; u < e; ++u) {
                    contrib[u] = p[u] * inv_degree_[u];
                    if (inv_degree_[u] == Scalar(0)) dangling += p[u];
                }
                partial[c] = dangling;
            });
            Scalar dangling = 0;
            for (Scalar d : partial) dangling += d;
            const Scalar tele_weight = (Scalar(1) - alpha) + alpha * dangling;

            detail::for_chunks(n, workers_, [&](std::size_t b, std::size_t e, std::size_t c) {
                Scalar delta = 0;
                for (std::size_t v = b; v < e; ++v) {
                    Scalar pulled = 0;
                    for (NodeId u : in_.neighbors(static_cast<NodeId>(v))) pulled += contrib[u];
                    next[v] = alpha * pulled + tele_weight * tele[v];
                    delta += std::abs(next[v] - p[v]);
                }
                partial[c] = delta;
            });
            p.swap(next);
            if (params.tolerance) {
                Scalar delta = 0;
                for (Scalar d : partial) delta += d;
                if (delta < static_cast<Scalar>(*params.tolerance)) break;
            }
        }
        return p;
    }

    BasicScoreVector<Scalar> run(const BasicScoreVector<Scalar>& teleport, const PprParams& params) const {
        const auto dense = run_dense(teleport, params);
        BasicScoreVector<Scalar> out(dense.size());
        std::size_t nnz = 0;
        for (Eigen::Index i = 0; i < dense.size(); ++i) nnz += dense[i] != Scalar(0);
        out.reserve(static_cast<Eigen::Index>(nnz));
        for (Eigen::Index i = 0; i < dense.size(); ++i)
            if (dense[i] != Scalar(0)) out.insertBack(i) = dense[i];
        return out;
    }

private:
    const TypedGraph* graph_;
    TypedGraph in_;
    std::vector<Scalar> inv_degree_;
    unsigned workers_;
};

using PprEngine = BasicPprEngine<double>;

/// One-shot convenience; builds a PprEngine for `g`.
ScoreVector run_ppr(const TypedGraph& g, const ScoreVector& teleport, const PprParams& params);

/// Keeps the k largest entries, ties at the boundary going to the lower node id. No renormalization.
template <typename Scalar>
BasicScoreVector<Scalar> truncate_ppv(const BasicScoreVector<Scalar>& ppv, std::size_t k) {
    if (k == 0) throw UsageError("truncation rank k must be >= 1");
    if (static_cast<std::size_t>(ppv.nonZeros()) <= k) return ppv;
    std::vector<std::pair<Eigen::Index, Scalar>> items;
    items.reserve(static_cast<std::size_t>(ppv.nonZeros()));
    for (typename BasicScoreVector<Scalar>::InnerIterator it(ppv); it; ++it) items.emplace_back(it.index(), it.value());
    const auto by_rank = [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    };
    std::nth_element(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(k - 1), items.end(), by_rank);
    items.resize(k);
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    BasicScoreVector<Scalar> out(ppv.size());
    out.reserve(static_cast<Eigen::Index>(k));
    for (const auto& [i, v] : items) out.insertBack(i) = v;
    return out;
}

/// Cosine similarity; 0 when either vector is all zero.
template <typename Scalar>
Scalar cosine(const BasicScoreVector<Scalar>& a, const BasicScoreVector<Scalar>& b) {
    const Scalar na = a.norm(), nb = b.norm();
    if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
    return std::clamp(a.dot(b) / (na * nb), Scalar(0), Scalar(1));
}

/// Debug dump: node_id \t score, ascending id.
void write_ppv_tsv(std::ostream& out, const ScoreVector& ppv);

}  // namespace wikiwalk
