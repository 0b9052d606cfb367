#include "wikiwalk/relatedness.hpp"

#include <algorithm>
#include <cmath>

namespace wikiwalk {

ScoreVector term_ppv(std::string_view term, const PprEngine& engine, const Dictionary& dict, const PprParams& params) {
    const auto entry = dict.lookup(term);
    if (!entry) throw UnknownTermError(std::string(term));
    const auto teleport = build_teleport(std::span(&*entry, 1), params.prior_init, engine.dimension());
    auto ppv = engine.run(teleport, params);
    return params.k ? truncate_ppv(ppv, *params.k) : ppv;
}

double relate(const RelatednessQuery& q, const PprEngine& engine, const Dictionary& dict, const PprParams& params) {
    const auto a = term_ppv(q.term1, engine, dict, params);
    const auto b = term_ppv(q.term2, engine, dict, params);
    return cosine(a, b);
}

double ngd_score(std::uint64_t size_a, std::uint64_t size_b, std::uint64_t overlap, std::uint64_t universe) {
    if (size_a == 0 || size_b == 0 || overlap == 0) return 0.0;
    const auto hi = static_cast<double>(std::max(size_a, size_b));
    const auto lo = static_cast<double>(std::min(size_a, size_b));
    // Ratio form keeps hand-checkable cases exact (log 4 is exactly 2 log 2).
    const double num = std::log(hi / static_cast<double>(overlap));
    const double den = std::log(static_cast<double>(universe) / lo);
    if (num <= 0.0) return 1.0;
    if (den <= 0.0) return 0.0;
    return std::clamp(1.0 - num / den, 0.0, 1.0);
}

NgdIndex::NgdIndex(const TypedGraph& g) : owned_(transpose(g)), in_(&owned_), universe_(stats(g).non_isolated) {}

NgdIndex::NgdIndex(const TypedGraph& in_graph, std::uint64_t non_isolated) : in_(&in_graph), universe_(non_isolated) {}

double NgdIndex::relatedness(NodeId a, NodeId b) const {
    if (a >= in_->node_count() || b >= in_->node_count()) throw DataError("ngd: node id outside the graph");
    const auto ra = in_->neighbors(a);
    const auto rb = in_->neighbors(b);
    std::uint64_t overlap = 0;
    auto i = ra.begin();
    auto j = rb.begin();
    while (i != ra.end() && j != rb.end()) {
        if (*i < *j) ++i;
        else if (*j < *i) ++j;
        else {
            ++overlap;
            ++i;
            ++j;
        }
    }
    return ngd_score(ra.size(), rb.size(), overlap, universe_);
}

double NgdIndex::term_relatedness(const DictEntry& a, const DictEntry& b) const {
    double best = 0.0;
    for (const auto& ca : a.candidates)
        for (const auto& cb : b.candidates) best = std::max(best, relatedness(ca.article, cb.article));
    return best;
}

double ngd_relatedness(NodeId a, NodeId b, const TypedGraph& g) { return NgdIndex(g).relatedness(a, b); }

}  // namespace wikiwalk
