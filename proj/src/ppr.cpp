#include "wikiwalk/ppr.hpp"

#include <map>

namespace wikiwalk {

void PprParams::validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in [0, 1)");
    if (iterations < 0) throw UsageError("iterations must be >= 0");
    if (k && *k == 0) throw UsageError("k must be >= 1");
    if (tolerance && !(*tolerance > 0.0)) throw UsageError("tolerance must be positive");
}

ScoreVector build_teleport(std::span<const DictEntry> mentions, bool prior_init, std::size_t dimension) {
    std::map<NodeId, double> mass;
    for (const auto& m : mentions) {
        if (m.candidates.empty()) continue;
        const double uniform = 1.0 / static_cast<double>(m.candidates.size());
        for (const auto& c : m.candidates) {
            if (c.article >= dimension) throw DataError("candidate " + std::to_string(c.article) + " outside the graph");
            mass[c.article] += prior_init ? c.prior : uniform;
        }
    }
    double total = 0.0;
    for (const auto& [id, w] : mass) total += w;
    if (mass.empty() || total <= 0.0) throw NoContextError();
    ScoreVector v(static_cast<Eigen::Index>(dimension));
    v.reserve(static_cast<Eigen::Index>(mass.size()));
    for (const auto& [id, w] : mass)
        if (w > 0.0) v.insertBack(id) = w / total;
    return v;
}

ScoreVector run_ppr(const TypedGraph& g, const ScoreVector& teleport, const PprParams& params) {
    return PprEngine(g).run(teleport, params);
}

void write_ppv_tsv(std::ostream& out, const ScoreVector& ppv) {
    const auto old = out.precision(17);
    for (ScoreVector::InnerIterator it(ppv); it; ++it) out << it.index() << '\t' << it.value() << '\n';
    out.precision(old);
}

}  // namespace wikiwalk
