#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "wikiwalk/dictionary.hpp"
#include "wikiwalk/graph.hpp"
#include "wikiwalk/ppr.hpp"

namespace wikiwalk {

struct RelatednessQuery {
    std::string term1;
    std::string term2;
};

class UnknownTermError : public DataError {
public:
    explicit UnknownTermError(std::string term)
        : DataError("term not in dictionary: '" + term + "'"), term_(std::move(term)) {}
    const std::string& term() const { return term_; }

private:
    std::string term_;
};

/// Truncated PPV seeded with the dictionary entry of a single term.
ScoreVector term_ppv(std::string_view term, const PprEngine& engine, const Dictionary& dict, const PprParams& params);

/// Cosine between the truncated PPVs of both terms. Throws UnknownTermError.
double relate(const RelatednessQuery& q, const PprEngine& engine, const Dictionary& dict, const PprParams& params);

/// Shared in-link measure over a fixed graph:
///   NGD = (log max(|A|,|B|) - log |A∩B|) / (log W - log min(|A|,|B|)),  score = max(0, 1 - NGD)
/// with A, B the in-neighbor sets and W the number of non-isolated nodes.
class NgdIndex {
public:
    explicit NgdIndex(const TypedGraph& g);
    /// Reuses an existing in-neighbor view (e.g. PprEngine::in_graph()).
    NgdIndex(const TypedGraph& in_graph, std::uint64_t non_isolated);

    double relatedness(NodeId a, NodeId b) const;
    std::uint64_t universe() const { return universe_; }

    /// Best pairwise article score between two terms' candidates; priors are not used.
    double term_relatedness(const DictEntry& a, const DictEntry& b) const;

private:
    TypedGraph owned_;
    const TypedGraph* in_;
    std::uint64_t universe_;
};

/// Score from the formula above for explicit set sizes; exposed for checking by hand.
double ngd_score(std::uint64_t size_a, std::uint64_t size_b, std::uint64_t overlap, std::uint64_t universe);

double ngd_relatedness(NodeId a, NodeId b, const TypedGraph& g);

/// Combination of two relatedness scores by multiplication.
inline double combine_scores(double r1, double r2) { return r1 * r2; }

}  // namespace wikiwalk
