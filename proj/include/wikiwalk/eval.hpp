#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wikiwalk/common.hpp"

namespace wikiwalk {

/// Average ranks (1-based); tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of the average-rank vectors. Throws DataError on a
/// length mismatch, fewer than two items, or a constant input.
double spearman(std::span<const double> gold, std::span<const double> pred);

/// old_title -> new_title, applied to predictions before comparison.
using RedirectMap = std::unordered_map<std::string, std::string>;

RedirectMap load_redirect_map(const std::string& path);

/// Follows the map up to 16 hops.
std::string map_title(const RedirectMap& redirects, const std::string& title);

/// A system answer as it appears in a predictions file; nullopt is NIL.
struct TitledPrediction {
    std::string query_id;
    std::optional<std::string> title;
    double score = 0.0;
    bool fallback_used = false;
};

/// query_id -> gold title; nullopt marks a NIL gold answer.
using GoldMap = std::unordered_map<std::string, std::optional<std::string>>;

struct AccuracyResult {
    double value = 0.0;
    std::size_t n = 0;          // non-NIL gold instances
    std::size_t correct = 0;
    std::vector<std::string> ids;  // non-NIL ids, in prediction order
    std::vector<bool> hits;        // aligned with ids
};

/// Non-NIL accuracy. Every prediction must have a gold entry and vice versa.
AccuracyResult accuracy(std::span<const TitledPrediction> preds, const GoldMap& gold, const RedirectMap& redirects);

struct FisherResult {
    double p_value = 1.0;
    double z = 0.0;
    bool clamped = false;  // some |r| was 1 and was pulled to 1 - 1e-12
};

/// Two-sided test on the difference of two correlations via atanh:
///   z = (atanh r1 - atanh r2) / sqrt(1/(n1-3) + 1/(n2-3))
FisherResult fisher_z_test(double r1, double r2, std::size_t n1, std::size_t n2);

struct BootstrapResult {
    double p_value = 1.0;
    double observed_difference = 0.0;  // accuracy(A) - accuracy(B)
    std::size_t resamples = 0;
    std::uint64_t seed = 0;
};

inline constexpr std::size_t kDefaultResamples = 10000;
inline constexpr std::uint64_t kDefaultSeed = 20130404;

/// Paired bootstrap over per-instance correctness. One-sided on the observed
/// winner: p is the share of resamples whose difference is zero or has the
/// opposite sign. Each resample draws from its own generator seeded from
/// (seed, resample index), so the result does not depend on `workers`.
BootstrapResult paired_bootstrap(std::span<const bool> a, std::span<const bool> b,
                                 std::size_t resamples = kDefaultResamples, std::uint64_t seed = kDefaultSeed,
                                 unsigned workers = 1);

}  // namespace wikiwalk
