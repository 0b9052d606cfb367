#include "wikiwalk/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <thread>
#include <unordered_set>

namespace wikiwalk {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> gold, std::span<const double> pred) {
    if (gold.size() != pred.size()) throw DataError("spearman: length mismatch");
    if (gold.size() < 2) throw DataError("spearman: need at least two pairs");
    const auto rg = average_ranks(gold);
    const auto rp = average_ranks(pred);
    const double n = static_cast<double>(rg.size());
    const double mg = std::accumulate(rg.begin(), rg.end(), 0.0) / n;
    const double mp = std::accumulate(rp.begin(), rp.end(), 0.0) / n;
    double sgp = 0, sgg = 0, spp = 0;
    for (std::size_t i = 0; i < rg.size(); ++i) {
        const double dg = rg[i] - mg, dp = rp[i] - mp;
        sgp += dg * dp;
        sgg += dg * dg;
        spp += dp * dp;
    }
    if (sgg == 0.0 || spp == 0.0) throw DataError("spearman: undefined for constant input");
    return std::clamp(sgp / std::sqrt(sgg * spp), -1.0, 1.0);
}

RedirectMap load_redirect_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open redirect map " + path);
    RedirectMap map;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto row = chomp(line);
        if (row.empty() || row.front() == '#') continue;
        const auto f = split_tabs(row);
        if (f.size() != 2) throw DataError(path + ":" + std::to_string(lineno) + ": expected old_title<TAB>new_title");
        map[std::string(f[0])] = std::string(f[1]);
    }
    return map;
}

std::string map_title(const RedirectMap& redirects, const std::string& title) {
    std::string current = title;
    for (int hop = 0; hop < 16; ++hop) {
        const auto it = redirects.find(current);
        if (it == redirects.end() || it->second == current) break;
        current = it->second;
    }
    return current;
}

AccuracyResult accuracy(std::span<const TitledPrediction> preds, const GoldMap& gold, const RedirectMap& redirects) {
    AccuracyResult r;
    std::unordered_set<std::string> seen;
    for (const auto& p : preds) {
        const auto it = gold.find(p.query_id);
        if (it == gold.end()) throw DataError("prediction for unknown query id '" + p.query_id + "'");
        if (!seen.insert(p.query_id).second) throw DataError("duplicate prediction for query id '" + p.query_id + "'");
        if (!it->second) continue;
        const bool hit = p.title && map_title(redirects, *p.title) == *it->second;
        r.ids.push_back(p.query_id);
        r.hits.push_back(hit);
        ++r.n;
        r.correct += hit;
    }
    if (seen.size() != gold.size()) throw DataError("predictions do not cover every gold query id");
    r.value = r.n ? static_cast<double>(r.correct) / static_cast<double>(r.n) : 0.0;
    return r;
}

FisherResult fisher_z_test(double r1, double r2, std::size_t n1, std::size_t n2) {
    if (n1 < 4 || n2 < 4) throw DataError("fisher_z_test: sample sizes must be >= 4");
    FisherResult res;
    constexpr double kLimit = 1.0 - 1e-12;
    for (double* r : {&r1, &r2}) {
        if (std::abs(*r) >= 1.0) {
            *r = std::copysign(kLimit, *r);
            res.clamped = true;
        }
    }
    if (res.clamped) std::cerr << "warning: |r| = 1 clamped to 1 - 1e-12 in fisher_z_test\n";
    const double se = std::sqrt(1.0 / static_cast<double>(n1 - 3) + 1.0 / static_cast<double>(n2 - 3));
    res.z = (std::atanh(r1) - std::atanh(r2)) / se;
    res.p_value = std::erfc(std::abs(res.z) / std::sqrt(2.0));
    return res;
}

BootstrapResult paired_bootstrap(std::span<const bool> a, std::span<const bool> b, std::size_t resamples,
                                 std::uint64_t seed, unsigned workers) {
    if (a.size() != b.size()) throw DataError("paired_bootstrap: length mismatch");
    if (a.empty()) throw DataError("paired_bootstrap: no instances");
    if (resamples < 1000) throw UsageError("paired_bootstrap: resamples must be >= 1000");
    const std::size_t n = a.size();
    // Per-instance difference in {-1, 0, 1}; a resample's accuracy difference is their mean.
    std::vector<int> diff(n);
    long observed = 0;
    for (std::size_t i = 0; i < n; ++i) {
        diff[i] = static_cast<int>(a[i]) - static_cast<int>(b[i]);
        observed += diff[i];
    }
    BootstrapResult res;
    res.resamples = resamples;
    res.seed = seed;
    res.observed_difference = static_cast<double>(observed) / static_cast<double>(n);
    if (observed == 0) {
        res.p_value = 1.0;
        return res;
    }
    const int sign = observed > 0 ? 1 : -1;
    std::vector<std::uint8_t> against(resamples, 0);
    const auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t r = first; r < resamples; r += stride) {
            std::mt19937_64 rng(splitmix64(seed ^ splitmix64(r)));
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            long sum = 0;
            for (std::size_t i = 0; i < n; ++i) sum += diff[pick(rng)];
            against[r] = sum * sign <= 0;
        }
    };
    const std::size_t stride = std::max(1u, workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < stride; ++w) pool.emplace_back(work, w, stride);
    work(0, stride);
    for (auto& t : pool) t.join();
    const auto count = std::count(against.begin(), against.end(), std::uint8_t{1});
    res.p_value = static_cast<double>(count) / static_cast<double>(resamples);
    return res;
}

}  // namespace wikiwalk
