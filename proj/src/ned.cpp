#include "wikiwalk/ned.hpp"

#include <algorithm>
#include <fstream>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

namespace wikiwalk {

namespace {

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string s;
    for (const auto& t : tokens) {
        if (!s.empty()) s += ' ';
        s += t;
    }
    return s;
}

NedPrediction nil_prediction(const NedQuery& q) { return {q.query_id, kNil, {}, false}; }

NedPrediction prior_ranking(const NedQuery& q, const DictEntry& entry, bool fallback) {
    NedPrediction p{q.query_id, entry.best().article, {}, fallback};
    for (const auto& c : entry.candidates) p.candidate_scores.emplace_back(c.article, c.prior);
    return p;
}

// Sorts by score, then by prior, then by ascending id.
void rank(NedPrediction& p, const DictEntry& entry, bool prior_tiebreak) {
    std::sort(p.candidate_scores.begin(), p.candidate_scores.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        if (prior_tiebreak) {
            const double pa = entry.prior_of(a.first), pb = entry.prior_of(b.first);
            if (pa != pb) return pa > pb;
        }
        return a.first < b.first;
    });
    p.predicted = p.candidate_scores.empty() ? kNil : p.candidate_scores.front().first;
}

std::string url_encode(std::string_view s) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 15];
        }
    }
    return out;
}

}  // namespace

HttpTitleResolver::HttpTitleResolver(std::string host, int port, std::string path, std::chrono::milliseconds min_interval)
    : host_(std::move(host)), port_(port), path_(std::move(path)), min_interval_(min_interval) {}

std::optional<std::string> HttpTitleResolver::resolve(std::string_view mention) {
    {
        // Requests are serialized and spaced by min_interval.
        std::unique_lock lock(mutex_);
        const auto now = std::chrono::steady_clock::now();
        if (last_ != std::chrono::steady_clock::time_point{} && now - last_ < min_interval_)
            std::this_thread::sleep_for(min_interval_ - (now - last_));
        last_ = std::chrono::steady_clock::now();
    }
    httplib::Client client(host_, port_);
    client.set_connection_timeout(5);
    client.set_read_timeout(10);
    const auto target =
        path_ + "?action=query&list=search&srlimit=1&format=json&srsearch=" + url_encode(mention);
    const auto res = client.Get(target);
    if (!res || res->status != 200) return std::nullopt;
    try {
        const auto body = nlohmann::json::parse(res->body);
        const auto& hits = body.at("query").at("search");
        if (hits.empty()) return std::string();
        return hits.at(0).at("title").get<std::string>();
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

CachingTitleResolver::CachingTitleResolver(TitleResolver& inner, std::filesystem::path cache_file)
    : inner_(inner), cache_file_(std::move(cache_file)) {
    std::ifstream in(cache_file_);
    std::string line;
    while (std::getline(in, line)) {
        const auto f = split_tabs(chomp(line));
        if (f.size() == 2) cache_.emplace(std::string(f[0]), std::string(f[1]));
    }
}

std::optional<std::string> CachingTitleResolver::resolve(std::string_view mention) {
    const std::string key(mention);
    {
        std::lock_guard lock(mutex_);
        if (const auto it = cache_.find(key); it != cache_.end()) {
            if (it->second.empty()) return std::string();
            return it->second;
        }
    }
    auto answer = inner_.resolve(mention);
    if (!answer) return std::nullopt;
    std::lock_guard lock(mutex_);
    cache_[key] = *answer;
    persist();
    return answer;
}

std::size_t CachingTitleResolver::cached() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

void CachingTitleResolver::persist() const {
    auto tmp = cache_file_;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) return;
        for (const auto& [k, v] : cache_) out << k << '\t' << v << '\n';
    }
    std::error_code ec;
    std::filesystem::rename(tmp, cache_file_, ec);
}

std::optional<DictEntry> generate_candidates(std::string_view mention, const Dictionary& dict,
                                             const RemoteCandidates* remote) {
    // (1) normalize_mention already strips the parenthetical
    const auto base = normalize_mention(mention);
    if (base.empty()) return std::nullopt;
    if (auto e = dict.find_normalized(base)) return e;

    auto tokens = tokenize(base);
    // (2) leading "the"
    if (tokens.size() > 1 && tokens.front() == "the") {
        std::vector<std::string> rest(tokens.begin() + 1, tokens.end());
        if (auto e = dict.find_normalized(join_tokens(rest))) return e;
    }
    // (3) middle token of a three-token mention
    if (tokens.size() == 3) {
        if (auto e = dict.find_normalized(tokens[0] + " " + tokens[2])) return e;
    }
    // (4) remote title search
    if (remote) {
        const auto title = remote->resolver.resolve(base);
        if (title && !title->empty()) {
            auto id = remote->nodes.find(*title);
            if (!id) {
                std::string underscored = *title;
                std::replace(underscored.begin(), underscored.end(), ' ', '_');
                id = remote->nodes.find(underscored);
            }
            if (id && remote->nodes.kind(*id) == NodeKind::Article) return DictEntry{base, {{*id, 0, 1.0}}};
        }
    }
    return std::nullopt;
}

std::vector<DictEntry> extract_context(const NedQuery& q, const Dictionary& dict) {
    const auto& tokens = q.context_tokens;
    if (tokens.empty()) return {};
    const std::size_t target = std::min(q.target_index, tokens.size());
    const std::size_t target_end = std::min(tokens.size(), target + q.target_length);
    const std::size_t span_last = q.target_length ? target_end - 1 : target;
    const std::size_t lo = target > kContextRadius ? target - kContextRadius : 0;
    const std::size_t hi = std::min(tokens.size(), span_last + kContextRadius + 1);

    std::vector<DictEntry> out;
    const auto scan = [&](std::size_t b, std::size_t e) {
        if (b >= e) return;
        for (auto& m : dict.longest_match_scan(std::span(tokens).subspan(b, e - b))) out.push_back(std::move(m.entry));
    };
    scan(lo, target);
    scan(target_end, hi);
    return out;
}

NedPrediction disambiguate(const NedQuery& q, const PprEngine& engine, const Dictionary& dict, const NedOptions& options,
                           const RemoteCandidates* remote) {
    const auto entry = generate_candidates(q.mention, dict, remote);
    if (!entry || entry->candidates.empty()) return nil_prediction(q);
    if (entry->monosemous()) return prior_ranking(q, *entry, false);

    auto mentions = extract_context(q, dict);
    if (mentions.empty()) return prior_ranking(q, *entry, true);
    if (options.include_target_in_teleport) mentions.push_back(*entry);

    const auto teleport = build_teleport(mentions, options.ppr.prior_init, engine.dimension());
    const auto ppv = engine.run_dense(teleport, options.ppr);
    NedPrediction p{q.query_id, kNil, {}, false};
    for (const auto& c : entry->candidates) {
        const double walk = ppv[c.article];
        p.candidate_scores.emplace_back(c.article, options.ppr.prior_init ? walk * c.prior : walk);
    }
    rank(p, *entry, false);
    return p;
}

NedPrediction ngd_disambiguate(const NedQuery& q, const NgdIndex& ngd, const Dictionary& dict,
                               const RemoteCandidates* remote) {
    const auto entry = generate_candidates(q.mention, dict, remote);
    if (!entry || entry->candidates.empty()) return nil_prediction(q);
    if (entry->monosemous()) return prior_ranking(q, *entry, false);

    std::map<NodeId, double> weights;
    for (const auto& m : extract_context(q, dict))
        if (m.monosemous()) weights[m.best().article] += 1.0;
    if (weights.empty()) return prior_ranking(q, *entry, true);

    NedPrediction p{q.query_id, kNil, {}, false};
    for (const auto& c : entry->candidates) {
        double sum = 0.0;
        for (const auto& [article, w] : weights) sum += w * ngd.relatedness(c.article, article);
        p.candidate_scores.emplace_back(c.article, c.prior * sum);
    }
    rank(p, *entry, true);
    return p;
}

NedPrediction direct_link_disambiguate(const NedQuery& q, const TypedGraph& g, const Dictionary& dict,
                                       const RemoteCandidates* remote) {
    const auto entry = generate_candidates(q.mention, dict, remote);
    if (!entry || entry->candidates.empty()) return nil_prediction(q);
    if (entry->monosemous()) return prior_ranking(q, *entry, false);

    std::vector<NodeId> context;
    for (const auto& m : extract_context(q, dict))
        for (const auto& c : m.candidates) context.push_back(c.article);
    std::sort(context.begin(), context.end());
    context.erase(std::unique(context.begin(), context.end()), context.end());
    if (context.empty()) return prior_ranking(q, *entry, true);

    NedPrediction p{q.query_id, kNil, {}, false};
    for (const auto& c : entry->candidates) {
        double links = 0.0;
        for (NodeId a : context)
            if (a != c.article && (g.has_arc(c.article, a) || g.has_arc(a, c.article))) links += 1.0;
        p.candidate_scores.emplace_back(c.article, links);
    }
    rank(p, *entry, true);
    return p;
}

NedPrediction mfs_baseline(const NedQuery& q, const Dictionary& dict, const RemoteCandidates* remote) {
    const auto entry = generate_candidates(q.mention, dict, remote);
    if (!entry || entry->candidates.empty()) return nil_prediction(q);
    return prior_ranking(q, *entry, false);
}

NedQuery make_query(std::string query_id, std::string mention, std::string_view document,
                    std::optional<std::size_t> char_offset, std::optional<std::string> gold) {
    NedQuery q;
    q.query_id = std::move(query_id);
    q.context_tokens = tokenize(document);
    const auto needle = tokenize(mention);
    q.mention = std::move(mention);
    q.gold_article = std::move(gold);

    std::optional<std::size_t> estimate;
    if (char_offset) {
        // Raw whitespace-separated tokens before the offset approximate the target position.
        const auto prefix = document.substr(0, std::min(*char_offset, document.size()));
        estimate = tokenize(prefix).size();
    }
    const auto& tokens = q.context_tokens;
    std::optional<std::size_t> best;
    if (!needle.empty() && needle.size() <= tokens.size()) {
        for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i) {
            if (!std::equal(needle.begin(), needle.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) continue;
            if (!estimate) {
                best = i;
                break;
            }
            const auto dist = [&](std::size_t pos) { return pos > *estimate ? pos - *estimate : *estimate - pos; };
            if (!best || dist(i) < dist(*best)) best = i;
        }
    }
    if (best) {
        q.target_index = *best;
        q.target_length = needle.size();
    } else {
        q.target_index = std::min(estimate.value_or(0), tokens.empty() ? 0 : tokens.size() - 1);
        q.target_length = 0;
    }
    return q;
}

}  // namespace wikiwalk
