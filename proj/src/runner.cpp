#include "wikiwalk/runner.hpp"

#include <atomic>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace wikiwalk {

namespace {

// Runs fn(i) for i in [0, n) on `workers` threads; each index is handled once.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    const auto run = [&] {
        while (true) {
            const auto i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
    };
    const unsigned used = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(n, 1)));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < used; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

std::optional<double> parse_score(std::string_view s) {
    if (s == "NA") return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(std::string(s), &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw DataError("not a number: '" + std::string(s) + "'");
    }
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.emplace_back(chomp(line));
    return lines;
}

bool skippable(std::string_view row) { return row.empty() || row.front() == '#'; }

}  // namespace

TaskKind parse_task(const std::string& s) {
    if (s == "rel") return TaskKind::Relatedness;
    if (s == "ned") return TaskKind::Ned;
    throw UsageError("unknown task '" + s + "' (expected rel or ned)");
}

SystemKind parse_system(const std::string& s) {
    if (s == "ppr") return SystemKind::Ppr;
    if (s == "ngd") return SystemKind::Ngd;
    if (s == "mfs") return SystemKind::Mfs;
    if (s == "direct") return SystemKind::DirectLinks;
    throw UsageError("unknown system '" + s + "' (expected ppr, ngd, mfs or direct)");
}

std::string to_string(TaskKind t) { return t == TaskKind::Relatedness ? "rel" : "ned"; }

std::string to_string(SystemKind s) {
    switch (s) {
        case SystemKind::Ppr: return "ppr";
        case SystemKind::Ngd: return "ngd";
        case SystemKind::Mfs: return "mfs";
        case SystemKind::DirectLinks: return "direct";
    }
    return "?";
}

void RunConfig::validate() const {
    GraphSpec::parse(graph);
    ppr().validate();
    const auto t = parse_task(task);
    const auto s = parse_system(system);
    if (t == TaskKind::Relatedness && (s == SystemKind::Mfs || s == SystemKind::DirectLinks))
        throw UsageError("system '" + system + "' is only defined for ned");
    if (unknown != "skip" && unknown != "zero") throw UsageError("--unknown must be skip or zero");
    if (dict_backend != "memory" && dict_backend != "disk") throw UsageError("--dict-backend must be memory or disk");
    if (resamples < 1000) throw UsageError("bootstrap needs at least 1000 resamples");
    if (!baselines.empty() && baselines.size() != datasets.size())
        throw UsageError("give one baseline predictions file per dataset");
    if (!combine.empty() && (t != TaskKind::Relatedness || combine.size() != datasets.size()))
        throw UsageError("--combine-with needs the rel task and one predictions file per dataset");
}

PprParams RunConfig::ppr() const {
    PprParams p;
    p.alpha = alpha;
    p.iterations = iterations;
    p.k = k ? std::optional<std::size_t>(k) : std::nullopt;
    p.prior_init = prior;
    return p;
}

nlohmann::ordered_json RunConfig::to_json() const {
    nlohmann::ordered_json j;
    j["graph"] = graph;
    j["alpha"] = alpha;
    j["iters"] = iterations;
    j["k"] = k;
    j["prior"] = prior;
    j["seed"] = seed;
    j["resamples"] = resamples;
    j["task"] = task;
    j["system"] = system;
    j["data"] = data_dir;
    j["dataset"] = datasets;
    j["baseline"] = baselines;
    j["combine_with"] = combine;
    j["redirects"] = redirects;
    j["unknown"] = unknown;
    j["target_in_teleport"] = target_in_teleport;
    j["dict_backend"] = dict_backend;
    j["resolver_cache"] = resolver_cache;
    j["resolver_host"] = resolver_host;
    j["resolver_port"] = resolver_port;
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    c.graph = j.at("graph");
    c.alpha = j.at("alpha");
    c.iterations = j.at("iters");
    c.k = j.at("k");
    c.prior = j.at("prior");
    c.seed = j.at("seed");
    c.resamples = j.at("resamples");
    c.task = j.at("task");
    c.system = j.at("system");
    c.data_dir = j.at("data");
    c.datasets = j.at("dataset").get<std::vector<std::string>>();
    c.baselines = j.at("baseline").get<std::vector<std::string>>();
    c.combine = j.at("combine_with").get<std::vector<std::string>>();
    c.redirects = j.at("redirects");
    c.unknown = j.at("unknown");
    c.target_in_teleport = j.at("target_in_teleport");
    c.dict_backend = j.at("dict_backend");
    c.resolver_cache = j.at("resolver_cache");
    c.resolver_host = j.at("resolver_host");
    c.resolver_port = j.at("resolver_port");
    return c;
}

std::filesystem::path Workspace::graph_snapshot(const std::filesystem::path& dir, const GraphSpec& spec) {
    return dir / ("graph." + spec.str() + ".gwkb");
}

std::filesystem::path Workspace::dict_snapshot(const std::filesystem::path& dir) { return dir / "dict.gwdict"; }

Workspace::Workspace(const std::filesystem::path& dir, const GraphSpec& spec, DictionaryBackend backend,
                     unsigned workers) {
    const auto gpath = graph_snapshot(dir, spec);
    const auto dpath = dict_snapshot(dir);
    for (const auto& p : {gpath, dpath})
        if (!std::filesystem::exists(p))
            throw DataError("missing snapshot " + p.string() + " (run `wikiwalk build --graph " + spec.str() + "` first)");
    nodes_ = NodeTable::load(dir / "nodes.tsv");
    graph_ = TypedGraph::load(gpath);
    if (graph_.node_count() != nodes_.size()) throw DataError(gpath.string() + ": node count does not match nodes.tsv");
    dict_ = Dictionary::open(dpath, backend);
    engine_ = std::make_unique<PprEngine>(graph_, workers);
    ngd_ = std::make_unique<NgdIndex>(engine_->in_graph(), stats(graph_).non_isolated);
}

std::vector<BuildResult> build_snapshots(const std::filesystem::path& data_dir, const std::vector<GraphSpec>& specs,
                                         const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto nodes = NodeTable::load(data_dir / "nodes.tsv");
    if (!std::filesystem::equivalent(data_dir, out_dir)) nodes.save(out_dir / "nodes.tsv");
    std::vector<BuildResult> rows;
    for (const auto& spec : specs) {
        const auto g = build_graph(spec, nodes, data_dir);
        g.save(Workspace::graph_snapshot(out_dir, spec));
        rows.push_back({spec.str(), stats(g), spec.is_paper_configuration()});
    }
    const auto counts = load_count_file(data_dir / "dict_counts.tsv");
    Dictionary::build(counts, nodes.size()).save(Workspace::dict_snapshot(out_dir));
    return rows;
}

std::string format_stats_table(const std::vector<BuildResult>& rows) {
    std::ostringstream os;
    os << "Graph\tEdges\tNodes\tNonIsolated\n";
    for (const auto& r : rows) {
        os << r.spec << (r.paper_configuration ? "" : "*") << '\t' << r.stats.arcs << '\t' << r.stats.nodes << '\t'
           << r.stats.non_isolated << '\n';
    }
    return os.str();
}

std::vector<RelPair> load_relatedness_dataset(const std::filesystem::path& path) {
    std::vector<RelPair> pairs;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (skippable(lines[i])) continue;
        const auto f = split_tabs(lines[i]);
        const auto where = path.string() + ":" + std::to_string(i + 1);
        if (f.size() < 2 || f.size() > 3 || f[0].empty() || f[1].empty())
            throw DataError(where + ": expected term1<TAB>term2[<TAB>gold]");
        RelPair p{std::string(f[0]), std::string(f[1]), std::nullopt};
        if (f.size() == 3) {
            try {
                p.gold = parse_score(f[2]);
            } catch (const DataError& e) {
                throw DataError(where + ": " + e.what());
            }
        }
        pairs.push_back(std::move(p));
    }
    return pairs;
}

std::vector<RelResult> run_relatedness(const Workspace& ws, std::span<const RelPair> pairs, const RunConfig& config,
                                       unsigned workers) {
    const auto system = parse_system(config.system);
    const auto params = config.ppr();
    std::map<std::string, std::size_t> slot;
    std::vector<std::string> terms;
    for (const auto& p : pairs)
        for (const auto* t : {&p.term1, &p.term2})
            if (slot.emplace(*t, terms.size()).second) terms.push_back(*t);

    std::vector<std::optional<DictEntry>> entries(terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) entries[i] = ws.dictionary().lookup(terms[i]);

    std::vector<std::optional<ScoreVector>> ppvs(terms.size());
    if (system == SystemKind::Ppr) {
        parallel_for(terms.size(), workers, [&](std::size_t i) {
            if (!entries[i]) return;
            ppvs[i] = term_ppv(terms[i], ws.engine(), ws.dictionary(), params);
        });
    }

    std::vector<RelResult> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        const auto a = slot.at(p.term1), b = slot.at(p.term2);
        RelResult r{p, std::nullopt, false};
        if (!entries[a] || !entries[b]) {
            r.unknown = true;
            if (config.unknown == "zero") r.predicted = 0.0;
        } else if (system == SystemKind::Ppr) {
            r.predicted = cosine(*ppvs[a], *ppvs[b]);
        } else {
            r.predicted = ws.ngd().term_relatedness(*entries[a], *entries[b]);
        }
        out.push_back(std::move(r));
    }
    return out;
}

void write_relatedness_predictions(const std::filesystem::path& path, std::span<const RelResult> results) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    for (const auto& r : results) {
        out << r.pair.term1 << '\t' << r.pair.term2 << '\t' << (r.pair.gold ? format_double(*r.pair.gold) : "NA") << '\t'
            << (r.predicted ? format_double(*r.predicted) : "NA") << '\n';
    }
}

std::vector<RelResult> load_relatedness_predictions(const std::filesystem::path& path) {
    std::vector<RelResult> out;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (skippable(lines[i])) continue;
        const auto f = split_tabs(lines[i]);
        if (f.size() != 4) throw DataError(path.string() + ":" + std::to_string(i + 1) + ": expected 4 columns");
        RelResult r{{std::string(f[0]), std::string(f[1]), parse_score(f[2])}, parse_score(f[3]), false};
        r.unknown = !r.predicted;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<RelResult> combine_with(std::span<const RelResult> results, std::span<const RelResult> other) {
    std::map<std::pair<std::string, std::string>, std::optional<double>> scores;
    for (const auto& o : other) scores[{o.pair.term1, o.pair.term2}] = o.predicted;
    std::vector<RelResult> out(results.begin(), results.end());
    for (auto& r : out) {
        const auto it = scores.find({r.pair.term1, r.pair.term2});
        if (!r.predicted) continue;
        if (it == scores.end() || !it->second) {
            r.predicted.reset();
            r.unknown = true;
            continue;
        }
        r.predicted = combine_scores(*r.predicted, *it->second);
    }
    return out;
}

std::vector<NedQuery> load_ned_dataset(const std::filesystem::path& path) {
    std::vector<NedQuery> queries;
    std::map<std::string, std::string> documents;
    const auto base = path.parent_path();
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (skippable(lines[i])) continue;
        const auto f = split_tabs(lines[i]);
        const auto where = path.string() + ":" + std::to_string(i + 1);
        if (f.size() < 3 || f.size() > 5 || f[0].empty() || f[1].empty())
            throw DataError(where + ": expected query_id<TAB>mention<TAB>context_file[<TAB>char_offset[<TAB>gold]]");
        const std::string ctx(f[2]);
        auto it = documents.find(ctx);
        if (it == documents.end()) it = documents.emplace(ctx, read_file(base / ctx)).first;
        std::optional<std::size_t> offset;
        if (f.size() >= 4 && !f[3].empty()) {
            try {
                offset = std::stoull(std::string(f[3]));
            } catch (const std::exception&) {
                throw DataError(where + ": bad char_offset");
            }
        }
        std::optional<std::string> gold;
        if (f.size() == 5 && !f[4].empty() && f[4] != "NIL") gold = std::string(f[4]);
        queries.push_back(make_query(std::string(f[0]), std::string(f[1]), it->second, offset, std::move(gold)));
    }
    return queries;
}

std::vector<NedPrediction> run_ned(const Workspace& ws, std::span<const NedQuery> queries, const RunConfig& config,
                                   unsigned workers, TitleResolver* resolver) {
    const auto system = parse_system(config.system);
    NedOptions options;
    options.ppr = config.ppr();
    options.include_target_in_teleport = config.target_in_teleport;
    std::optional<RemoteCandidates> remote;
    if (resolver) remote.emplace(RemoteCandidates{*resolver, ws.nodes()});
    const RemoteCandidates* rc = remote ? &*remote : nullptr;

    std::vector<NedPrediction> out(queries.size());
    parallel_for(queries.size(), workers, [&](std::size_t i) {
        const auto& q = queries[i];
        switch (system) {
            case SystemKind::Ppr: out[i] = disambiguate(q, ws.engine(), ws.dictionary(), options, rc); break;
            case SystemKind::Ngd: out[i] = ngd_disambiguate(q, ws.ngd(), ws.dictionary(), rc); break;
            case SystemKind::Mfs: out[i] = mfs_baseline(q, ws.dictionary(), rc); break;
            case SystemKind::DirectLinks: out[i] = direct_link_disambiguate(q, ws.graph(), ws.dictionary(), rc); break;
        }
    });
    return out;
}

std::vector<TitledPrediction> titled(std::span<const NedPrediction> preds, const NodeTable& nodes) {
    std::vector<TitledPrediction> out;
    out.reserve(preds.size());
    for (const auto& p : preds) {
        TitledPrediction t{p.query_id, std::nullopt, p.score(), p.fallback_used};
        if (!p.is_nil()) t.title = nodes.title(p.predicted);
        out.push_back(std::move(t));
    }
    return out;
}

void write_ned_predictions(const std::filesystem::path& path, std::span<const TitledPrediction> preds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    for (const auto& p : preds)
        out << p.query_id << '\t' << p.title.value_or("NIL") << '\t' << format_double(p.score) << '\t'
            << (p.fallback_used ? 1 : 0) << '\n';
}

std::vector<TitledPrediction> load_ned_predictions(const std::filesystem::path& path) {
    std::vector<TitledPrediction> out;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (skippable(lines[i])) continue;
        const auto f = split_tabs(lines[i]);
        if (f.size() != 4) throw DataError(path.string() + ":" + std::to_string(i + 1) + ": expected 4 columns");
        TitledPrediction p{std::string(f[0]), std::nullopt, parse_score(f[2]).value_or(0.0), f[3] == "1"};
        if (f[1] != "NIL") p.title = std::string(f[1]);
        out.push_back(std::move(p));
    }
    return out;
}

GoldMap gold_map(std::span<const NedQuery> queries) {
    GoldMap gold;
    for (const auto& q : queries)
        if (!gold.emplace(q.query_id, q.gold_article).second) throw DataError("duplicate query id '" + q.query_id + "'");
    return gold;
}

nlohmann::ordered_json EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["dataset"] = dataset;
    j["metric"] = metric;
    j["value"] = value;
    j["n"] = n;
    if (metric == "spearman") {
        j["skipped"] = skipped;
    } else {
        j["fallbacks"] = fallbacks;
        j["fallback_rate"] = n ? static_cast<double>(fallbacks) / static_cast<double>(n) : 0.0;
    }
    j["config"] = config.to_json();
    auto sig = nlohmann::ordered_json::array();
    for (const auto& s : significance) {
        nlohmann::ordered_json e;
        e["baseline"] = s.baseline;
        e["test"] = s.test;
        e["baseline_value"] = s.baseline_value;
        e["p_value"] = s.p_value;
        e["significant"] = s.significant;
        if (s.test == "paired_bootstrap") {
            e["sided"] = "one-sided on observed winner";
            e["resamples"] = config.resamples;
            e["seed"] = config.seed;
        }
        sig.push_back(std::move(e));
    }
    j["significance"] = std::move(sig);
    if (!parts.empty()) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& p : parts) {
            auto pj = p.to_json();
            pj.erase("config");
            arr.push_back(std::move(pj));
        }
        j["parts"] = std::move(arr);
    }
    return j;
}

namespace {

std::filesystem::path part_path(const std::filesystem::path& out, std::size_t index, std::size_t total) {
    if (out.empty() || total == 1) return out;
    auto p = out;
    p.replace_extension(std::to_string(index) + out.extension().string());
    return p;
}

struct RelColumns {
    std::vector<double> gold, pred;
    std::size_t skipped = 0;
};

RelColumns rel_columns(std::span<const RelResult> results) {
    RelColumns c;
    for (const auto& r : results) {
        if (!r.predicted) {
            ++c.skipped;
            continue;
        }
        if (!r.pair.gold) throw DataError("relatedness pair " + r.pair.term1 + "/" + r.pair.term2 + " has no gold score");
        c.gold.push_back(*r.pair.gold);
        c.pred.push_back(*r.predicted);
    }
    return c;
}

EvalReport rel_report(std::string name, const RelColumns& sys, const std::optional<RelColumns>& base,
                      const std::string& base_name, const RunConfig& config) {
    EvalReport r;
    r.dataset = std::move(name);
    r.metric = "spearman";
    r.value = spearman(sys.gold, sys.pred);
    r.n = sys.gold.size();
    r.skipped = sys.skipped;
    r.config = config;
    if (base) {
        const double rb = spearman(base->gold, base->pred);
        const auto f = fisher_z_test(r.value, rb, r.n, base->gold.size());
        r.significance.push_back({base_name, "fisher_z", rb, f.p_value, f.p_value < 0.05});
    }
    return r;
}

EvalReport ned_report(std::string name, const AccuracyResult& sys, const std::optional<AccuracyResult>& base,
                      std::size_t fallbacks, const std::string& base_name, const RunConfig& config, unsigned workers) {
    if (sys.n == 0) throw DataError(name + ": no instances with a non-NIL gold answer");
    EvalReport r;
    r.dataset = std::move(name);
    r.metric = "accuracy";
    r.value = sys.value;
    r.n = sys.n;
    r.fallbacks = fallbacks;
    r.config = config;
    if (base) {
        std::unordered_map<std::string, bool> base_hits;
        for (std::size_t i = 0; i < base->ids.size(); ++i) base_hits[base->ids[i]] = base->hits[i];
        std::vector<char> a, b;
        for (std::size_t i = 0; i < sys.ids.size(); ++i) {
            const auto it = base_hits.find(sys.ids[i]);
            if (it == base_hits.end()) throw DataError("baseline has no prediction for '" + sys.ids[i] + "'");
            a.push_back(sys.hits[i]);
            b.push_back(it->second);
        }
        const std::vector<bool> va(a.begin(), a.end()), vb(b.begin(), b.end());
        std::unique_ptr<bool[]> ba(new bool[va.size()]), bb(new bool[vb.size()]);
        for (std::size_t i = 0; i < va.size(); ++i) {
            ba[i] = va[i];
            bb[i] = vb[i];
        }
        const auto boot = paired_bootstrap(std::span<const bool>(ba.get(), va.size()),
                                           std::span<const bool>(bb.get(), vb.size()), config.resamples, config.seed,
                                           workers);
        r.significance.push_back({base_name, "paired_bootstrap", base->value, boot.p_value, boot.p_value < 0.05});
    }
    return r;
}

}  // namespace

EvalReport run_eval(const Workspace& ws, const RunConfig& config, unsigned workers,
                    const std::filesystem::path& predictions_out) {
    config.validate();
    if (config.datasets.empty()) throw UsageError("no dataset given");
    const auto task = parse_task(config.task);
    const std::string base_name = config.baselines.empty() ? "" : std::filesystem::path(config.baselines.front()).stem().string();
    const bool with_base = !config.baselines.empty();
    const auto redirects = config.redirects.empty() ? RedirectMap{} : load_redirect_map(config.redirects);

    std::vector<EvalReport> parts;
    RelColumns pooled_rel, pooled_rel_base;
    AccuracyResult pooled_acc, pooled_acc_base;
    std::size_t pooled_fallbacks = 0;

    for (std::size_t d = 0; d < config.datasets.size(); ++d) {
        const std::filesystem::path dataset = config.datasets[d];
        const auto name = dataset.stem().string();
        const auto prefix = std::to_string(d) + ":";
        if (task == TaskKind::Relatedness) {
            const auto pairs = load_relatedness_dataset(dataset);
            auto results = run_relatedness(ws, pairs, config, workers);
            if (!config.combine.empty()) results = combine_with(results, load_relatedness_predictions(config.combine[d]));
            if (const auto out = part_path(predictions_out, d, config.datasets.size()); !out.empty())
                write_relatedness_predictions(out, results);
            const auto sys = rel_columns(results);
            std::optional<RelColumns> base;
            if (with_base) base = rel_columns(load_relatedness_predictions(config.baselines[d]));
            parts.push_back(rel_report(name, sys, base, base_name, config));
            pooled_rel.gold.insert(pooled_rel.gold.end(), sys.gold.begin(), sys.gold.end());
            pooled_rel.pred.insert(pooled_rel.pred.end(), sys.pred.begin(), sys.pred.end());
            pooled_rel.skipped += sys.skipped;
            if (base) {
                pooled_rel_base.gold.insert(pooled_rel_base.gold.end(), base->gold.begin(), base->gold.end());
                pooled_rel_base.pred.insert(pooled_rel_base.pred.end(), base->pred.begin(), base->pred.end());
            }
        } else {
            const auto queries = load_ned_dataset(dataset);
            std::unique_ptr<HttpTitleResolver> http;
            std::unique_ptr<CachingTitleResolver> cache;
            if (!config.resolver_cache.empty()) {
                http = std::make_unique<HttpTitleResolver>(config.resolver_host, config.resolver_port);
                cache = std::make_unique<CachingTitleResolver>(*http, config.resolver_cache);
            }
            const auto preds = titled(run_ned(ws, queries, config, workers, cache.get()), ws.nodes());
            if (const auto out = part_path(predictions_out, d, config.datasets.size()); !out.empty())
                write_ned_predictions(out, preds);
            const auto gold = gold_map(queries);
            const auto sys = accuracy(preds, gold, redirects);
            std::size_t fallbacks = 0;
            for (const auto& p : preds) fallbacks += p.fallback_used;
            std::optional<AccuracyResult> base;
            if (with_base) base = accuracy(load_ned_predictions(config.baselines[d]), gold, redirects);
            parts.push_back(ned_report(name, sys, base, fallbacks, base_name, config, workers));
            for (std::size_t i = 0; i < sys.ids.size(); ++i) {
                pooled_acc.ids.push_back(prefix + sys.ids[i]);
                pooled_acc.hits.push_back(sys.hits[i]);
            }
            pooled_acc.n += sys.n;
            pooled_acc.correct += sys.correct;
            pooled_fallbacks += fallbacks;
            if (base) {
                for (std::size_t i = 0; i < base->ids.size(); ++i) {
                    pooled_acc_base.ids.push_back(prefix + base->ids[i]);
                    pooled_acc_base.hits.push_back(base->hits[i]);
                }
                pooled_acc_base.n += base->n;
                pooled_acc_base.correct += base->correct;
            }
        }
    }
    if (parts.size() == 1) return std::move(parts.front());

    std::string name = "pooled(";
    for (std::size_t i = 0; i < parts.size(); ++i) name += (i ? "+" : "") + parts[i].dataset;
    name += ")";
    EvalReport pooled;
    if (task == TaskKind::Relatedness) {
        std::optional<RelColumns> base;
        if (with_base) base = pooled_rel_base;
        pooled = rel_report(name, pooled_rel, base, base_name, config);
    } else {
        pooled_acc.value = static_cast<double>(pooled_acc.correct) / static_cast<double>(pooled_acc.n);
        pooled_acc_base.value =
            pooled_acc_base.n ? static_cast<double>(pooled_acc_base.correct) / static_cast<double>(pooled_acc_base.n) : 0.0;
        std::optional<AccuracyResult> base;
        if (with_base) base = pooled_acc_base;
        pooled = ned_report(name, pooled_acc, base, pooled_fallbacks, base_name, config, workers);
    }
    pooled.parts = std::move(parts);
    return pooled;
}

std::vector<RunConfig> SweepGrid::cells(const RunConfig& base) const {
    std::vector<RunConfig> out;
    for (const auto& g : graphs)
        for (double a : alphas)
            for (int i : iterations)
                for (std::size_t k : ks)
                    for (bool p : priors) {
                        RunConfig c = base;
                        c.graph = g;
                        c.alpha = a;
                        c.iterations = i;
                        c.k = k;
                        c.prior = p;
                        out.push_back(std::move(c));
                    }
    return out;
}

std::string cell_name(const RunConfig& cell) {
    std::ostringstream os;
    os << cell.graph << "_a" << cell.alpha << "_i" << cell.iterations << "_k" << cell.k << '_' << (cell.prior ? "P" : "nP");
    return os.str();
}

SweepSummary run_sweep(const SweepGrid& grid, const RunConfig& base, const std::filesystem::path& out_dir,
                       unsigned workers) {
    if (grid.size() == 0) throw UsageError("sweep grid is empty");
    const auto cells = grid.cells(base);
    for (const auto& c : cells) c.validate();
    const auto cell_dir = out_dir / "cells";
    std::filesystem::create_directories(cell_dir);

    std::vector<bool> done(cells.size());
    std::map<std::string, std::unique_ptr<Workspace>> spaces;
    const auto backend = base.dict_backend == "disk" ? DictionaryBackend::Disk : DictionaryBackend::Memory;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        done[i] = std::filesystem::exists(cell_dir / (cell_name(cells[i]) + ".done"));
        if (!done[i] && !spaces.contains(cells[i].graph))
            spaces[cells[i].graph] =
                std::make_unique<Workspace>(base.data_dir, GraphSpec::parse(cells[i].graph), backend, 1);
    }

    SweepSummary summary;
    summary.cells = cells.size();
    std::vector<nlohmann::json> reports(cells.size());
    parallel_for(cells.size(), workers, [&](std::size_t i) {
        const auto name = cell_name(cells[i]);
        const auto report_path = cell_dir / (name + ".json");
        if (done[i]) {
            reports[i] = nlohmann::json::parse(read_file(report_path));
            return;
        }
        const auto report = run_eval(*spaces.at(cells[i].graph), cells[i], 1);
        reports[i] = report.to_json();
        write_text(report_path, report.to_json().dump(2) + "\n");
        write_text(cell_dir / (name + ".done"), "");
    });
    for (bool d : done) (d ? summary.resumed : summary.computed) += 1;

    std::ostringstream csv;
    csv << "cell,graph,alpha,iterations,k,prior,metric,value,n\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        const auto& r = reports[i];
        csv << cell_name(c) << ',' << c.graph << ',' << c.alpha << ',' << c.iterations << ',' << c.k << ','
            << (c.prior ? "P" : "nP") << ',' << r.at("metric").get<std::string>() << ','
            << format_double(r.at("value").get<double>()) << ',' << r.at("n").get<std::size_t>() << '\n';
    }
    write_text(out_dir / "summary.csv", csv.str());
    return summary;
}

}  // namespace wikiwalk
