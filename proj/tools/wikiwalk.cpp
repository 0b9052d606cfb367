#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "wikiwalk/ingest.hpp"
#include "wikiwalk/runner.hpp"

using namespace wikiwalk;

namespace {

void emit_json(const nlohmann::ordered_json& j, const std::string& path) {
    const auto text = j.dump(2) + "\n";
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << text;
}

DictionaryBackend backend_of(const RunConfig& c) {
    return c.dict_backend == "disk" ? DictionaryBackend::Disk : DictionaryBackend::Memory;
}

bool rel_has_gold(const std::vector<std::string>& datasets) {
    for (const auto& d : datasets)
        for (const auto& p : load_relatedness_dataset(d))
            if (!p.gold) return false;
    return true;
}

bool ned_has_gold(const std::vector<std::string>& datasets) {
    for (const auto& d : datasets)
        for (const auto& q : load_ned_dataset(d))
            if (q.gold_article) return true;
    return false;
}

template <typename T>
std::vector<T> or_single(const std::vector<T>& v, T fallback) {
    return v.empty() ? std::vector<T>{fallback} : v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random walks over a Wikipedia link graph for relatedness and entity disambiguation"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key=value file; command-line flags take precedence");
    app.get_config_formatter_base()->arrayDelimiter(',');

    RunConfig cfg;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::string report, emit;

    app.add_option("--graph", cfg.graph, "Graph spec such as Hr or HrCuIu")->capture_default_str();
    app.add_option("--alpha", cfg.alpha, "Damping factor")->capture_default_str();
    app.add_option("--iters", cfg.iterations, "Power iterations")->capture_default_str();
    app.add_option("--k", cfg.k, "PPV entries kept for relatedness (0 keeps all)")->capture_default_str();
    app.add_flag("--prior,!--no-prior", cfg.prior, "Initialize the teleport vector with priors");
    app.add_option("--seed", cfg.seed, "Bootstrap seed")->capture_default_str();
    app.add_option("--resamples", cfg.resamples, "Bootstrap resamples")->capture_default_str();
    app.add_option("--data", cfg.data_dir, "Directory holding nodes.tsv and the snapshots");
    app.add_option("--dataset", cfg.datasets, "Dataset TSV (repeat to pool)");
    app.add_option("--baseline", cfg.baselines, "Cached baseline predictions, one per dataset");
    app.add_option("--redirects", cfg.redirects, "Redirect map applied to predicted and gold titles");
    app.add_option("--unknown", cfg.unknown, "Relatedness pairs with unknown terms: skip or zero")->capture_default_str();
    app.add_flag("--target-in-teleport,!--no-target-in-teleport", cfg.target_in_teleport,
                 "Include the target's candidates in the teleport vector");
    app.add_option("--dict-backend", cfg.dict_backend, "memory or disk")->capture_default_str();
    app.add_option("--resolver-cache", cfg.resolver_cache, "Enables the remote title resolver with this cache file");
    app.add_option("--resolver-host", cfg.resolver_host, "Remote title resolver host");
    app.add_option("--resolver-port", cfg.resolver_port, "Remote title resolver port")->capture_default_str();
    app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--report", report, "Write the JSON report here instead of stdout");
    app.add_option("--emit-predictions", emit, "Write per-query predictions TSV");

    auto* ingest = app.add_subcommand("ingest", "Turn page/link/anchor dumps into node, edge and count files");
    IngestOptions io;
    ingest->add_option("--pages", io.pages, "pages.tsv")->required();
    ingest->add_option("--links", io.links, "links.tsv")->required();
    ingest->add_option("--anchors", io.anchors, "anchors.tsv")->required();
    ingest->add_option("--out", io.out_dir, "Output directory")->required();
    ingest->add_option("--pseudo-count", io.pseudo_count, "Count added for title-derived mentions")->capture_default_str();

    auto* build = app.add_subcommand("build", "Build graph and dictionary snapshots");
    std::vector<std::string> build_specs;
    std::string build_out;
    build->add_option("--spec", build_specs, "Graph specs to build (default: --graph)");
    build->add_option("--out", build_out, "Snapshot directory (default: --data)");

    auto* rel = app.add_subcommand("rel", "Word relatedness");
    std::string dump_term;
    rel->add_option("--combine-with", cfg.combine, "Relatedness predictions to multiply with, one per dataset");
    rel->add_option("--dump-ppv", dump_term, "Print the truncated PPV of a term and exit");

    auto* ned = app.add_subcommand("ned", "Named entity disambiguation");
    auto* eval = app.add_subcommand("eval", "Evaluate a system on datasets with gold answers");
    std::string from_report;
    eval->add_option("--task", cfg.task, "rel or ned")->capture_default_str();
    eval->add_option("--from-report", from_report, "Rerun the configuration embedded in a report");
    for (auto* sub : {rel, ned, eval})
        sub->add_option("--system", cfg.system, "ppr, ngd, mfs or direct")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "Evaluate every cell of a parameter grid");
    SweepGrid grid;
    std::string sweep_out;
    sweep->add_option("--task", cfg.task, "rel or ned")->capture_default_str();
    sweep->add_option("--graphs", grid.graphs, "Graph specs")->delimiter(',');
    sweep->add_option("--alphas", grid.alphas, "Damping factors")->delimiter(',');
    sweep->add_option("--iters-grid", grid.iterations, "Iteration counts")->delimiter(',');
    sweep->add_option("--ks", grid.ks, "PPV sizes")->delimiter(',');
    sweep->add_option("--priors", grid.priors, "Prior settings, e.g. true,false")->delimiter(',');
    sweep->add_option("--out", sweep_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (ingest->parsed()) {
            const auto tally = run_ingest(io);
            std::cout << tally.to_json() << '\n';
            return 0;
        }
        if (!from_report.empty()) {
            std::ifstream in(from_report);
            if (!in) throw DataError("cannot open " + from_report);
            cfg = RunConfig::from_json(nlohmann::json::parse(in).at("config"));
        }
        if (cfg.data_dir.empty()) throw UsageError("--data is required");
        if (build->parsed()) {
            std::vector<GraphSpec> specs;
            for (const auto& s : or_single(build_specs, cfg.graph)) specs.push_back(GraphSpec::parse(s));
            const auto rows = build_snapshots(cfg.data_dir, specs, build_out.empty() ? cfg.data_dir : build_out);
            std::cout << format_stats_table(rows);
            for (const auto& r : rows)
                if (!r.paper_configuration) std::cerr << "note: " << r.spec << " uses a direction mode outside the studied set\n";
            return 0;
        }
        if (sweep->parsed()) {
            if (grid.graphs.empty()) grid.graphs = {cfg.graph};
            grid.alphas = or_single(grid.alphas, cfg.alpha);
            grid.iterations = or_single(grid.iterations, cfg.iterations);
            grid.ks = or_single(grid.ks, cfg.k);
            if (grid.priors.empty()) grid.priors = {cfg.prior};
            const auto summary = run_sweep(grid, cfg, sweep_out, workers);
            std::cout << "cells " << summary.cells << " computed " << summary.computed << " resumed " << summary.resumed
                      << '\n';
            return 0;
        }
        if (rel->parsed()) cfg.task = "rel";
        if (ned->parsed()) cfg.task = "ned";
        cfg.validate();
        const Workspace ws(cfg.data_dir, GraphSpec::parse(cfg.graph), backend_of(cfg), 1);

        if (!dump_term.empty()) {
            write_ppv_tsv(std::cout, term_ppv(dump_term, ws.engine(), ws.dictionary(), cfg.ppr()));
            return 0;
        }
        if (cfg.datasets.empty()) throw UsageError("--dataset is required");
        const bool is_rel = parse_task(cfg.task) == TaskKind::Relatedness;
        const bool scored = eval->parsed() || (is_rel ? rel_has_gold(cfg.datasets) : ned_has_gold(cfg.datasets));
        if (scored) {
            emit_json(run_eval(ws, cfg, workers, emit).to_json(), report);
            return 0;
        }
        if (emit.empty()) throw UsageError("datasets carry no gold answers; give --emit-predictions");
        if (cfg.datasets.size() != 1) throw UsageError("predictions without gold take a single dataset");
        if (is_rel) {
            auto results = run_relatedness(ws, load_relatedness_dataset(cfg.datasets[0]), cfg, workers);
            if (!cfg.combine.empty()) results = combine_with(results, load_relatedness_predictions(cfg.combine[0]));
            write_relatedness_predictions(emit, results);
        } else {
            std::unique_ptr<HttpTitleResolver> http;
            std::unique_ptr<CachingTitleResolver> cache;
            if (!cfg.resolver_cache.empty()) {
                http = std::make_unique<HttpTitleResolver>(cfg.resolver_host, cfg.resolver_port);
                cache = std::make_unique<CachingTitleResolver>(*http, cfg.resolver_cache);
            }
            const auto queries = load_ned_dataset(cfg.datasets[0]);
            write_ned_predictions(emit, titled(run_ned(ws, queries, cfg, workers, cache.get()), ws.nodes()));
        }
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
