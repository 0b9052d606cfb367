#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wikiwalk/dictionary.hpp"
#include "wikiwalk/eval.hpp"
#include "wikiwalk/graph.hpp"
#include "wikiwalk/ned.hpp"
#include "wikiwalk/ppr.hpp"
#include "wikiwalk/relatedness.hpp"

namespace wikiwalk {

enum class TaskKind { Relatedness, Ned };
enum class SystemKind { Ppr, Ngd, Mfs, DirectLinks };

TaskKind parse_task(const std::string& s);
SystemKind parse_system(const std::string& s);
std::string to_string(TaskKind t);
std::string to_string(SystemKind s);

/// Everything needed to reproduce a run. Defaults: graph Hr, 30 iterations,
/// alpha 0.85, prior initialization, k = 5000.
struct RunConfig {
    std::string graph = "Hr";
    double alpha = 0.85;
    int iterations = 30;
    std::size_t k = 5000;  // 0 disables truncation
    bool prior = true;
    std::uint64_t seed = kDefaultSeed;
    std::size_t resamples = kDefaultResamples;
    std::string task = "rel";
    std::string system = "ppr";
    std::string data_dir;
    std::vector<std::string> datasets;
    std::vector<std::string> baselines;  // cached predictions, one per dataset
    std::vector<std::string> combine;    // relatedness predictions multiplied in, one per dataset
    std::string redirects;
    std::string unknown = "skip";  // skip | zero
    bool target_in_teleport = true;
    std::string dict_backend = "memory";
    std::string resolver_cache;  // enables the remote title resolver when non-empty
    std::string resolver_host;
    int resolver_port = 80;

    void validate() const;
    PprParams ppr() const;
    nlohmann::ordered_json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
};

/// Snapshots loaded for one graph spec.
class Workspace {
public:
    static std::filesystem::path graph_snapshot(const std::filesystem::path& dir, const GraphSpec& spec);
    static std::filesystem::path dict_snapshot(const std::filesystem::path& dir);

    /// Throws DataError naming the missing snapshot when `wikiwalk build` has not been run.
    Workspace(const std::filesystem::path& dir, const GraphSpec& spec, DictionaryBackend backend, unsigned workers);

    const NodeTable& nodes() const { return nodes_; }
    const TypedGraph& graph() const { return graph_; }
    const Dictionary& dictionary() const { return dict_; }
    const PprEngine& engine() const { return *engine_; }
    const NgdIndex& ngd() const { return *ngd_; }

private:
    NodeTable nodes_;
    TypedGraph graph_;
    Dictionary dict_;
    std::unique_ptr<PprEngine> engine_;
    std::unique_ptr<NgdIndex> ngd_;
};

struct BuildResult {
    std::string spec;
    GraphStats stats;
    bool paper_configuration = true;
};

/// Writes graph.<spec>.gwkb for every spec and dict.gwdict from dict_counts.tsv.
std::vector<BuildResult> build_snapshots(const std::filesystem::path& data_dir, const std::vector<GraphSpec>& specs,
                                         const std::filesystem::path& out_dir);

/// Graph / Edges / Nodes / Non-isolated rows.
std::string format_stats_table(const std::vector<BuildResult>& rows);

// Relatedness ----------------------------------------------------------------

struct RelPair {
    std::string term1;
    std::string term2;
    std::optional<double> gold;
};

struct RelResult {
    RelPair pair;
    std::optional<double> predicted;  // nullopt when a term was unknown and skipped
    bool unknown = false;
};

/// term1 \t term2 [\t gold]; '#' lines and blank lines ignored. Throws DataError with the row number.
std::vector<RelPair> load_relatedness_dataset(const std::filesystem::path& path);

std::vector<RelResult> run_relatedness(const Workspace& ws, std::span<const RelPair> pairs, const RunConfig& config,
                                       unsigned workers = 1);

void write_relatedness_predictions(const std::filesystem::path& path, std::span<const RelResult> results);
std::vector<RelResult> load_relatedness_predictions(const std::filesystem::path& path);

/// Multiplies each predicted score by the score of the same pair in `other`; pairs missing there become unknown.
std::vector<RelResult> combine_with(std::span<const RelResult> results, std::span<const RelResult> other);

// NED ------------------------------------------------------------------------

/// query_id \t mention \t context_file [\t char_offset [\t gold_title]]; context
/// files resolve relative to the dataset's directory. Gold "NIL" or empty is NIL.
std::vector<NedQuery> load_ned_dataset(const std::filesystem::path& path);

/// Predictions are in query order whatever the worker count.
std::vector<NedPrediction> run_ned(const Workspace& ws, std::span<const NedQuery> queries, const RunConfig& config,
                                   unsigned workers = 1, TitleResolver* resolver = nullptr);

std::vector<TitledPrediction> titled(std::span<const NedPrediction> preds, const NodeTable& nodes);
void write_ned_predictions(const std::filesystem::path& path, std::span<const TitledPrediction> preds);
std::vector<TitledPrediction> load_ned_predictions(const std::filesystem::path& path);
GoldMap gold_map(std::span<const NedQuery> queries);

// Reports --------------------------------------------------------------------

struct SignificanceResult {
    std::string baseline;
    std::string test;  // fisher_z | paired_bootstrap
    double baseline_value = 0.0;
    double p_value = 1.0;
    bool significant = false;  // p < 0.05
};

struct EvalReport {
    std::string dataset;
    std::string metric;  // spearman | accuracy
    double value = 0.0;
    std::size_t n = 0;
    std::size_t skipped = 0;    // relatedness pairs with unknown terms
    std::size_t fallbacks = 0;  // NED queries answered without context
    RunConfig config;
    std::vector<SignificanceResult> significance;
    std::vector<EvalReport> parts;  // per-dataset reports when pooled

    nlohmann::ordered_json to_json() const;
};

/// Runs the configured system over every dataset in `config.datasets`. With
/// several datasets the result is pooled by concatenation and the per-dataset
/// reports go in `parts`. Significance against `config.baselines` is computed
/// on the same pooled instances.
EvalReport run_eval(const Workspace& ws, const RunConfig& config, unsigned workers = 1,
                    const std::filesystem::path& predictions_out = {});

// Sweep ----------------------------------------------------------------------

struct SweepGrid {
    std::vector<std::string> graphs;
    std::vector<double> alphas;
    std::vector<int> iterations;
    std::vector<std::size_t> ks;
    std::vector<bool> priors;

    std::size_t size() const { return graphs.size() * alphas.size() * iterations.size() * ks.size() * priors.size(); }
    /// Row-major over graphs, alphas, iterations, ks, priors.
    std::vector<RunConfig> cells(const RunConfig& base) const;
};

std::string cell_name(const RunConfig& cell);

struct SweepSummary {
    std::size_t cells = 0;
    std::size_t computed = 0;
    std::size_t resumed = 0;
};

/// One report per cell under out_dir/cells, a `.done` marker after each, and
/// out_dir/summary.csv. Cells with a marker are read back instead of rerun.
SweepSummary run_sweep(const SweepGrid& grid, const RunConfig& base, const std::filesystem::path& out_dir,
                       unsigned workers);

}  // namespace wikiwalk
