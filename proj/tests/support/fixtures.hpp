// Shared fixtures and independent oracles for the unit and acceptance tests.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wikiwalk/graph.hpp"
#include "wikiwalk/ingest.hpp"
#include "wikiwalk/ppr.hpp"
#include "wikiwalk/runner.hpp"

namespace fixtures {

using namespace wikiwalk;

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("wikiwalk-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Random directed arc set over n nodes; some nodes are left without out-arcs.
inline std::vector<Arc> random_arcs(std::mt19937_64& rng, std::size_t n, double density, double dangling_share) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Arc> arcs;
    for (NodeId a = 0; a < n; ++a) {
        if (u(rng) < dangling_share) continue;
        for (NodeId b = 0; b < n; ++b)
            if (a != b && u(rng) < density) arcs.emplace_back(a, b);
    }
    return arcs;
}

inline TypedGraph graph_of(std::size_t n, const std::vector<Arc>& arcs, const std::string& spec = "Hd") {
    return TypedGraph::from_arcs(std::vector<NodeKind>(n, NodeKind::Article), arcs, GraphSpec::parse(spec));
}

inline std::set<Arc> arc_set(const TypedGraph& g) {
    const auto a = g.arcs();
    return {a.begin(), a.end()};
}

// Dense power iteration on the explicit Google matrix: dangling rows are
// replaced by the teleport distribution, then p <- (1-a) v + a P^T p.
inline Eigen::VectorXd dense_ppr_oracle(std::size_t n, const std::vector<Arc>& arcs, const Eigen::VectorXd& v,
                                        double alpha, int iterations) {
    Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (const auto& [a, b] : arcs) adj(a, b) = 1.0;
    Eigen::MatrixXd P(adj.rows(), adj.cols());
    for (Eigen::Index r = 0; r < adj.rows(); ++r) {
        const double deg = adj.row(r).sum();
        if (deg > 0)
            P.row(r) = adj.row(r) / deg;
        else
            P.row(r) = v.transpose();
    }
    Eigen::VectorXd p = v;
    for (int i = 0; i < iterations; ++i) p = (1.0 - alpha) * v + alpha * P.transpose() * p;
    return p;
}

inline ScoreVector sparse_of(const Eigen::VectorXd& v) {
    ScoreVector s(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v[i] != 0.0) s.insertBack(i) = v[i];
    return s;
}

// Hand-built graph around "Alan Kourie, CEO of the Lions franchise, had
// discussions with Fletcher in Cape Town". B&I_Lions links directly to two
// context candidates (Darrel_Fletcher, Cape_Town), Highveld_Lions to one, but
// Highveld_Lions sits next to the cricket articles that connect it to
// Alan_Kourie and Duncan_Fletcher.
inline const char* kLionsPages =
    "page_id\ttitle\tkind\tredirect_target\n"
    "10\tB&I_Lions\tarticle\n"
    "11\tHighveld_Lions\tarticle\n"
    "12\tDarrel_Fletcher\tarticle\n"
    "13\tDuncan_Fletcher\tarticle\n"
    "14\tAlan_Kourie\tarticle\n"
    "15\tCape_Town\tarticle\n"
    "16\tTransvaal_cricket_team\tarticle\n"
    "17\tWanderers_Stadium\tarticle\n"
    "18\tNewlands_Cricket_Ground\tarticle\n"
    "19\tGauteng\tarticle\n"
    "20\tEngland\tarticle\n"
    "30\tTransvaal_Cricket\tredirect\tTransvaal_cricket_team\n"
    "31\tLions_(disambiguation)\tdisambiguation\n"
    "40\tCricket_in_South_Africa\tcategory\n";

inline const char* kLionsLinks =
    "src_title\tdst_title\tkind\n"
    "B&I_Lions\tCape_Town\tH\nCape_Town\tB&I_Lions\tH\n"
    "B&I_Lions\tDarrel_Fletcher\tH\nDarrel_Fletcher\tB&I_Lions\tH\n"
    "Highveld_Lions\tCape_Town\tH\nCape_Town\tHighveld_Lions\tH\n"
    "Alan_Kourie\tTransvaal_Cricket\tH\nTransvaal_cricket_team\tAlan_Kourie\tH\n"
    "Cape_Town\tNewlands_Cricket_Ground\tH\nNewlands_Cricket_Ground\tCape_Town\tH\n"
    "Darrel_Fletcher\tAlan_Kourie\tH\nAlan_Kourie\tDarrel_Fletcher\tH\n"
    "Darrel_Fletcher\tGauteng\tH\nGauteng\tDarrel_Fletcher\tH\n"
    "Darrel_Fletcher\tEngland\tH\nEngland\tDarrel_Fletcher\tH\n"
    "Duncan_Fletcher\tEngland\tH\nEngland\tDuncan_Fletcher\tH\n"
    "Highveld_Lions\tTransvaal_cricket_team\tH\nTransvaal_Cricket\tHighveld_Lions\tH\n"
    "Highveld_Lions\tWanderers_Stadium\tH\nWanderers_Stadium\tHighveld_Lions\tH\n"
    "Highveld_Lions\tNewlands_Cricket_Ground\tH\nNewlands_Cricket_Ground\tHighveld_Lions\tH\n"
    "Highveld_Lions\tGauteng\tH\nGauteng\tHighveld_Lions\tH\n"
    "Highveld_Lions\tEngland\tH\nEngland\tHighveld_Lions\tH\n"
    "Wanderers_Stadium\tGauteng\tH\n"
    "Lions_(disambiguation)\tB&I_Lions\tH\n"
    "Lions_(disambiguation)\tHighveld_Lions\tH\n"
    "Highveld_Lions\tCricket_in_South_Africa\tC\n"
    "Alan_Kourie\tCricket_in_South_Africa\tC\n"
    "Highveld_Lions\tAlan_Kourie\tI\n";

inline const char* kLionsAnchors =
    "anchor_text\tdst_title\tcount\n"
    "Lions\tB&I_Lions\t5\n"
    "Lions\tHighveld_Lions\t3\n"
    "lions\tLions_(disambiguation)\t1\n"
    "Fletcher\tDarrel_Fletcher\t5\n"
    "Fletcher\tDuncan_Fletcher\t5\n"
    "Kourie\tAlan_Kourie\t2\n"
    "Cape Town\tCape_Town\t7\n";

inline const char* kLionsSentence = "Alan Kourie CEO of the Lions franchise had discussions with Fletcher in Cape Town";

inline void write_lions_inputs(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "pages.tsv", kLionsPages);
    write_file(dir / "links.tsv", kLionsLinks);
    write_file(dir / "anchors.tsv", kLionsAnchors);
}

// Ingests the fixture into `dir` and builds the given graph snapshots there.
inline void prepare_lions_workspace(const std::filesystem::path& dir, const std::vector<std::string>& specs = {"Hr"}) {
    write_lions_inputs(dir);
    IngestOptions io;
    io.pages = dir / "pages.tsv";
    io.links = dir / "links.tsv";
    io.anchors = dir / "anchors.tsv";
    io.out_dir = dir;
    run_ingest(io);
    std::vector<GraphSpec> parsed;
    for (const auto& s : specs) parsed.push_back(GraphSpec::parse(s));
    build_snapshots(dir, parsed, dir);
}

}  // namespace fixtures
