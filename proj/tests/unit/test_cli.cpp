#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <json.hpp>

#include "support/fixtures.hpp"

using namespace wikiwalk;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result run(const std::string& args) {
    const std::string cmd = std::string(WIKIWALK_CLI_PATH) + " " + args + " 2>/dev/null";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    char buf[4096];
    std::size_t got = 0;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

struct CliWorld {
    fixtures::TempDir dir;
    CliWorld() {
        fixtures::write_lions_inputs(dir.path());
        fixtures::write_file(dir / "doc1.txt", fixtures::kLionsSentence);
        fixtures::write_file(dir / "ned.tsv", "q1\tLions\tdoc1.txt\t22\tHighveld_Lions\n"
                                              "q2\tFletcher\tdoc1.txt\t\tDuncan_Fletcher\n"
                                              "q3\tCape Town\tdoc1.txt\t\tCape_Town\n"
                                              "q4\tPumas\tdoc1.txt\t\tNIL\n");
        fixtures::write_file(dir / "rel.tsv", "alan kourie\thighveld lions\t8\n"
                                              "alan kourie\tb&i lions\t2\n"
                                              "cape town\thighveld lions\t6\n"
                                              "fletcher\tengland\t5\n"
                                              "lions\tgauteng\t4\n"
                                              "lions\tspringboks\t3\n");
    }
    std::string data() const { return "--data " + q(dir.path()); }
};

CliWorld& world() {
    static CliWorld w;
    static bool ready = false;
    if (!ready) {
        const auto ingest = run("ingest --pages " + q(w.dir / "pages.tsv") + " --links " + q(w.dir / "links.tsv") +
                                " --anchors " + q(w.dir / "anchors.tsv") + " --out " + q(w.dir.path()));
        REQUIRE(ingest.code == 0);
        const auto build = run("build " + w.data() + " --spec Hr --spec Hd --spec HrCuIu");
        REQUIRE(build.code == 0);
        ready = true;
    }
    return w;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and usage errors") {
    CHECK(run("--help").code == 0);
    CHECK(run("").code == 1);
    CHECK(run("frobnicate").code == 1);
    CHECK(run("rel --alpha").code == 1);
}

TEST_CASE("build prints the stats table and is reproducible") {
    auto& w = world();
    const auto out = run("build " + w.data() + " --spec Hr --out " + q(w.dir / "again"));
    REQUIRE(out.code == 0);
    CHECK(out.out.rfind("Graph\tEdges\tNodes\tNonIsolated\n", 0) == 0);
    INFO(out.out);
    CHECK(out.out.find("Hr\t28\t12\t11\n") != std::string::npos);
    CHECK(fixtures::read_file(w.dir / "graph.Hr.gwkb") == fixtures::read_file(w.dir / "again" / "graph.Hr.gwkb"));
    CHECK(fixtures::read_file(w.dir / "dict.gwdict") == fixtures::read_file(w.dir / "again" / "dict.gwdict"));
    CHECK(run("build " + w.data() + " --spec Q").code == 1);
    CHECK(run("build --data " + q(w.dir / "nowhere")).code == 2);
}

TEST_CASE("missing snapshots are data errors") {
    auto& w = world();
    CHECK(run("ned " + w.data() + " --graph Hu --dataset " + q(w.dir / "ned.tsv")).code == 2);
}

TEST_CASE("ned report and predictions") {
    auto& w = world();
    const auto preds = w.dir / "ned.pred.tsv";
    const auto r = run("ned " + w.data() + " --dataset " + q(w.dir / "ned.tsv") + " --emit-predictions " + q(preds) +
                       " --workers 2");
    REQUIRE(r.code == 0);
    const auto report = nlohmann::json::parse(r.out);
    CHECK(report.at("metric") == "accuracy");
    CHECK(report.at("n") == 3);
    CHECK(report.at("value") == doctest::Approx(2.0 / 3.0));
    const auto& cfg = report.at("config");
    CHECK(cfg.at("graph") == "Hr");
    CHECK(cfg.at("iters") == 30);
    CHECK(cfg.at("alpha") == 0.85);
    CHECK(cfg.at("k") == 5000);
    CHECK(cfg.at("prior") == true);
    const auto lines = fixtures::read_file(preds);
    CHECK(lines.rfind("q1\tHighveld_Lions\t", 0) == 0);
    CHECK(lines.find("q4\tNIL\t0\t0\n") != std::string::npos);

    const auto np = run("ned " + w.data() + " --no-prior --dataset " + q(w.dir / "ned.tsv"));
    REQUIRE(np.code == 0);
    CHECK(nlohmann::json::parse(np.out).at("config").at("prior") == false);

    const auto base = run("ned " + w.data() + " --system mfs --dataset " + q(w.dir / "ned.tsv") +
                          " --emit-predictions " + q(w.dir / "mfs.tsv"));
    REQUIRE(base.code == 0);
    const auto sig = run("ned " + w.data() + " --dataset " + q(w.dir / "ned.tsv") + " --baseline " + q(w.dir / "mfs.tsv"));
    REQUIRE(sig.code == 0);
    const auto s = nlohmann::json::parse(sig.out).at("significance").at(0);
    CHECK(s.at("test") == "paired_bootstrap");
    CHECK(s.at("seed") == kDefaultSeed);
    CHECK(s.at("resamples") == kDefaultResamples);
}

TEST_CASE("relatedness report, unknown terms and combination") {
    auto& w = world();
    const auto preds = w.dir / "rel.pred.tsv";
    const auto r = run("rel " + w.data() + " --dataset " + q(w.dir / "rel.tsv") + " --emit-predictions " + q(preds));
    REQUIRE(r.code == 0);
    const auto report = nlohmann::json::parse(r.out);
    CHECK(report.at("metric") == "spearman");
    CHECK(report.at("n") == 5);
    CHECK(report.at("skipped") == 1);
    CHECK(fixtures::read_file(preds).find("lions\tspringboks\t3\tNA\n") != std::string::npos);

    const auto zero = run("rel " + w.data() + " --unknown zero --dataset " + q(w.dir / "rel.tsv"));
    REQUIRE(zero.code == 0);
    CHECK(nlohmann::json::parse(zero.out).at("n") == 6);

    const auto ngd = w.dir / "rel.ngd.tsv";
    REQUIRE(run("rel " + w.data() + " --system ngd --dataset " + q(w.dir / "rel.tsv") + " --emit-predictions " + q(ngd))
                .code == 0);
    const auto combined = run("rel " + w.data() + " --dataset " + q(w.dir / "rel.tsv") + " --combine-with " + q(ngd));
    REQUIRE(combined.code == 0);
    CHECK(nlohmann::json::parse(combined.out).at("config").at("combine_with").size() == 1);

    const auto dump = run("rel " + w.data() + " --k 3 --dump-ppv lions");
    REQUIRE(dump.code == 0);
    CHECK(std::count(dump.out.begin(), dump.out.end(), '\n') == 3);
    CHECK(run("rel " + w.data() + " --dump-ppv springboks").code == 2);
    CHECK(run("rel " + w.data() + " --system mfs --dataset " + q(w.dir / "rel.tsv")).code == 1);
}

TEST_CASE("config file precedence and replay from a report") {
    auto& w = world();
    fixtures::write_file(w.dir / "run.ini", "alpha=0.9\niters=12\ngraph=HrCuIu\n");
    const auto from_cfg = run("rel " + w.data() + " --config " + q(w.dir / "run.ini") + " --dataset " + q(w.dir / "rel.tsv"));
    REQUIRE(from_cfg.code == 0);
    const auto cfg = nlohmann::json::parse(from_cfg.out).at("config");
    CHECK(cfg.at("alpha") == 0.9);
    CHECK(cfg.at("iters") == 12);
    CHECK(cfg.at("graph") == "HrCuIu");

    const auto flag = run("rel " + w.data() + " --config " + q(w.dir / "run.ini") + " --alpha 0.8 --dataset " +
                          q(w.dir / "rel.tsv") + " --report " + q(w.dir / "report.json"));
    REQUIRE(flag.code == 0);
    const auto report_text = fixtures::read_file(w.dir / "report.json");
    CHECK(nlohmann::json::parse(report_text).at("config").at("alpha") == 0.8);
    CHECK(nlohmann::json::parse(report_text).at("config").at("iters") == 12);

    const auto replay = run("eval --from-report " + q(w.dir / "report.json"));
    REQUIRE(replay.code == 0);
    CHECK(replay.out == report_text);

    fixtures::write_file(w.dir / "bad.ini", "alpha=1.5\n");
    CHECK(run("rel " + w.data() + " --config " + q(w.dir / "bad.ini") + " --dataset " + q(w.dir / "rel.tsv")).code == 1);
}

TEST_CASE("sweep writes one report per cell and resumes") {
    auto& w = world();
    const auto out = w.dir / "sweep";
    const auto args = "sweep " + w.data() + " --task rel --dataset " + q(w.dir / "rel.tsv") +
                      " --graphs Hr,Hd --alphas 0.8,0.85 --iters-grid 5,30 --out " + q(out) + " --workers 2";
    const auto first = run(args);
    REQUIRE(first.code == 0);
    CHECK(first.out == "cells 8 computed 8 resumed 0\n");
    std::size_t reports = 0;
    for (const auto& e : std::filesystem::directory_iterator(out / "cells")) reports += e.path().extension() == ".json";
    CHECK(reports == 8);
    const auto summary = fixtures::read_file(out / "summary.csv");
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 9);
    const auto cell = nlohmann::json::parse(fixtures::read_file(out / "cells" / "Hd_a0.8_i5_k5000_P.json"));
    CHECK(cell.at("config").at("graph") == "Hd");
    CHECK(cell.at("config").at("alpha") == 0.8);
    CHECK(cell.at("config").at("iters") == 5);

    std::filesystem::remove(out / "cells" / "Hr_a0.85_i30_k5000_P.done");
    const auto second = run(args);
    REQUIRE(second.code == 0);
    CHECK(second.out == "cells 8 computed 1 resumed 7\n");
    CHECK(fixtures::read_file(out / "summary.csv") == summary);

    CHECK_THROWS_AS(run_sweep(SweepGrid{}, RunConfig{}, out, 1), UsageError);
}

}
