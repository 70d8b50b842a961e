#include <gtest/gtest.h>

#include <sstream>

#include "cli_runner.hpp"
#include "fixture.hpp"
#include "oodkit/eval.hpp"
#include "oodkit/lof.hpp"
#include "oodkit/protocols.hpp"

using namespace oodkit;

namespace {

std::string fixture_args() {
    return "--embeddings " + quoted(fixture_dir() / "synthetic.oode") + " --manifest " +
           quoted(fixture_dir() / "synthetic_manifest.csv");
}

std::vector<double> score_column(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::vector<double> out;
    while (std::getline(in, line)) out.push_back(std::stod(line.substr(line.rfind(',') + 1)));
    return out;
}

}  // namespace

TEST(Cli, UsageErrorsExitNonZero) {
    TempDir dir;
    EXPECT_EQ(run_cli("", dir.path()).status, 2);
    EXPECT_EQ(run_cli("fit " + fixture_args() + " --k 0 --out " + quoted(dir / "m"), dir.path()).status, 2);
    EXPECT_EQ(run_cli("frobnicate", dir.path()).status, 2);
}

TEST(Cli, SplitIsDeterministicAndValidatesRatios) {
    TempDir dir;
    const auto manifest = quoted(fixture_dir() / "synthetic_manifest.csv");
    auto a = run_cli("split --manifest " + manifest + " --seed 7 --out " + quoted(dir / "a.csv"), dir.path());
    ASSERT_EQ(a.status, 0) << a.output;
    auto b = run_cli("split --manifest " + manifest + " --seed 7 --out " + quoted(dir / "b.csv"), dir.path());
    ASSERT_EQ(b.status, 0) << b.output;
    EXPECT_EQ(read_text(dir / "a.csv"), read_text(dir / "b.csv"));
    EXPECT_NE(a.output.find("class,source"), std::string::npos);
    auto bad = run_cli("split --manifest " + manifest + " --ratios 0.9,0.05,0.15 --out " + quoted(dir / "c.csv"),
                       dir.path());
    EXPECT_NE(bad.status, 0);
    EXPECT_FALSE(std::filesystem::exists(dir / "c.csv"));
}

TEST(Cli, EvalMatchesIndependentOracle) {
    TempDir dir;
    const auto& fx = synthetic_fixture();
    struct Case {
        std::string key, fit;
    };
    for (const Case& c : {Case{"ham/lof/cosine/10", "--detector lof --k 10"},
                          Case{"ham/lof/cosine/50", "--detector lof --k 50"}, Case{"ham/ssd", "--detector ssd"}}) {
        auto fit = run_cli("fit " + fixture_args() + " " + c.fit +
                               " --classes AK,BCC,BKL,MEL,NV,SCC --sources HAM --out " + quoted(dir / "model"),
                           dir.path());
        ASSERT_EQ(fit.status, 0) << fit.output;
        auto ev = run_cli("eval --model " + quoted(dir / "model") + " " + fixture_args() +
                              " --id-classes AK,BCC,BKL,MEL,NV,SCC --id-sources HAM"
                              " --ood-classes DF,VASC --ood-sources HAM --out " +
                              quoted(dir / "r.json"),
                          dir.path());
        ASSERT_EQ(ev.status, 0) << ev.output;
        auto report = report_from_json(read_text(dir / "r.json"));
        EXPECT_NEAR(report.auroc, fx.oracle.at(c.key).get<double>(), 1e-12) << c.key;
    }
}

TEST(Cli, FittedModelScoresLikeTheLibrary) {
    TempDir dir;
    const auto& fx = synthetic_fixture();
    ASSERT_EQ(run_cli("fit " + fixture_args() + " --k 20 --classes NV --sources BCN --out " + quoted(dir / "m.lofm"),
                      dir.path())
                  .status,
              0);
    auto sc = run_cli("score --model " + quoted(dir / "m.lofm") + " " + fixture_args() +
                          " --classes DF --out " + quoted(dir / "s.csv"),
                      dir.path());
    ASSERT_EQ(sc.status, 0) << sc.output;
    auto fit = filter_subset(fx.manifest, {{"NV"}, {"BCN"}, Split::train});
    auto model = fit_lof(fx.embeddings.select(fit.source_rows()), 20, Metric::cosine);
    auto df = filter_subset(fx.manifest, {{"DF"}, {}, std::nullopt});
    auto want = lof_score_batch(fx.embeddings.select(df.source_rows()), model);
    auto got = score_column(read_text(dir / "s.csv"));
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i], want[i]);
    EXPECT_EQ(load_lof(dir / "m.lofm"), model);
}

TEST(Cli, EmptySelectionAndLeakageFail) {
    TempDir dir;
    ASSERT_EQ(run_cli("fit " + fixture_args() + " --classes NV --out " + quoted(dir / "m"), dir.path()).status, 0);
    auto empty = run_cli("eval --model " + quoted(dir / "m") + " " + fixture_args() +
                             " --id-classes NOPE --ood-classes DF --out " + quoted(dir / "r.json"),
                         dir.path());
    EXPECT_EQ(empty.status, 1);
    EXPECT_FALSE(std::filesystem::exists(dir / "r.json"));
    auto leak = run_cli("eval --model " + quoted(dir / "m") + " " + fixture_args() +
                            " --id-classes NV --id-split train --ood-classes DF --out " + quoted(dir / "r.json"),
                        dir.path());
    EXPECT_EQ(leak.status, 1);
    EXPECT_NE(leak.output.find("fit set"), std::string::npos) << leak.output;
}

TEST(Cli, EveryProtocolSweepRunsWithoutMutatingInputs) {
    TempDir dir;
    const auto before_e = read_text(fixture_dir() / "synthetic.oode");
    const auto before_m = read_text(fixture_dir() / "synthetic_manifest.csv");
    for (const auto& name : protocol_names()) {
        auto r = run_cli("sweep " + fixture_args() + " --protocol " + name + " --ssd --out-dir " + quoted(dir / name),
                         dir.path());
        ASSERT_EQ(r.status, 0) << name << ": " << r.output;
        for (auto k : protocol_default_ks(name)) {
            EXPECT_TRUE(std::filesystem::exists(dir / name / (name + "_K" + std::to_string(k) + ".json"))) << name;
        }
        EXPECT_TRUE(std::filesystem::exists(dir / name / (name + "_table.csv")));
    }
    EXPECT_EQ(read_text(fixture_dir() / "synthetic.oode"), before_e);
    EXPECT_EQ(read_text(fixture_dir() / "synthetic_manifest.csv"), before_m);
}

TEST(Cli, ToyTrainWritesCurveAndParams) {
    TempDir dir;
    auto r = run_cli("toy-train --epochs 5 --out " + quoted(dir / "enc") + " --curve " + quoted(dir / "c.csv") +
                         " --embed-out " + quoted(dir / "z.oode"),
                     dir.path());
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_EQ(read_text(dir / "c.csv").substr(0, 16), "epoch,mean_loss\n");
    EXPECT_EQ(load_embeddings(dir / "z.oode", EmbeddingFormat::binary).cols(), 8u);
}

TEST(Cli, ReportCollectsTable) {
    TempDir dir;
    ASSERT_EQ(run_cli("sweep " + fixture_args() + " --protocol ham --ks 10,50 --out-dir " + quoted(dir / "s"),
                      dir.path())
                  .status,
              0);
    auto r = run_cli("report " + quoted(dir / "s" / "ham_K50.json") + " " + quoted(dir / "s" / "ham_K10.json") +
                         " --out " + quoted(dir / "t.csv"),
                     dir.path());
    ASSERT_EQ(r.status, 0) << r.output;
    auto table = read_text(dir / "t.csv");
    EXPECT_EQ(table.substr(0, table.find('\n')), "detector,ham");
    EXPECT_LT(table.find("K = 10"), table.find("K = 50"));
}
