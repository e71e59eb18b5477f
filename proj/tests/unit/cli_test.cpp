#include <gtest/gtest.h>

#include <fstream>
#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "route/cli.hpp"
#include "route/util.hpp"

using namespace route;
using route::testing::mini_corpus_dir;
using route::testing::scratch_dir;
using route::testing::script_path;

namespace {

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "route");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::vector<std::string> synth_args(const std::filesystem::path& out) {
    return {"synth",    "--corpus", mini_corpus_dir().string(), "--mock-script", script_path("synth_filter.jsonl").string(),
            "--sl-cap", "10",       "--nc-cap",                 "10",            "--cw-cap",
            "10",       "--seed",   "7",                        "-o",            out.string()};
}

std::size_t line_count(const std::filesystem::path& p) {
    auto text = read_file(p);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST(Cli, SynthManifestAndRerunIdentity) {
    auto dir = scratch_dir("cli_synth");
    ASSERT_EQ(run(synth_args(dir / "a")), 0);
    ASSERT_EQ(run(synth_args(dir / "b")), 0);
    auto m = nlohmann::json::parse(read_file(dir / "a" / "manifest.json"));
    EXPECT_EQ(m["kept"], 18);
    EXPECT_EQ(m["removed"], nlohmann::json::array({"0", "8"}));
    EXPECT_EQ(m["TS"], 18);
    EXPECT_EQ(m["SL"], 10);
    EXPECT_EQ(m["NC"], 10);
    EXPECT_EQ(m["CW"], 10);
    EXPECT_EQ(m["total"], 48);
    EXPECT_EQ(line_count(dir / "a" / "msft.jsonl"), 48u);
    EXPECT_EQ(read_file(dir / "a" / "msft.jsonl"), read_file(dir / "b" / "msft.jsonl"));
    EXPECT_EQ(read_file(dir / "a" / "manifest.json"), read_file(dir / "b" / "manifest.json"));
    auto meta = nlohmann::json::parse(read_file(dir / "a" / "msft.jsonl.meta.json"));
    EXPECT_EQ(meta["records"], 48);
    EXPECT_EQ(meta["config_sha256"], m["provenance"]["config_sha256"]);
}

TEST(Cli, InferResumeMatchesUninterruptedRun) {
    auto dir = scratch_dir("cli_infer");
    const std::string corpus = mini_corpus_dir().string();
    ASSERT_EQ(run({"infer", "--corpus", corpus, "--echo-gold", "-o", (dir / "full").string()}), 0);

    const auto part = (dir / "part").string();
    EXPECT_EQ(run({"infer", "--corpus", corpus, "--echo-gold", "-o", part, "--max-pairs", "7"}), 3);
    EXPECT_EQ(line_count(dir / "part" / "predictions.jsonl"), 7u);
    // simulate a crash mid-write
    {
        std::ofstream j(dir / "part" / "infer.journal.jsonl", std::ios::app);
        j << "{\"pair_id\":\"19\",\"db_";
    }
    EXPECT_EQ(run({"infer", "--corpus", corpus, "--echo-gold", "-o", part, "--resume"}), 0);
    EXPECT_EQ(read_file(dir / "part" / "predictions.jsonl"), read_file(dir / "full" / "predictions.jsonl"));
    EXPECT_EQ(read_file(dir / "part" / "traces.jsonl"), read_file(dir / "full" / "traces.jsonl"));
}

TEST(Cli, EvalWritesReports) {
    auto dir = scratch_dir("cli_eval");
    const std::string corpus = mini_corpus_dir().string();
    ASSERT_EQ(run({"infer", "--corpus", corpus, "--echo-gold", "--oracle-schema", "-o", dir.string()}), 0);
    ASSERT_EQ(run({"eval", "--corpus", corpus, "-o", dir.string(), "--predictions", (dir / "predictions.jsonl").string(),
                   "--traces", (dir / "traces.jsonl").string()}),
              0);
    auto ex = nlohmann::json::parse(read_file(dir / "ex_report.json"));
    EXPECT_EQ(ex["ex_overall"], 1.0);
    auto link = nlohmann::json::parse(read_file(dir / "linking_report.json"));
    EXPECT_EQ(link["tables"]["recall"], 1.0);
    EXPECT_EQ(link["columns"]["precision"], 1.0);
}

TEST(Cli, ConfigFileAndFlags) {
    auto dir = scratch_dir("cli_config");
    write_file_atomic(dir / "cfg.json", nlohmann::json{{"corpus", mini_corpus_dir().string()},
                                                       {"synth", {{"filter", false}, {"mine_negatives", false},
                                                                  {"caps", {{"sl", 3}, {"nc", 4}, {"cw", 5}}}}}}
                                            .dump());
    ASSERT_EQ(run({"synth", "-c", (dir / "cfg.json").string(), "-o", dir.string(), "--cw-cap", "2"}), 0);
    auto m = nlohmann::json::parse(read_file(dir / "manifest.json"));
    EXPECT_EQ(m["kept"], 20);
    EXPECT_EQ(m["SL"], 3);
    EXPECT_EQ(m["NC"], 4);
    EXPECT_EQ(m["CW"], 2);
    EXPECT_EQ(m["negatives"]["mined"], 0);
}

TEST(Cli, UsageErrors) {
    const std::string corpus = mini_corpus_dir().string();
    EXPECT_EQ(run({}), 2);
    EXPECT_EQ(run({"infer", "--corpus", corpus, "--echo-gold", "--mock-script", "x.jsonl"}), 2);
    EXPECT_EQ(run({"infer", "--corpus", corpus, "-o", scratch_dir("cli_nobackend").string()}), 2);
    EXPECT_EQ(run({"filter", "--echo-gold"}), 2);
    EXPECT_EQ(run({"infer", "--corpus", corpus, "--echo-gold", "--strategy", "sideways"}), 2);
    EXPECT_EQ(run({"--help"}), 0);
}

TEST(Cli, ExecExitCodes) {
    auto db = (mini_corpus_dir() / "database" / "social" / "social.sqlite").string();
    EXPECT_EQ(run({"exec", "--db", db, "--sql", "SELECT count(*) FROM follows"}), 0);
    EXPECT_EQ(run({"exec", "--db", db, "--sql", "DELETE FROM follows"}), 1);
    EXPECT_EQ(run({"exec", "--db", db, "--sql", "  "}), 1);
}

TEST(RunConfig, HashIgnoresOutputAndTracksSubstance) {
    RunConfig a;
    a.corpus = "c";
    RunConfig b = a;
    b.out_dir = "elsewhere";
    EXPECT_EQ(a.sha256(), b.sha256());
    b.seed = 1;
    EXPECT_NE(a.sha256(), b.sha256());
    RunConfig c = a;
    apply_config_json(c, nlohmann::json::parse(a.to_json().dump()));
    EXPECT_EQ(c.sha256(), a.sha256());
    EXPECT_THROW(apply_config_json(c, nlohmann::json::parse("{\"workers\": \"many\"}")), std::invalid_argument);
}
