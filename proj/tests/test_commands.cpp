#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "alp/commands.hpp"
#include "alp/io.hpp"

using namespace alp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("alp_test_commands_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

CommandOptions quick(const fs::path& out, std::vector<std::string> extra = {}) {
    CommandOptions o;
    o.overrides = {"train.steps=4", "train.batch_tasks=32", "eval.n_tasks=40", "eval.n_samples=8",
                   "eval.sweep_tasks=20", "eval.sweep_samples=4"};
    o.overrides.insert(o.overrides.end(), extra.begin(), extra.end());
    o.out_dir = out.string();
    return o;
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ALP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("train writes checkpoint, log and manifest") {
    const fs::path dir = scratch("train");
    std::ostringstream log;
    REQUIRE(cmd_train(quick(dir), log) == kExitOk);
    for (const char* f : {"checkpoint.json", "train_log.csv", "manifest.json", "config.json"})
        CHECK(fs::exists(dir / f));
    const json m = read_json(dir / "manifest.json");
    CHECK(m["status"] == "complete");
    CHECK(m["seed"] == 42);
    CHECK(m["artifacts"].contains("checkpoint"));
    CHECK(m["timings"].contains("wall_seconds"));
    std::istringstream csv(read_file(dir / "train_log.csv"));
    std::string line;
    int lines = 0;
    std::getline(csv, line);
    CHECK(line == kTrainLogHeader);
    while (std::getline(csv, line)) ++lines;
    CHECK(lines == 4);
    CHECK_FALSE(read_json(dir / "config.json").contains("workers"));

    const fs::path again = scratch("train_again");
    REQUIRE(cmd_train(quick(again), log) == kExitOk);
    CHECK(read_file(dir / "train_log.csv") == read_file(again / "train_log.csv"));
    CHECK(read_file(dir / "checkpoint.json") == read_file(again / "checkpoint.json"));
}

TEST_CASE("train config errors name the key") {
    const fs::path dir = scratch("train_bad");
    std::ostringstream log;
    CHECK(cmd_train(quick(dir, {"train.steps=0"}), log) == kExitUsage);
    CHECK(log.str().find("train.steps") != std::string::npos);
    std::ostringstream log2;
    CHECK(cmd_train(quick(dir, {"train.stepz=3"}), log2) == kExitUsage);
    CHECK(log2.str().find("train.stepz") != std::string::npos);
}

TEST_CASE("intermediate checkpoints") {
    const fs::path dir = scratch("train_ckpt");
    std::ostringstream log;
    REQUIRE(cmd_train(quick(dir, {"train.checkpoint_every=2"}), log) == kExitOk);
    CHECK(fs::exists(dir / "checkpoints" / "step_000002.json"));
    CHECK(load_checkpoint(dir / "checkpoints" / "step_000002.json").params.bins == kDefaultBins);
}

TEST_CASE("non-finite training fails with a non-zero exit") {
    const fs::path dir = scratch("train_nan");
    std::ostringstream log;
    CHECK(cmd_train(quick(dir, {"objective.beta=1e308"}), log) == kExitFailure);
    CHECK(log.str().find("step") != std::string::npos);
    CHECK(read_json(dir / "manifest.json")["status"] == "failed");
}

TEST_CASE("eval and sweep on a trained checkpoint") {
    const fs::path train = scratch("eval_train");
    std::ostringstream log;
    REQUIRE(cmd_train(quick(train), log) == kExitOk);
    const std::string ckpt = (train / "checkpoint.json").string();

    const fs::path ev = scratch("eval");
    REQUIRE(cmd_eval(ckpt, quick(ev), log) == kExitOk);
    const json metrics = read_json(ev / "metrics.json");
    CHECK(metrics["n_problems"] == 40);
    const auto& pts = metrics["pareto_points"];
    CHECK(pts.front()[0] == 0.0);
    CHECK(pts.front()[1] == 0.0);
    CHECK(pts.back()[0] == 1.0);
    CHECK(pts.back()[1].get<double>() == doctest::Approx(1.0));
    for (const char* f : {"pareto.csv", "buckets.csv", "problems.csv", "manifest.json"})
        CHECK(fs::exists(ev / f));

    const fs::path one = scratch("eval_one");
    REQUIRE(cmd_eval(ckpt, quick(one, {"eval.n_samples=1"}), log) == kExitOk);
    std::istringstream rows(read_file(one / "problems.csv"));
    std::string line;
    std::getline(rows, line);
    while (std::getline(rows, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 7);
        CHECK((cells[4] == "0" || cells[4] == "1"));
    }

    const fs::path mismatch = scratch("eval_mismatch");
    std::ostringstream mlog;
    CHECK(cmd_eval(ckpt, quick(mismatch, {"policy.bins=[32,64]"}), mlog) == kExitUsage);
    CHECK(mlog.str().find("policy.bins") != std::string::npos);
    CHECK(cmd_eval((train / "nope.json").string(), quick(mismatch), mlog) != kExitOk);

    const fs::path sw = scratch("sweep");
    REQUIRE(cmd_sweep(ckpt, std::string("0,0.3,0.6"), quick(sw), log) == kExitOk);
    std::istringstream sweep(read_file(sw / "sweep.csv"));
    int n = 0;
    std::getline(sweep, line);
    CHECK(line == kSweepHeader);
    while (std::getline(sweep, line)) ++n;
    CHECK(n == 3);

    const fs::path swd = scratch("sweep_default");
    REQUIRE(cmd_sweep(ckpt, std::nullopt, quick(swd), log) == kExitOk);
    CHECK(read_file(swd / "sweep.csv").find("0.45,") != std::string::npos);

    CHECK(cmd_sweep(ckpt, std::string(""), quick(sw), log) == kExitUsage);
    CHECK(cmd_sweep(ckpt, std::string("0,1.2"), quick(sw), log) == kExitUsage);
}

TEST_CASE("uniform policy on a flat-difficulty env has no adaptation") {
    // solve probability ignores difficulty here
    const fs::path dir = scratch("flat");
    FrozenPolicy uniform{PolicyParams::zeros(), std::nullopt};
    save_checkpoint(dir / "uniform.json", uniform, 0);
    CommandOptions o = quick(dir / "out", {"env.feature_noise_sd=0", "eval.n_tasks=400",
                                           "eval.n_samples=64", "env.mixture_hard_fraction=1",
                                           "env.length_scale_rate=0", "env.ceiling_slope=0"});
    std::ostringstream log;
    REQUIRE(cmd_eval((dir / "uniform.json").string(), o, log) == kExitOk);
    const double ratio = read_json(dir / "out" / "metrics.json")["adaptation_ratio"].get<double>();
    CHECK(ratio == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("analyze golden corpus") {
    const fs::path dir = scratch("analyze");
    std::ostringstream log;
    REQUIRE(cmd_analyze(ALP_TEST_DATA_DIR "/golden_traces.jsonl", dir.string(), log) == kExitOk);
    const json rep = read_json(dir / "behavior_report.json");
    CHECK(rep["records"] == 10);
    CHECK(rep["rejects"] == 0);
    CHECK(rep["totals"]["backtracking"] == 10);
    CHECK(rep["totals"]["repetitions"] == 3);
    CHECK(rep["means"]["planning"].get<double>() == doctest::Approx(0.8));
    const std::string csv = read_file(dir / "behavior_records.csv");
    CHECK(csv.rfind(std::string(kBehaviorHeader) + "\n", 0) == 0);
    CHECK(csv.find("p1,false,5,0,0,0,0,0,3,0\n") != std::string::npos);
    CHECK(csv.find("3,,,0,1,0,3,0,0,2\n") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "behavior_records.csv.tmp"));

    const fs::path one_bad = scratch("analyze_bad");
    write_file_atomic(one_bad / "in.jsonl",
                      "{\"problem_id\": \"a\", \"response\": \"wait\"}\n{broken\n"
                      "{\"problem_id\": \"b\", \"response\": \"check\"}\n");
    REQUIRE(cmd_analyze((one_bad / "in.jsonl").string(), (one_bad / "out").string(), log) == kExitOk);
    const json bad = read_json(one_bad / "out" / "behavior_report.json");
    CHECK(bad["records"] == 2);
    CHECK(bad["rejects"] == 1);

    const fs::path empty = scratch("analyze_empty");
    write_file_atomic(empty / "in.jsonl", "");
    REQUIRE(cmd_analyze((empty / "in.jsonl").string(), (empty / "out").string(), log) == kExitOk);
    const json none = read_json(empty / "out" / "behavior_report.json");
    CHECK(none["records"] == 0);
    CHECK(none["means"]["repetitions"].is_null());

    CHECK(cmd_analyze((empty / "missing.jsonl").string(), (empty / "out2").string(), log) == kExitFailure);
}

TEST_CASE("output directory resolution") {
    CHECK(resolve_output_dir(std::string("x"), "y", "train") == fs::path("x"));
    CHECK(resolve_output_dir(std::nullopt, "y", "train") == fs::path("y"));
    ::setenv(kOutputRootEnv, "/tmp/alp_root", 1);
    CHECK(resolve_output_dir(std::nullopt, "", "eval") == fs::path("/tmp/alp_root/eval"));
    ::unsetenv(kOutputRootEnv);
    CHECK(resolve_output_dir(std::nullopt, "", "eval") == fs::path("runs/eval"));
    CHECK(parse_fractions("0, 0.3,0.6") == std::vector<double>{0.0, 0.3, 0.6});
    CHECK_THROWS(parse_fractions(""));
    CHECK_THROWS(parse_fractions("0,,1"));
    CHECK_THROWS(parse_fractions("a"));
    CHECK_THROWS(parse_fractions("-0.1"));
}

TEST_CASE("command line front end") {
    const fs::path dir = scratch("cli");
    CHECK(run_cli("--version") == 0);
    CHECK(run_cli("") == kExitUsage);
    CHECK(run_cli("frobnicate") == kExitUsage);
    CHECK(run_cli("eval") == kExitUsage);
    CHECK(run_cli("train --set train.steps=0 --out " + (dir / "bad").string()) == kExitUsage);
    CHECK(run_cli("train --config " + (dir / "missing.json").string()) == kExitUsage);
    REQUIRE(run_cli("train --set train.steps=2 --set train.batch_tasks=16 --seed 3 --workers 2 --out " +
                    (dir / "t").string()) == 0);
    CHECK(read_json(dir / "t" / "manifest.json")["seed"] == 3);
    CHECK(run_cli("analyze " + (dir / "none.jsonl").string() + " --out " + (dir / "a").string()) ==
          kExitFailure);

    ::setenv(kOutputRootEnv, (dir / "root").c_str(), 1);
    REQUIRE(run_cli("train --set train.steps=1 --set train.batch_tasks=8") == 0);
    ::unsetenv(kOutputRootEnv);
    CHECK(fs::exists(dir / "root" / "train" / "checkpoint.json"));
}
