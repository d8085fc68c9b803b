// Command-line front end: train, eval, sweep and analyze.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "alp/commands.hpp"

namespace {

void add_common(CLI::App* cmd, alp::CommandOptions& opts, std::optional<int>& workers,
                std::optional<std::uint64_t>& seed, std::optional<std::string>& out) {
    cmd->add_option("--config", opts.config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--set", opts.overrides, "Override a config key: dotted.key=value (repeatable)");
    cmd->add_option("--seed", seed, "Experiment seed");
    cmd->add_option("--out", out, "Output directory");
    cmd->add_option("--workers", workers, "Worker threads (outputs do not depend on it)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive length penalty laboratory"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(alp::kVersion));

    alp::CommandOptions opts;
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::string checkpoint;
    std::optional<std::string> fractions;
    std::string traces;

    auto* train = app.add_subcommand("train", "Train a length policy");
    add_common(train, opts, workers, seed, out);

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint and emit metrics");
    add_common(eval, opts, workers, seed, out);
    eval->add_option("--checkpoint", checkpoint, "Checkpoint JSON")->required();

    auto* sweep = app.add_subcommand("sweep", "Evaluate a checkpoint across hard-task mixtures");
    add_common(sweep, opts, workers, seed, out);
    sweep->add_option("--checkpoint", checkpoint, "Checkpoint JSON")->required();
    sweep->add_option("--fractions", fractions, "Comma-separated hard fractions, e.g. 0,0.3,0.6");

    auto* analyze = app.add_subcommand("analyze", "Count reasoning behaviours in a JSONL trace file");
    analyze->add_option("traces", traces, "Trace records, one JSON object per line")->required();
    analyze->add_option("--out", out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : alp::kExitUsage;
    }

    opts.workers = workers;
    opts.seed = seed;
    opts.out_dir = out;

    if (train->parsed()) return alp::cmd_train(opts, std::cerr);
    if (eval->parsed()) return alp::cmd_eval(checkpoint, opts, std::cerr);
    if (sweep->parsed()) return alp::cmd_sweep(checkpoint, fractions, opts, std::cerr);
    if (analyze->parsed()) return alp::cmd_analyze(traces, out, std::cerr);
    return alp::kExitUsage;
}
