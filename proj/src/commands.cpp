#include "alp/commands.hpp"

#include <chrono>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "alp/config.hpp"
#include "alp/io.hpp"
#include "alp/metrics.hpp"
#include "alp/trainer.hpp"
#include "alp/traces.hpp"

namespace alp {

using nlohmann::json;
namespace fs = std::filesystem;

std::filesystem::path resolve_output_dir(const std::optional<std::string>& flag,
                                         const std::string& config_dir, const std::string& command) {
    if (flag && !flag->empty()) return *flag;
    if (!config_dir.empty()) return config_dir;
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) return fs::path(root) / command;
    return fs::path("runs") / command;
}

std::vector<double> parse_fractions(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        item = a == std::string::npos ? std::string() : item.substr(a, b - a + 1);
        if (item.empty()) {
            if (text.find_first_not_of(" \t,") == std::string::npos) break;
            throw std::invalid_argument("fractions: empty entry in '" + text + "'");
        }
        double v = 0.0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc() || res.ptr != item.data() + item.size())
            throw std::invalid_argument("fractions: cannot parse '" + item + "'");
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("fractions: " + item + " outside [0, 1]");
        out.push_back(v);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("fractions: empty fraction list");
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

ExperimentConfig resolve_config(const CommandOptions& opts) {
    std::vector<std::string> overrides = opts.overrides;
    if (opts.seed) overrides.push_back("seed=" + std::to_string(*opts.seed));
    if (opts.workers) overrides.push_back("workers=" + std::to_string(*opts.workers));
    return load_config(opts.config_path, overrides);
}

/// Run manifest: written with status "running" before the work starts and
/// atomically replaced when it finishes.
class Manifest {
public:
    Manifest(fs::path dir, std::string command, const ExperimentConfig* config, json inputs)
        : path_(dir / "manifest.json"), start_(Clock::now()) {
        doc_["command"] = std::move(command);
        doc_["status"] = "running";
        doc_["versions"] = {{"alp", kVersion},
                            {"config_schema", kConfigSchemaVersion},
                            {"checkpoint_format", kCheckpointVersion}};
        doc_["inputs"] = std::move(inputs);
        if (config) {
            doc_["seed"] = config->seed;
            doc_["workers"] = config->workers;
            doc_["config"] = config_to_json(*config);
        }
        doc_["artifacts"] = json::object();
        write();
    }

    void artifact(const std::string& name, const fs::path& p) { doc_["artifacts"][name] = p.string(); }

    void finish(const std::string& status, const std::string& error = {}) {
        doc_["status"] = status;
        if (!error.empty()) doc_["error"] = error;
        const std::chrono::duration<double> elapsed = Clock::now() - start_;
        doc_["timings"] = {{"wall_seconds", elapsed.count()}};
        write();
    }

private:
    void write() const { write_file_atomic(path_, doc_.dump(2) + "\n"); }

    fs::path path_;
    Clock::time_point start_;
    json doc_;
};

template <typename Writer>
void write_text(const fs::path& path, Writer&& writer) {
    std::ostringstream out;
    writer(out);
    write_file_atomic(path, out.str());
}

// Runs `body`, mapping exceptions onto exit codes and reporting them.
template <typename Body>
int guarded(std::ostream& log, Manifest* manifest, Body&& body) {
    try {
        body();
        if (manifest) manifest->finish("complete");
        return kExitOk;
    } catch (const NonFiniteGradientError& e) {
        log << "error: " << e.what() << '\n';
        if (manifest) manifest->finish("failed", e.what());
        return kExitFailure;
    } catch (const std::invalid_argument& e) {
        log << "error: " << e.what() << '\n';
        if (manifest) manifest->finish("failed", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        if (manifest) manifest->finish("failed", e.what());
        return kExitFailure;
    }
}

std::string step_checkpoint_name(int step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "step_%06d.json", step);
    return buf;
}

}  // namespace

int cmd_train(const CommandOptions& opts, std::ostream& log) {
    ExperimentConfig config;
    fs::path out;
    std::unique_ptr<Manifest> manifest;
    const int setup = guarded(log, nullptr, [&] {
        config = resolve_config(opts);
        out = resolve_output_dir(opts.out_dir, config.output_dir, "train");
        fs::create_directories(out);
        manifest = std::make_unique<Manifest>(out, "train", &config, json::object());
    });
    if (setup != kExitOk) return setup;

    return guarded(log, manifest.get(), [&] {
        // workers stays out of the snapshot; the manifest records it
        json snapshot = config_to_json(config);
        snapshot.erase("workers");
        write_file_atomic(out / "config.json", snapshot.dump(2) + "\n");
        manifest->artifact("config", out / "config.json");
        const auto forced = config.train.forced_bin();
        const int every = config.train.checkpoint_every;
        const auto on_step = [&](const StepRecord& rec, const PolicyParams& params) {
            if (every > 0 && rec.step % every == 0 && rec.step != config.train.steps)
                save_checkpoint(out / "checkpoints" / step_checkpoint_name(rec.step),
                                FrozenPolicy{params, forced}, rec.step);
        };
        log << "training " << to_string(config.train.objective.variant) << " for "
            << config.train.steps << " steps\n";
        const TrainResult result = run_training(config.train, config.workers, on_step);

        save_checkpoint(out / "checkpoint.json", result.policy, config.train.steps);
        manifest->artifact("checkpoint", out / "checkpoint.json");
        write_text(out / "train_log.csv", [&](std::ostream& os) { write_train_log_csv(os, result.log); });
        manifest->artifact("train_log", out / "train_log.csv");
        if (every > 0) manifest->artifact("checkpoints", out / "checkpoints");
        const auto& last = result.log.records.back();
        log << "final mean length " << format_double(last.mean_length) << ", accuracy "
            << format_double(last.mean_accuracy) << '\n';
    });
}

namespace {

FrozenPolicy load_matching_checkpoint(const std::string& path, const ExperimentConfig& config) {
    FrozenPolicy policy = load_checkpoint(path);
    if (policy.params.bins != config.train.bins)
        throw std::invalid_argument("policy.bins: checkpoint bin list does not match the config");
    return policy;
}

}  // namespace

int cmd_eval(const std::string& checkpoint, const CommandOptions& opts, std::ostream& log) {
    ExperimentConfig config;
    fs::path out;
    std::unique_ptr<Manifest> manifest;
    const int setup = guarded(log, nullptr, [&] {
        config = resolve_config(opts);
        out = resolve_output_dir(opts.out_dir, config.output_dir, "eval");
        fs::create_directories(out);
        manifest = std::make_unique<Manifest>(out, "eval", &config, json{{"checkpoint", checkpoint}});
    });
    if (setup != kExitOk) return setup;

    return guarded(log, manifest.get(), [&] {
        const FrozenPolicy policy = load_matching_checkpoint(checkpoint, config);
        const Evaluation ev = evaluate_policy(policy, config.train.env, config.eval.n_tasks,
                                              config.eval.n_samples, config.seed, config.workers);
        const MetricsReport report = build_report(ev.stats);

        write_file_atomic(out / "metrics.json", report_to_json(report).dump(2) + "\n");
        write_text(out / "pareto.csv", [&](std::ostream& os) { write_pareto_csv(os, report.pareto_points); });
        write_text(out / "buckets.csv", [&](std::ostream& os) { write_bucket_csv(os, report.bucket_table); });
        write_text(out / "problems.csv", [&](std::ostream& os) { write_problem_csv(os, ev); });
        manifest->artifact("metrics", out / "metrics.json");
        manifest->artifact("pareto", out / "pareto.csv");
        manifest->artifact("buckets", out / "buckets.csv");
        manifest->artifact("problems", out / "problems.csv");
        log << "pass@1 " << format_double(report.pass_at_1) << ", mean tokens "
            << format_double(report.mean_tokens) << ", efficiency "
            << format_double(report.efficiency_score) << '\n';
    });
}

int cmd_sweep(const std::string& checkpoint, const std::optional<std::string>& fractions,
              const CommandOptions& opts, std::ostream& log) {
    ExperimentConfig config;
    std::vector<double> hard_fractions;
    fs::path out;
    std::unique_ptr<Manifest> manifest;
    const int setup = guarded(log, nullptr, [&] {
        config = resolve_config(opts);
        hard_fractions = fractions ? parse_fractions(*fractions) : config.eval.sweep_fractions;
        if (hard_fractions.empty()) throw std::invalid_argument("fractions: empty fraction list");
        out = resolve_output_dir(opts.out_dir, config.output_dir, "sweep");
        fs::create_directories(out);
        manifest = std::make_unique<Manifest>(
            out, "sweep", &config, json{{"checkpoint", checkpoint}, {"fractions", hard_fractions}});
    });
    if (setup != kExitOk) return setup;

    return guarded(log, manifest.get(), [&] {
        const FrozenPolicy policy = load_matching_checkpoint(checkpoint, config);
        const auto rows = mixture_sweep(policy, config.train.env, hard_fractions, config.eval.sweep_tasks,
                                        config.eval.sweep_samples, config.seed, config.workers);
        write_text(out / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, rows); });
        manifest->artifact("sweep", out / "sweep.csv");
        log << "wrote " << rows.size() << " sweep rows\n";
    });
}

int cmd_analyze(const std::string& traces_path, const std::optional<std::string>& out_dir,
                std::ostream& log) {
    std::ifstream in(traces_path, std::ios::binary);
    if (!in) {
        log << "error: cannot read traces file '" << traces_path << "'\n";
        return kExitFailure;
    }
    fs::path out;
    std::unique_ptr<Manifest> manifest;
    const int setup = guarded(log, nullptr, [&] {
        out = resolve_output_dir(out_dir, {}, "analyze");
        fs::create_directories(out);
        manifest = std::make_unique<Manifest>(out, "analyze", nullptr, json{{"traces", traces_path}});
    });
    if (setup != kExitOk) return setup;

    return guarded(log, manifest.get(), [&] {
        // Rows are streamed to disk so memory stays flat in corpus size.
        const fs::path records_path = out / "behavior_records.csv";
        fs::path partial = records_path;
        partial += ".tmp";
        CorpusReport report;
        {
            std::ofstream rows(partial, std::ios::binary | std::ios::trunc);
            if (!rows) throw std::runtime_error("cannot write '" + partial.string() + "'");
            rows << kBehaviorHeader << '\n';
            report = analyze_corpus(
                in, [&](const TraceRecord& r, const BehaviorCounts& c) { write_behavior_row(rows, r, c); });
            if (!rows) throw std::runtime_error("write failed for '" + partial.string() + "'");
        }
        fs::rename(partial, records_path);
        write_file_atomic(out / "behavior_report.json", corpus_report_to_json(report).dump(2) + "\n");
        manifest->artifact("report", out / "behavior_report.json");
        manifest->artifact("records", out / "behavior_records.csv");
        log << "analyzed " << report.records << " records, " << report.rejects << " rejected\n";
    });
}

}  // namespace alp
