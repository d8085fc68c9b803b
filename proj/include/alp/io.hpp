#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "json.hpp"

#include "alp/metrics.hpp"
#include "alp/policy.hpp"
#include "alp/traces.hpp"
#include "alp/trainer.hpp"

namespace alp {

inline constexpr int kCheckpointVersion = 1;
inline constexpr std::string_view kCheckpointFormat = "alp-policy-checkpoint";

/// Shortest round-trip decimal form; "nan" / "inf" / "-inf" otherwise.
std::string format_double(double v);

/// Writes `contents` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

// Checkpoint: {"format", "version", "step", "bins", "feature_dim",
// "forced_bin", "weights": [[row per bin]]}.
nlohmann::json checkpoint_to_json(const FrozenPolicy& policy, int step);
FrozenPolicy checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const std::filesystem::path& path, const FrozenPolicy& policy, int step);
FrozenPolicy load_checkpoint(const std::filesystem::path& path);

inline constexpr std::string_view kTrainLogHeader =
    "step,mean_reward,mean_length,mean_solve_rate,mean_accuracy,grad_norm,mean_length_easy,"
    "mean_length_hard";
void write_train_log_csv(std::ostream& out, const TrainLog& log);

nlohmann::json report_to_json(const MetricsReport& report);

inline constexpr std::string_view kParetoHeader = "problem_frac,token_frac";
void write_pareto_csv(std::ostream& out, std::span<const ParetoPoint> points);

inline constexpr std::string_view kBucketHeader = "difficulty_lo,difficulty_hi,mean_tokens,count";
void write_bucket_csv(std::ostream& out, std::span<const BucketRow> rows);

inline constexpr std::string_view kProblemHeader =
    "task_id,pool,difficulty,feature,solve_rate,mean_tokens,n_samples";
void write_problem_csv(std::ostream& out, const Evaluation& evaluation);

inline constexpr std::string_view kSweepHeader = "hard_fraction,pass_at_1,mean_tokens";
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

inline constexpr std::string_view kBehaviorHeader =
    "problem_id,correct,token_count,repetitions,problem_setup,exploration,verification,conclusion,"
    "backtracking,planning";
void write_behavior_row(std::ostream& out, const TraceRecord& record, const BehaviorCounts& counts);

nlohmann::json corpus_report_to_json(const CorpusReport& report);

std::string csv_escape(std::string_view field);

}  // namespace alp
