#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "alp/environment.hpp"
#include "alp/policy.hpp"

namespace alp {

/// Per-problem evaluation summary over n sampled responses.
struct ProblemStats {
    TaskId task_id = 0;
    double solve_rate = 0.0;
    double mean_tokens = 0.0;
    int n_samples = 0;
};

struct ParetoPoint {
    double problem_frac = 0.0;
    double token_frac = 0.0;
};

/// Mean tokens for problems whose difficulty (1 - solve rate) lies in
/// [lo, hi); the last bucket is closed.
struct BucketRow {
    double lo = 0.0;
    double hi = 0.0;
    double mean_tokens = 0.0;
    std::size_t count = 0;
};

struct MetricsReport {
    std::size_t n_problems = 0;
    double pass_at_1 = 0.0;
    double mean_tokens = 0.0;
    std::optional<double> adaptation_ratio;  // unset when fewer than 4 problems
    double efficiency_score = 0.0;
    std::vector<ParetoPoint> pareto_points;
    std::vector<BucketRow> bucket_table;
};

double pass_at_1(std::span<const ProblemStats> stats);

/// Indices ordered easiest first: solve rate descending, then mean tokens
/// ascending, then task id ascending.
std::vector<std::size_t> easiest_first_order(std::span<const ProblemStats> stats);

/// Cumulative token fraction against cumulative problem fraction, starting
/// at (0, 0) and ending at (1, 1).
std::vector<ParetoPoint> pareto_curve(std::span<const ProblemStats> stats);

/// Number of problems in each 30% slice: ceil(0.3 N).
std::size_t thirty_percent_slice(std::size_t n);

/// Mean tokens of the hardest 30% over mean tokens of the easiest 30%.
double adaptation_ratio(std::span<const ProblemStats> stats);

/// One minus the trapezoidal area under the curve.
double efficiency_score(std::span<const ParetoPoint> curve);

std::vector<BucketRow> bucket_tokens_by_difficulty(std::span<const ProblemStats> stats,
                                                   double bucket_width = 0.2);

MetricsReport build_report(std::span<const ProblemStats> stats);

struct Evaluation {
    std::vector<Task> tasks;
    std::vector<ProblemStats> stats;
};

/// Samples `n_tasks` tasks from `env` and draws `n_samples` responses per
/// task from the frozen policy. Deterministic in `seed`; the same seed gives
/// coupled task sets across different mixture fractions.
Evaluation evaluate_policy(const FrozenPolicy& policy, const EnvConfig& env, int n_tasks,
                           int n_samples, std::uint64_t seed, int workers = 1);

struct SweepRow {
    double hard_fraction = 0.0;
    double pass_at_1 = 0.0;
    double mean_tokens = 0.0;
};

std::vector<SweepRow> mixture_sweep(const FrozenPolicy& policy, const EnvConfig& env_base,
                                    std::span<const double> hard_fractions, int n_tasks,
                                    int n_samples, std::uint64_t seed, int workers = 1);

}  // namespace alp
