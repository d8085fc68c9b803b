#include "alp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "alp/parallel.hpp"

namespace alp {

double pass_at_1(std::span<const ProblemStats> stats) {
    if (stats.empty()) throw std::invalid_argument("pass_at_1: no problems");
    double total = 0.0;
    for (const auto& s : stats) total += s.solve_rate;
    return total / static_cast<double>(stats.size());
}

std::vector<std::size_t> easiest_first_order(std::span<const ProblemStats> stats) {
    std::vector<std::size_t> order(stats.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = stats[a];
        const auto& y = stats[b];
        if (x.solve_rate != y.solve_rate) return x.solve_rate > y.solve_rate;
        if (x.mean_tokens != y.mean_tokens) return x.mean_tokens < y.mean_tokens;
        return x.task_id < y.task_id;
    });
    return order;
}

std::vector<ParetoPoint> pareto_curve(std::span<const ProblemStats> stats) {
    if (stats.empty()) throw std::invalid_argument("pareto_curve: no problems");
    const auto order = easiest_first_order(stats);
    double total = 0.0;
    for (std::size_t i : order) total += stats[i].mean_tokens;
    if (!(total > 0.0)) throw std::invalid_argument("pareto_curve: zero total tokens");

    const auto n = static_cast<double>(stats.size());
    std::vector<ParetoPoint> curve;
    curve.reserve(stats.size() + 1);
    curve.push_back({0.0, 0.0});
    double cumulative = 0.0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        cumulative += stats[order[rank]].mean_tokens;
        curve.push_back({static_cast<double>(rank + 1) / n, cumulative / total});
    }
    return curve;
}

std::size_t thirty_percent_slice(std::size_t n) { return (3 * n + 9) / 10; }

double adaptation_ratio(std::span<const ProblemStats> stats) {
    if (stats.size() < 4) throw std::invalid_argument("adaptation_ratio: needs at least 4 problems");
    const auto order = easiest_first_order(stats);
    const std::size_t m = thirty_percent_slice(stats.size());
    double easy = 0.0, hard = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        easy += stats[order[i]].mean_tokens;
        hard += stats[order[order.size() - 1 - i]].mean_tokens;
    }
    if (!(easy > 0.0)) throw std::invalid_argument("adaptation_ratio: zero easy-slice tokens");
    return hard / easy;
}

double efficiency_score(std::span<const ParetoPoint> curve) {
    constexpr double tol = 1e-12;
    if (curve.size() < 2) throw std::invalid_argument("efficiency_score: curve needs two points");
    const auto& first = curve.front();
    const auto& last = curve.back();
    if (std::abs(first.problem_frac) > tol || std::abs(first.token_frac) > tol)
        throw std::invalid_argument("efficiency_score: curve must start at (0, 0)");
    if (std::abs(last.problem_frac - 1.0) > tol || std::abs(last.token_frac - 1.0) > tol)
        throw std::invalid_argument("efficiency_score: curve must end at (1, 1)");
    // Trapezoid sum rearranged as 1/2 (x_n y_n - x_0 y_0) plus cross terms
    // x_i y_{i-1} - x_{i-1} y_i, which vanish exactly on the diagonal.
    double cross = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const auto& a = curve[i - 1];
        const auto& b = curve[i];
        if (!std::isfinite(b.problem_frac) || !std::isfinite(b.token_frac) ||
            b.problem_frac < a.problem_frac || b.token_frac < a.token_frac)
            throw std::invalid_argument("efficiency_score: curve is not monotone");
        cross += b.problem_frac * a.token_frac - a.problem_frac * b.token_frac;
    }
    const double area = 0.5 * (last.problem_frac * last.token_frac - first.problem_frac * first.token_frac) +
                        0.5 * cross;
    return 1.0 - area;
}

std::vector<BucketRow> bucket_tokens_by_difficulty(std::span<const ProblemStats> stats,
                                                   double bucket_width) {
    if (!(bucket_width > 0.0 && bucket_width <= 1.0))
        throw std::invalid_argument("bucket_width must lie in (0, 1]");
    const double buckets_real = 1.0 / bucket_width;
    const auto n_buckets = static_cast<std::size_t>(std::llround(buckets_real));
    if (std::abs(buckets_real - static_cast<double>(n_buckets)) > 1e-9)
        throw std::invalid_argument("bucket_width must divide 1 evenly");

    std::vector<double> sums(n_buckets, 0.0);
    std::vector<std::size_t> counts(n_buckets, 0);
    for (const auto& s : stats) {
        const double difficulty = 1.0 - s.solve_rate;
        // Solve rates are ratios of small integers; nudge so 1 - 0.6 lands in
        // [0.4, 0.6) rather than just below it.
        auto idx = static_cast<std::size_t>(std::max(0.0, std::floor(difficulty / bucket_width + 1e-9)));
        idx = std::min(idx, n_buckets - 1);
        sums[idx] += s.mean_tokens;
        ++counts[idx];
    }
    std::vector<BucketRow> table;
    for (std::size_t b = 0; b < n_buckets; ++b) {
        if (counts[b] == 0) continue;
        table.push_back({static_cast<double>(b) / static_cast<double>(n_buckets),
                         static_cast<double>(b + 1) / static_cast<double>(n_buckets),
                         sums[b] / static_cast<double>(counts[b]), counts[b]});
    }
    return table;
}

MetricsReport build_report(std::span<const ProblemStats> stats) {
    MetricsReport report;
    report.n_problems = stats.size();
    report.pass_at_1 = pass_at_1(stats);
    double tokens = 0.0;
    for (const auto& s : stats) tokens += s.mean_tokens;
    report.mean_tokens = tokens / static_cast<double>(stats.size());
    report.pareto_points = pareto_curve(stats);
    report.efficiency_score = efficiency_score(report.pareto_points);
    if (stats.size() >= 4) report.adaptation_ratio = adaptation_ratio(stats);
    report.bucket_table = bucket_tokens_by_difficulty(stats);
    return report;
}

Evaluation evaluate_policy(const FrozenPolicy& policy, const EnvConfig& env, int n_tasks,
                           int n_samples, std::uint64_t seed, int workers) {
    if (n_tasks < 1) throw std::invalid_argument("eval.n_tasks: must be >= 1");
    if (n_samples < 1) throw std::invalid_argument("eval.n_samples: must be >= 1");
    const auto n = static_cast<std::size_t>(n_tasks);
    Evaluation ev;
    ev.tasks.resize(n);
    ev.stats.resize(n);
    parallel_for(n, workers, [&](std::size_t i) {
        auto task_stream = RandomStream::derive(seed, StreamTag::eval_task, {i});
        const Task task = sample_task(env, task_stream, i);
        const auto probs = bin_distribution(policy.params, task.feature);
        const auto log_probs = log_bin_distribution(policy.params, task.feature);
        int solved = 0;
        double tokens = 0.0;
        for (int s = 0; s < n_samples; ++s) {
            auto stream = RandomStream::derive(seed, StreamTag::eval_rollout,
                                               {i, static_cast<std::uint64_t>(s)});
            const LengthChoice choice = policy.draw(probs, log_probs, stream);
            const int length = policy.params.bins[choice.bin_index];
            tokens += length;
            if (resolve(task, length, env, stream)) ++solved;
        }
        ev.tasks[i] = task;
        ev.stats[i] = {task.id, static_cast<double>(solved) / n_samples, tokens / n_samples, n_samples};
    });
    return ev;
}

std::vector<SweepRow> mixture_sweep(const FrozenPolicy& policy, const EnvConfig& env_base,
                                    std::span<const double> hard_fractions, int n_tasks,
                                    int n_samples, std::uint64_t seed, int workers) {
    std::vector<SweepRow> rows;
    rows.reserve(hard_fractions.size());
    for (double fraction : hard_fractions) {
        if (!(fraction >= 0.0 && fraction <= 1.0))
            throw std::invalid_argument("hard fraction outside [0, 1]");
        EnvConfig env = env_base;
        env.mixture_hard_fraction = fraction;
        const Evaluation ev = evaluate_policy(policy, env, n_tasks, n_samples, seed, workers);
        double tokens = 0.0;
        for (const auto& s : ev.stats) tokens += s.mean_tokens;
        rows.push_back({fraction, pass_at_1(ev.stats), tokens / static_cast<double>(ev.stats.size())});
    }
    return rows;
}

}  // namespace alp
