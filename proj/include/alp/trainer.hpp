#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "alp/environment.hpp"
#include "alp/objective.hpp"
#include "alp/policy.hpp"

namespace alp {

// The LLM-scale learning rate reported for the original training runs. The
// toy policy uses kDefaultLearningRate instead.
inline constexpr double kReferenceLlmLearningRate = 1e-6;
inline constexpr double kDefaultLearningRate = 10.0;

struct TrainConfig {
    int steps = 100;
    int batch_tasks = 512;
    int k_rollouts = 16;
    double learning_rate = kDefaultLearningRate;
    ObjectiveConfig objective;
    EnvConfig env;
    std::uint64_t seed = 42;
    int checkpoint_every = 0;  // 0 disables intermediate checkpoints
    AdvantageKind advantage_kind = AdvantageKind::grpo;
    std::vector<int> bins = kDefaultBins;
    std::size_t feature_dim = kDefaultFeatureDim;

    /// Objective with k_rollouts taken from this config.
    ObjectiveConfig effective_objective() const;

    /// Bin every rollout is forced into, for the fixed_length variant.
    std::optional<std::size_t> forced_bin() const;

    void validate() const;
};

struct StepRecord {
    int step = 0;
    double mean_reward = 0.0;
    double mean_length = 0.0;
    double mean_solve_rate = 0.0;
    double mean_accuracy = 0.0;
    double grad_norm = 0.0;
    double mean_length_easy = 0.0;  // NaN when the batch had no easy task
    double mean_length_hard = 0.0;  // NaN when the batch had no hard task
};

struct TrainLog {
    std::vector<StepRecord> records;
};

class NonFiniteGradientError : public std::runtime_error {
public:
    explicit NonFiniteGradientError(int step)
        : std::runtime_error("non-finite gradient at step " + std::to_string(step)), step_(step) {}
    int step() const { return step_; }

private:
    int step_;
};

/// Tasks for one training step; ids are (step - 1) * batch_tasks + i.
std::vector<Task> sample_task_batch(const TrainConfig& config, int step);

/// Rollouts, rewards and advantages for one task.
struct GroupOutcome {
    RolloutGroup group;
    std::vector<double> rewards;
    std::vector<double> advantages;
};

GroupOutcome run_group(const PolicyParams& params, const Task& task, const TrainConfig& config);

/// Rewards and advantages for already-resolved rollouts of one task.
GroupOutcome score_group(RolloutGroup group, const TrainConfig& config);

/// Sum over the group of advantage * grad log pi(bin | feature).
Matrix group_score_gradient(const PolicyParams& params, double feature,
                            std::span<const Rollout> rollouts, std::span<const double> advantages);

struct StepResult {
    PolicyParams params;
    Matrix gradient;  // mean over all batch rollouts
    StepRecord record;
};

/// One inner loop: K rollouts per task, rewards, advantages and a single
/// SGD ascent step on the mean score-function gradient.
StepResult training_step(const PolicyParams& params, std::span<const Task> tasks,
                         const TrainConfig& config, int step, int workers = 1);

struct TrainResult {
    FrozenPolicy policy;
    TrainLog log;
};

using StepCallback = std::function<void(const StepRecord&, const PolicyParams&)>;

TrainResult run_training(const TrainConfig& config, int workers = 1,
                         const StepCallback& on_step = {});

}  // namespace alp
