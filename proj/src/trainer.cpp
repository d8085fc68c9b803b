#include "alp/trainer.hpp"

#include <cmath>
#include <limits>

#include "alp/parallel.hpp"

namespace alp {

ObjectiveConfig TrainConfig::effective_objective() const {
    ObjectiveConfig obj = objective;
    obj.k_rollouts = k_rollouts;
    return obj;
}

std::optional<std::size_t> TrainConfig::forced_bin() const {
    if (objective.variant != ObjectiveVariant::fixed_length) return std::nullopt;
    return nearest_bin(bins, objective.resolved_variant_param());
}

void TrainConfig::validate() const {
    if (steps < 1) throw std::invalid_argument("train.steps: must be >= 1");
    if (batch_tasks < 1) throw std::invalid_argument("train.batch_tasks: must be >= 1");
    if (k_rollouts < 2) throw std::invalid_argument("train.k_rollouts: must be >= 2");
    if (!(std::isfinite(learning_rate) && learning_rate > 0.0))
        throw std::invalid_argument("train.learning_rate: must be > 0");
    if (checkpoint_every < 0) throw std::invalid_argument("train.checkpoint_every: must be >= 0");
    if (feature_dim < 1) throw std::invalid_argument("policy.feature_dim: must be >= 1");
    effective_objective().validate();
    env.validate();
    PolicyParams::zeros(bins, feature_dim);  // validates the bin grid
}

std::vector<Task> sample_task_batch(const TrainConfig& config, int step) {
    std::vector<Task> tasks;
    tasks.reserve(static_cast<std::size_t>(config.batch_tasks));
    const auto base = static_cast<TaskId>(step - 1) * static_cast<TaskId>(config.batch_tasks);
    for (int i = 0; i < config.batch_tasks; ++i) {
        const TaskId id = base + static_cast<TaskId>(i);
        auto stream = RandomStream::derive(config.seed, StreamTag::train_task, {id});
        tasks.push_back(sample_task(config.env, stream, id));
    }
    return tasks;
}

GroupOutcome score_group(RolloutGroup group, const TrainConfig& config) {
    const ObjectiveConfig objective = config.effective_objective();
    group.p_solved = compute_solve_rate(std::span<const Rollout>(group.rollouts));
    GroupOutcome out;
    out.rewards.reserve(group.rollouts.size());
    for (const Rollout& r : group.rollouts)
        out.rewards.push_back(rollout_reward(r.length_tokens, r.correct, group.p_solved, objective));
    out.advantages = compute_advantages(config.advantage_kind, out.rewards);
    out.group = std::move(group);
    return out;
}

GroupOutcome run_group(const PolicyParams& params, const Task& task, const TrainConfig& config) {
    const FrozenPolicy sampler{params, config.forced_bin()};
    const auto probs = bin_distribution(params, task.feature);
    const auto log_probs = log_bin_distribution(params, task.feature);

    RolloutGroup group;
    group.task_id = task.id;
    group.rollouts.reserve(static_cast<std::size_t>(config.k_rollouts));
    for (int k = 0; k < config.k_rollouts; ++k) {
        auto stream = RandomStream::derive(config.seed, StreamTag::train_rollout,
                                           {task.id, static_cast<std::uint64_t>(k)});
        const LengthChoice choice = sampler.draw(probs, log_probs, stream);
        Rollout r;
        r.task_id = task.id;
        r.bin_index = choice.bin_index;
        r.length_tokens = params.bins[choice.bin_index];
        r.log_prob = choice.log_prob;
        r.correct = resolve(task, r.length_tokens, config.env, stream);
        group.rollouts.push_back(r);
    }
    return score_group(std::move(group), config);
}

Matrix group_score_gradient(const PolicyParams& params, double feature,
                            std::span<const Rollout> rollouts, std::span<const double> advantages) {
    if (rollouts.size() != advantages.size())
        throw std::invalid_argument("rollout and advantage counts differ");
    // sum_k a_k (e_{b_k} - p) = c - (sum_k a_k) p, with c_b the advantage
    // mass that landed in bin b.
    const auto probs = bin_distribution(params, feature);
    const auto phi = features(feature, params.feature_dim());
    std::vector<double> coeff(params.num_bins(), 0.0);
    double total_adv = 0.0;
    for (std::size_t k = 0; k < rollouts.size(); ++k) {
        coeff.at(rollouts[k].bin_index) += advantages[k];
        total_adv += advantages[k];
    }
    Matrix grad(params.num_bins(), phi.size());
    for (std::size_t b = 0; b < coeff.size(); ++b) {
        const double c = coeff[b] - total_adv * probs[b];
        for (std::size_t f = 0; f < phi.size(); ++f) grad(b, f) = c * phi[f];
    }
    return grad;
}

namespace {

struct TaskSlot {
    Matrix gradient;
    double reward_sum = 0.0;
    double length_sum = 0.0;
    double p_solved = 0.0;
    double correct_sum = 0.0;
};

double nan_if_empty(double sum, double count) {
    return count > 0.0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

StepResult training_step(const PolicyParams& params, std::span<const Task> tasks,
                         const TrainConfig& config, int step, int workers) {
    if (tasks.empty()) throw std::invalid_argument("training_step: empty task batch");
    const bool forced = config.forced_bin().has_value();

    std::vector<TaskSlot> slots(tasks.size());
    parallel_for(tasks.size(), workers, [&](std::size_t i) {
        const Task& task = tasks[i];
        const GroupOutcome outcome = run_group(params, task, config);
        TaskSlot& slot = slots[i];
        // The forced policy does not depend on the weights.
        slot.gradient = forced ? Matrix(params.num_bins(), params.feature_dim())
                               : group_score_gradient(params, task.feature, outcome.group.rollouts,
                                                      outcome.advantages);
        for (std::size_t k = 0; k < outcome.rewards.size(); ++k) {
            slot.reward_sum += outcome.rewards[k];
            slot.length_sum += outcome.group.rollouts[k].length_tokens;
            slot.correct_sum += outcome.group.rollouts[k].correct ? 1.0 : 0.0;
        }
        slot.p_solved = outcome.group.p_solved;
    });

    Matrix gradient(params.num_bins(), params.feature_dim());
    double reward_sum = 0.0, length_sum = 0.0, p_sum = 0.0, correct_sum = 0.0;
    double easy_len = 0.0, easy_n = 0.0, hard_len = 0.0, hard_n = 0.0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const TaskSlot& slot = slots[i];
        gradient += slot.gradient;
        reward_sum += slot.reward_sum;
        length_sum += slot.length_sum;
        p_sum += slot.p_solved;
        correct_sum += slot.correct_sum;
        if (tasks[i].pool == TaskPool::easy_pool) {
            easy_len += slot.length_sum;
            easy_n += config.k_rollouts;
        } else {
            hard_len += slot.length_sum;
            hard_n += config.k_rollouts;
        }
    }
    const double n_rollouts = static_cast<double>(tasks.size()) * config.k_rollouts;
    gradient *= 1.0 / n_rollouts;
    if (!gradient.all_finite()) throw NonFiniteGradientError(step);

    StepResult result{params, gradient, {}};
    Matrix delta = gradient;
    delta *= config.learning_rate;
    result.params.weights += delta;
    if (!result.params.weights.all_finite()) throw NonFiniteGradientError(step);

    StepRecord& rec = result.record;
    rec.step = step;
    rec.mean_reward = reward_sum / n_rollouts;
    rec.mean_length = length_sum / n_rollouts;
    rec.mean_solve_rate = p_sum / static_cast<double>(tasks.size());
    rec.mean_accuracy = correct_sum / n_rollouts;
    rec.grad_norm = gradient.frobenius_norm();
    rec.mean_length_easy = nan_if_empty(easy_len, easy_n);
    rec.mean_length_hard = nan_if_empty(hard_len, hard_n);
    return result;
}

TrainResult run_training(const TrainConfig& config, int workers, const StepCallback& on_step) {
    config.validate();
    TrainResult result;
    result.policy.params = PolicyParams::zeros(config.bins, config.feature_dim);
    result.policy.forced_bin = config.forced_bin();
    result.log.records.reserve(static_cast<std::size_t>(config.steps));
    for (int step = 1; step <= config.steps; ++step) {
        const auto tasks = sample_task_batch(config, step);
        StepResult sr = training_step(result.policy.params, tasks, config, step, workers);
        result.policy.params = std::move(sr.params);
        result.log.records.push_back(sr.record);
        if (on_step) on_step(sr.record, result.policy.params);
    }
    return result;
}

}  // namespace alp
