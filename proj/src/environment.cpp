#include "alp/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace alp {

std::string to_string(TaskPool pool) {
    return pool == TaskPool::easy_pool ? "easy_pool" : "hard_pool";
}

void EnvConfig::validate() const {
    if (!(ceiling_slope >= 0.0 && ceiling_slope <= 1.0))
        throw std::invalid_argument("env.ceiling_slope: must lie in [0, 1]");
    if (!(std::isfinite(length_scale_base) && length_scale_base > 0.0))
        throw std::invalid_argument("env.length_scale_base: must be > 0");
    if (!std::isfinite(length_scale_rate))
        throw std::invalid_argument("env.length_scale_rate: must be finite");
    if (!(std::isfinite(feature_noise_sd) && feature_noise_sd >= 0.0))
        throw std::invalid_argument("env.feature_noise_sd: must be >= 0");
    if (!(mixture_hard_fraction >= 0.0 && mixture_hard_fraction <= 1.0))
        throw std::invalid_argument("env.mixture_hard_fraction: must lie in [0, 1]");
}

double accuracy_ceiling(double difficulty, const EnvConfig& env) {
    return 1.0 - env.ceiling_slope * difficulty;
}

double length_scale(double difficulty, const EnvConfig& env) {
    return env.length_scale_base * std::exp(env.length_scale_rate * difficulty);
}

double solve_probability(double difficulty, double length_tokens, const EnvConfig& env) {
    if (!(difficulty >= 0.0 && difficulty <= 1.0))
        throw std::invalid_argument("difficulty outside [0, 1]");
    if (!(length_tokens > 0.0)) return 0.0;
    const double saturation =
        -std::expm1(-length_tokens / length_scale(difficulty, env));
    return std::clamp(accuracy_ceiling(difficulty, env) * saturation, 0.0, 1.0);
}

Task sample_task(const EnvConfig& env, RandomStream& stream, TaskId id) {
    Task task;
    task.id = id;
    const bool hard = stream.uniform() < env.mixture_hard_fraction;
    task.pool = hard ? TaskPool::hard_pool : TaskPool::easy_pool;
    task.difficulty = hard ? stream.uniform(kHardPoolLo, kHardPoolHi)
                           : stream.uniform(kEasyPoolLo, kEasyPoolHi);
    const double noise = stream.normal(0.0, env.feature_noise_sd);
    task.feature = std::clamp(task.difficulty + noise, 0.0, 1.0);
    return task;
}

bool resolve(const Task& task, int length_tokens, const EnvConfig& env, RandomStream& stream) {
    return stream.bernoulli(solve_probability(task.difficulty, length_tokens, env));
}

}  // namespace alp
