#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "alp/random.hpp"
#include "alp/rollout.hpp"

namespace alp {

enum class TaskPool { easy_pool, hard_pool };

std::string to_string(TaskPool pool);

/// Synthetic problem: latent difficulty plus a noisy observable of it.
struct Task {
    TaskId id = 0;
    double difficulty = 0.0;
    double feature = 0.0;
    TaskPool pool = TaskPool::easy_pool;
};

/// Solve-curve and task-distribution constants.
///
/// Accuracy ceiling c(d) = 1 - ceiling_slope * d, length scale
/// lambda(d) = length_scale_base * exp(length_scale_rate * d).
struct EnvConfig {
    double ceiling_slope = 0.6;
    double length_scale_base = 64.0;
    double length_scale_rate = 3.0;
    double feature_noise_sd = 0.05;
    double mixture_hard_fraction = 0.5;
    std::uint64_t seed = 42;

    void validate() const;
};

// Difficulty bands of the two pools.
inline constexpr double kEasyPoolLo = 0.0;
inline constexpr double kEasyPoolHi = 0.5;
inline constexpr double kHardPoolLo = 0.6;
inline constexpr double kHardPoolHi = 1.0;

double accuracy_ceiling(double difficulty, const EnvConfig& env);
double length_scale(double difficulty, const EnvConfig& env);

/// c(d) * (1 - exp(-L / lambda(d))).
double solve_probability(double difficulty, double length_tokens, const EnvConfig& env);

/// Draws pool, difficulty and feature from `stream` (four uniforms).
Task sample_task(const EnvConfig& env, RandomStream& stream, TaskId id = 0);

/// Bernoulli draw with parameter solve_probability(task.difficulty, L).
bool resolve(const Task& task, int length_tokens, const EnvConfig& env, RandomStream& stream);

}  // namespace alp
