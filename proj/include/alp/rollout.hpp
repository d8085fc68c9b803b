#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace alp {

using TaskId = std::uint64_t;

/// One sampled attempt at a task.
struct Rollout {
    TaskId task_id = 0;
    std::size_t bin_index = 0;
    int length_tokens = 0;
    bool correct = false;
    double log_prob = 0.0;
};

/// The K rollouts drawn for one task and their empirical solve rate.
struct RolloutGroup {
    TaskId task_id = 0;
    std::vector<Rollout> rollouts;
    double p_solved = 0.0;
};

}  // namespace alp
