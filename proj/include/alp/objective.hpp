#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alp/rollout.hpp"

namespace alp {

enum class ObjectiveVariant { alp, uniform_penalty, fixed_length, clipped_reward };
enum class AdvantageKind { grpo, rloo };

std::string to_string(ObjectiveVariant v);
std::string to_string(AdvantageKind k);
ObjectiveVariant parse_objective_variant(std::string_view s);
AdvantageKind parse_advantage_kind(std::string_view s);

// Default per-variant parameter when ObjectiveConfig::variant_param is unset.
inline constexpr double kDefaultUniformCoefficient = 3e-3;
inline constexpr double kDefaultForcedLength = 2048.0;
inline constexpr double kDefaultClipCap = 2048.0;

/// Reward configuration shared by ALP and the baseline objectives.
///
/// `clip_floor` defaults to 1/K. `norm_constant` unset means the length
/// term uses raw token counts; when set, lengths are divided by it.
/// `variant_param` is the uniform coefficient, the forced length or the
/// clip cap depending on `variant`.
struct ObjectiveConfig {
    double beta = 1e-7;
    int k_rollouts = 16;
    std::optional<double> clip_floor;
    std::optional<double> norm_constant;
    ObjectiveVariant variant = ObjectiveVariant::alp;
    std::optional<double> variant_param;

    double effective_clip_floor() const;
    double effective_length(int length_tokens) const;
    double resolved_variant_param() const;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Mean of the indicator values. Throws on an empty list.
double compute_solve_rate(std::span<const bool> correct_flags);
double compute_solve_rate(std::span<const Rollout> rollouts);

double clipped_solve_rate(double p, const ObjectiveConfig& config);

/// 1[correct] - beta * L_eff * max(p_solved, clip_floor).
double alp_reward(int length_tokens, bool correct, double p_solved, const ObjectiveConfig& config);

struct GroupContext {
    double p_solved = 0.0;
};

/// Reward for the non-ALP variants.
double baseline_reward(int length_tokens, bool correct, const GroupContext& group,
                       const ObjectiveConfig& config);

/// Dispatches on config.variant.
double rollout_reward(int length_tokens, bool correct, double p_solved,
                      const ObjectiveConfig& config);

inline constexpr double kAdvantageEpsilon = 1e-8;

/// (r - mean) / (population std + 1e-8).
std::vector<double> grpo_advantages(std::span<const double> rewards);

/// r_i - mean of the other K-1 rewards.
std::vector<double> rloo_advantages(std::span<const double> rewards);

std::vector<double> compute_advantages(AdvantageKind kind, std::span<const double> rewards);

}  // namespace alp
