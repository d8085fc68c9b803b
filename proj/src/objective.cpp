#include "alp/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace alp {

std::string to_string(ObjectiveVariant v) {
    switch (v) {
        case ObjectiveVariant::alp: return "alp";
        case ObjectiveVariant::uniform_penalty: return "uniform_penalty";
        case ObjectiveVariant::fixed_length: return "fixed_length";
        case ObjectiveVariant::clipped_reward: return "clipped_reward";
    }
    throw std::invalid_argument("unknown objective variant");
}

std::string to_string(AdvantageKind k) {
    switch (k) {
        case AdvantageKind::grpo: return "grpo";
        case AdvantageKind::rloo: return "rloo";
    }
    throw std::invalid_argument("unknown advantage kind");
}

ObjectiveVariant parse_objective_variant(std::string_view s) {
    if (s == "alp") return ObjectiveVariant::alp;
    if (s == "uniform_penalty") return ObjectiveVariant::uniform_penalty;
    if (s == "fixed_length") return ObjectiveVariant::fixed_length;
    if (s == "clipped_reward") return ObjectiveVariant::clipped_reward;
    throw std::invalid_argument("unknown objective variant '" + std::string(s) + "'");
}

AdvantageKind parse_advantage_kind(std::string_view s) {
    if (s == "grpo") return AdvantageKind::grpo;
    if (s == "rloo") return AdvantageKind::rloo;
    throw std::invalid_argument("unknown advantage kind '" + std::string(s) + "'");
}

double ObjectiveConfig::effective_clip_floor() const {
    return clip_floor ? *clip_floor : 1.0 / static_cast<double>(k_rollouts);
}

double ObjectiveConfig::effective_length(int length_tokens) const {
    const auto len = static_cast<double>(length_tokens);
    return norm_constant ? len / *norm_constant : len;
}

double ObjectiveConfig::resolved_variant_param() const {
    if (variant_param) return *variant_param;
    switch (variant) {
        case ObjectiveVariant::uniform_penalty: return kDefaultUniformCoefficient;
        case ObjectiveVariant::fixed_length: return kDefaultForcedLength;
        case ObjectiveVariant::clipped_reward: return kDefaultClipCap;
        case ObjectiveVariant::alp: return 0.0;
    }
    throw std::invalid_argument("unknown objective variant");
}

void ObjectiveConfig::validate() const {
    if (!std::isfinite(beta) || beta < 0.0)
        throw std::invalid_argument("objective.beta: must be finite and >= 0");
    if (k_rollouts < 2) throw std::invalid_argument("objective.k_rollouts: must be >= 2");
    if (clip_floor && !(*clip_floor > 0.0 && *clip_floor <= 1.0))
        throw std::invalid_argument("objective.clip_floor: must lie in (0, 1]");
    if (norm_constant && !(std::isfinite(*norm_constant) && *norm_constant > 0.0))
        throw std::invalid_argument("objective.norm_constant: must be > 0 or \"none\"");
    if (variant_param) {
        const double v = *variant_param;
        if (!std::isfinite(v)) throw std::invalid_argument("objective.variant_param: must be finite");
        if (variant == ObjectiveVariant::fixed_length && v <= 0.0)
            throw std::invalid_argument("objective.variant_param: forced length must be > 0");
        if (v < 0.0) throw std::invalid_argument("objective.variant_param: must be >= 0");
    }
}

double compute_solve_rate(std::span<const bool> correct_flags) {
    if (correct_flags.empty()) throw std::invalid_argument("empty rollout group");
    const auto solved = std::count(correct_flags.begin(), correct_flags.end(), true);
    return static_cast<double>(solved) / static_cast<double>(correct_flags.size());
}

double compute_solve_rate(std::span<const Rollout> rollouts) {
    if (rollouts.empty()) throw std::invalid_argument("empty rollout group");
    const auto solved = std::count_if(rollouts.begin(), rollouts.end(),
                                      [](const Rollout& r) { return r.correct; });
    return static_cast<double>(solved) / static_cast<double>(rollouts.size());
}

double clipped_solve_rate(double p, const ObjectiveConfig& config) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("solve rate outside [0, 1]");
    return std::max(p, config.effective_clip_floor());
}

double alp_reward(int length_tokens, bool correct, double p_solved, const ObjectiveConfig& config) {
    if (config.variant != ObjectiveVariant::alp)
        throw std::invalid_argument("alp_reward called with a baseline variant");
    if (length_tokens < 0) throw std::invalid_argument("negative length");
    const double weight = clipped_solve_rate(p_solved, config);
    const double accuracy = correct ? 1.0 : 0.0;
    return accuracy - config.beta * config.effective_length(length_tokens) * weight;
}

double baseline_reward(int length_tokens, bool correct, const GroupContext& /*group*/,
                       const ObjectiveConfig& config) {
    if (length_tokens < 0) throw std::invalid_argument("negative length");
    const double accuracy = correct ? 1.0 : 0.0;
    const double param = config.resolved_variant_param();
    switch (config.variant) {
        case ObjectiveVariant::uniform_penalty:
            return correct ? accuracy - param * config.effective_length(length_tokens) : 0.0;
        case ObjectiveVariant::clipped_reward:
            return static_cast<double>(length_tokens) <= param ? accuracy : 0.0;
        case ObjectiveVariant::fixed_length:
            return accuracy;
        case ObjectiveVariant::alp:
            break;
    }
    throw std::invalid_argument("baseline_reward: unknown or non-baseline variant");
}

double rollout_reward(int length_tokens, bool correct, double p_solved,
                      const ObjectiveConfig& config) {
    if (config.variant == ObjectiveVariant::alp)
        return alp_reward(length_tokens, correct, p_solved, config);
    return baseline_reward(length_tokens, correct, GroupContext{p_solved}, config);
}

std::vector<double> grpo_advantages(std::span<const double> rewards) {
    const auto k = static_cast<double>(rewards.size());
    if (rewards.size() < 2) throw std::invalid_argument("advantages need at least two rewards");
    const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / k;
    double ss = 0.0;
    for (double r : rewards) ss += (r - mean) * (r - mean);
    const double denom = std::sqrt(ss / k) + kAdvantageEpsilon;
    std::vector<double> out;
    out.reserve(rewards.size());
    for (double r : rewards) out.push_back((r - mean) / denom);
    return out;
}

std::vector<double> rloo_advantages(std::span<const double> rewards) {
    if (rewards.size() < 2) throw std::invalid_argument("advantages need at least two rewards");
    const double total = std::accumulate(rewards.begin(), rewards.end(), 0.0);
    const auto others = static_cast<double>(rewards.size() - 1);
    std::vector<double> out;
    out.reserve(rewards.size());
    for (double r : rewards) out.push_back(r - (total - r) / others);
    return out;
}

std::vector<double> compute_advantages(AdvantageKind kind, std::span<const double> rewards) {
    return kind == AdvantageKind::grpo ? grpo_advantages(rewards) : rloo_advantages(rewards);
}

}  // namespace alp
