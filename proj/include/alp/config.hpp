#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "alp/trainer.hpp"

namespace alp {

struct EvalSettings {
    int n_tasks = 500;
    int n_samples = 64;
    std::vector<double> sweep_fractions = {0.0, 0.15, 0.3, 0.45, 0.6};
    int sweep_tasks = 100;
    int sweep_samples = 16;
};

/// The single document behind every subcommand. `seed` feeds training,
/// evaluation and the environment; `output_dir` empty means
/// $ALP_OUTPUT_ROOT/<command> (or runs/<command>).
struct ExperimentConfig {
    std::uint64_t seed = 42;
    int workers = 1;
    std::string output_dir;
    TrainConfig train;
    EvalSettings eval;

    void validate() const;
};

/// Config error carrying the dotted path of the offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string key, const std::string& what)
        : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

nlohmann::json config_to_json(const ExperimentConfig& config);

/// Reads every known key, defaulting the missing ones; unknown keys and type
/// mismatches throw ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Applies "dotted.path=value". The value is parsed as JSON when possible
/// and taken as a plain string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Loads `path` (or the defaults when empty), applies overrides in order and
/// validates the result.
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

}  // namespace alp
