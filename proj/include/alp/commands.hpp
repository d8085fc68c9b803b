#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace alp {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr int kConfigSchemaVersion = 1;
inline constexpr const char* kOutputRootEnv = "ALP_OUTPUT_ROOT";

// Exit statuses shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Flags common to train / eval / sweep.
struct CommandOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> workers;
};

/// Resolves the output directory: --out, then config output_dir, then
/// $ALP_OUTPUT_ROOT/<command>, then runs/<command>.
std::filesystem::path resolve_output_dir(const std::optional<std::string>& flag,
                                         const std::string& config_dir, const std::string& command);

/// Parses "0,0.3,0.6"; throws std::invalid_argument on empty or bad input.
std::vector<double> parse_fractions(const std::string& text);

int cmd_train(const CommandOptions& opts, std::ostream& log);
int cmd_eval(const std::string& checkpoint, const CommandOptions& opts, std::ostream& log);
int cmd_sweep(const std::string& checkpoint, const std::optional<std::string>& fractions,
              const CommandOptions& opts, std::ostream& log);
int cmd_analyze(const std::string& traces_path, const std::optional<std::string>& out_dir,
                std::ostream& log);

}  // namespace alp
