#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace alp {

/// One external model response.
struct TraceRecord {
    std::string problem_id;
    std::string response;
    std::optional<bool> correct;
    std::optional<std::int64_t> token_count;
};

enum class BehaviorCategory {
    repetitions,
    problem_setup,
    exploration,
    verification,
    conclusion,
    backtracking,
    planning,
};

inline constexpr std::array<BehaviorCategory, 7> kAllCategories = {
    BehaviorCategory::repetitions,  BehaviorCategory::problem_setup, BehaviorCategory::exploration,
    BehaviorCategory::verification, BehaviorCategory::conclusion,    BehaviorCategory::backtracking,
    BehaviorCategory::planning,
};

std::string to_string(BehaviorCategory c);
BehaviorCategory parse_behavior_category(std::string_view name);

struct BehaviorCounts {
    std::uint64_t repetitions = 0;
    std::uint64_t problem_setup = 0;
    std::uint64_t exploration = 0;
    std::uint64_t verification = 0;
    std::uint64_t conclusion = 0;
    std::uint64_t backtracking = 0;
    std::uint64_t planning = 0;

    std::uint64_t get(BehaviorCategory c) const;
    std::uint64_t& get(BehaviorCategory c);
    BehaviorCounts& operator+=(const BehaviorCounts& other);
    bool operator==(const BehaviorCounts&) const = default;
};

/// Lowercases, maps curly apostrophes to ', turns every other non-word byte
/// into a separator and keeps apostrophes only between two word characters.
std::vector<std::string> normalize_words(std::string_view text);

/// Keyword phrases of a category (backtracking merges correction,
/// reconsideration and restart). Empty for repetitions.
const std::vector<std::string>& category_keywords(BehaviorCategory c);

/// Non-overlapping, greedy left-to-right, whole-word keyword count. For
/// repetitions this forwards to count_repetitions.
std::uint64_t count_category(std::string_view text, BehaviorCategory category);
std::uint64_t count_category(std::string_view text, std::string_view category);

/// Sum over distinct 5-word windows of (occurrences - 1).
std::uint64_t count_repetitions(std::string_view text);
std::uint64_t count_repetitions(const std::vector<std::string>& words);

BehaviorCounts count_behaviors(std::string_view text);

struct CorpusReport {
    std::size_t records = 0;
    std::size_t rejects = 0;
    BehaviorCounts totals;

    /// Mean per record; unset for an empty corpus.
    std::optional<double> mean(BehaviorCategory c) const;
};

/// Parses one JSON Lines record; nullopt when it does not match the schema.
std::optional<TraceRecord> parse_trace_record(std::string_view line);

using TraceCallback = std::function<void(const TraceRecord&, const BehaviorCounts&)>;

/// Streams records from `in`, one JSON object per line. Blank lines are
/// ignored; malformed lines are tallied in `rejects`.
CorpusReport analyze_corpus(std::istream& in, const TraceCallback& on_record = {});

}  // namespace alp
