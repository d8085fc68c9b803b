#include "alp/traces.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

namespace alp {

std::string to_string(BehaviorCategory c) {
    switch (c) {
        case BehaviorCategory::repetitions: return "repetitions";
        case BehaviorCategory::problem_setup: return "problem_setup";
        case BehaviorCategory::exploration: return "exploration";
        case BehaviorCategory::verification: return "verification";
        case BehaviorCategory::conclusion: return "conclusion";
        case BehaviorCategory::backtracking: return "backtracking";
        case BehaviorCategory::planning: return "planning";
    }
    throw std::invalid_argument("unknown behavior category");
}

BehaviorCategory parse_behavior_category(std::string_view name) {
    for (BehaviorCategory c : kAllCategories)
        if (to_string(c) == name) return c;
    throw std::invalid_argument("unknown behavior category '" + std::string(name) + "'");
}

std::uint64_t BehaviorCounts::get(BehaviorCategory c) const {
    return const_cast<BehaviorCounts*>(this)->get(c);
}

std::uint64_t& BehaviorCounts::get(BehaviorCategory c) {
    switch (c) {
        case BehaviorCategory::repetitions: return repetitions;
        case BehaviorCategory::problem_setup: return problem_setup;
        case BehaviorCategory::exploration: return exploration;
        case BehaviorCategory::verification: return verification;
        case BehaviorCategory::conclusion: return conclusion;
        case BehaviorCategory::backtracking: return backtracking;
        case BehaviorCategory::planning: return planning;
    }
    throw std::invalid_argument("unknown behavior category");
}

BehaviorCounts& BehaviorCounts::operator+=(const BehaviorCounts& other) {
    for (BehaviorCategory c : kAllCategories) get(c) += other.get(c);
    return *this;
}

namespace {

bool is_word_byte(unsigned char ch) {
    return (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch >= 0x80;
}

std::string fold(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto ch = static_cast<unsigned char>(text[i]);
        // U+2018 / U+2019 (E2 80 98 / E2 80 99)
        if (ch == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x80 &&
            (static_cast<unsigned char>(text[i + 2]) == 0x98 ||
             static_cast<unsigned char>(text[i + 2]) == 0x99)) {
            out.push_back('\'');
            i += 2;
            continue;
        }
        out.push_back(ch >= 'A' && ch <= 'Z' ? static_cast<char>(ch - 'A' + 'a') : static_cast<char>(ch));
    }
    return out;
}

const std::vector<std::string>& raw_keywords(BehaviorCategory c) {
    static const std::map<BehaviorCategory, std::vector<std::string>> lists = {
        {BehaviorCategory::problem_setup,
         {"let me", "we have", "given that", "the problem states", "we need to find", "we are asked"}},
        {BehaviorCategory::exploration,
         {"what if", "suppose", "consider", "try", "perhaps", "let's see", "maybe we can",
          "alternatively"}},
        {BehaviorCategory::verification,
         {"check", "verify", "confirm", "make sure", "double-check", "let's verify", "to confirm",
          "checking our work"}},
        {BehaviorCategory::conclusion,
         {"therefore", "thus", "so the answer is", "final answer", "in conclusion", "this gives us",
          "the result is"}},
        {BehaviorCategory::backtracking,
         {// correction
          "wait", "actually", "oh no", "I made an error", "let me fix", "that's wrong", "my mistake",
          "correction",
          // reconsideration
          "on second thought", "alternatively", "or maybe", "hmm", "but wait", "hold on",
          "rethinking this",
          // restart
          "let me start over", "from the beginning", "scratch that", "starting fresh", "let's restart",
          "back to square one"}},
        {BehaviorCategory::planning,
         {"first", "then", "next", "finally", "step by step", "my plan is", "I'll start with",
          "followed by"}},
        {BehaviorCategory::repetitions, {}},
    };
    return lists.at(c);
}

using Phrase = std::vector<std::string>;

// Normalized phrases, longest first so that "but wait" wins over "wait".
const std::vector<Phrase>& phrases(BehaviorCategory c) {
    static const auto table = [] {
        std::map<BehaviorCategory, std::vector<Phrase>> t;
        for (BehaviorCategory cat : kAllCategories) {
            std::vector<Phrase> list;
            for (const auto& kw : raw_keywords(cat)) list.push_back(normalize_words(kw));
            std::sort(list.begin(), list.end());
            list.erase(std::unique(list.begin(), list.end()), list.end());
            std::stable_sort(list.begin(), list.end(),
                             [](const Phrase& a, const Phrase& b) { return a.size() > b.size(); });
            t[cat] = std::move(list);
        }
        return t;
    }();
    return table.at(c);
}

std::uint64_t count_phrases(const std::vector<std::string>& words, BehaviorCategory c) {
    const auto& list = phrases(c);
    std::uint64_t count = 0;
    std::size_t i = 0;
    while (i < words.size()) {
        std::size_t advance = 1;
        for (const Phrase& p : list) {
            if (p.size() > words.size() - i) continue;
            if (std::equal(p.begin(), p.end(), words.begin() + static_cast<std::ptrdiff_t>(i))) {
                ++count;
                advance = p.size();
                break;
            }
        }
        i += advance;
    }
    return count;
}

std::uint64_t count_in_words(const std::vector<std::string>& words, BehaviorCategory c) {
    if (c == BehaviorCategory::repetitions) return count_repetitions(words);
    return count_phrases(words, c);
}

}  // namespace

std::vector<std::string> normalize_words(std::string_view text) {
    const std::string folded = fold(text);
    std::vector<std::string> words;
    std::string current;
    for (std::size_t i = 0; i < folded.size(); ++i) {
        const auto ch = static_cast<unsigned char>(folded[i]);
        if (is_word_byte(ch)) {
            current.push_back(static_cast<char>(ch));
        } else if (ch == '\'' && !current.empty() && i + 1 < folded.size() &&
                   is_word_byte(static_cast<unsigned char>(folded[i + 1]))) {
            current.push_back('\'');
        } else if (!current.empty()) {
            words.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

const std::vector<std::string>& category_keywords(BehaviorCategory c) { return raw_keywords(c); }

std::uint64_t count_category(std::string_view text, BehaviorCategory category) {
    return count_in_words(normalize_words(text), category);
}

std::uint64_t count_category(std::string_view text, std::string_view category) {
    return count_category(text, parse_behavior_category(category));
}

std::uint64_t count_repetitions(const std::vector<std::string>& words) {
    constexpr std::size_t window = 5;
    if (words.size() < window) return 0;
    std::unordered_map<std::string, std::uint64_t> seen;
    std::uint64_t repeats = 0;
    for (std::size_t i = 0; i + window <= words.size(); ++i) {
        std::string key = words[i];
        for (std::size_t j = 1; j < window; ++j) {
            key.push_back(' ');
            key += words[i + j];
        }
        if (seen[key]++ > 0) ++repeats;
    }
    return repeats;
}

std::uint64_t count_repetitions(std::string_view text) {
    return count_repetitions(normalize_words(text));
}

BehaviorCounts count_behaviors(std::string_view text) {
    const auto words = normalize_words(text);
    BehaviorCounts counts;
    for (BehaviorCategory c : kAllCategories) counts.get(c) = count_in_words(words, c);
    return counts;
}

std::optional<double> CorpusReport::mean(BehaviorCategory c) const {
    if (records == 0) return std::nullopt;
    return static_cast<double>(totals.get(c)) / static_cast<double>(records);
}

std::optional<TraceRecord> parse_trace_record(std::string_view line) {
    using nlohmann::json;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;

    TraceRecord rec;
    const auto id = j.find("problem_id");
    if (id == j.end()) return std::nullopt;
    if (id->is_string())
        rec.problem_id = id->get<std::string>();
    else if (id->is_number_integer())
        rec.problem_id = id->dump();
    else
        return std::nullopt;

    const auto resp = j.find("response");
    if (resp == j.end() || !resp->is_string()) return std::nullopt;
    rec.response = resp->get<std::string>();

    if (const auto c = j.find("correct"); c != j.end() && !c->is_null()) {
        if (!c->is_boolean()) return std::nullopt;
        rec.correct = c->get<bool>();
    }
    if (const auto t = j.find("token_count"); t != j.end() && !t->is_null()) {
        if (!t->is_number_integer() || t->get<std::int64_t>() < 0) return std::nullopt;
        rec.token_count = t->get<std::int64_t>();
    }
    return rec;
}

CorpusReport analyze_corpus(std::istream& in, const TraceCallback& on_record) {
    CorpusReport report;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        const auto record = parse_trace_record(line);
        if (!record) {
            ++report.rejects;
            continue;
        }
        const BehaviorCounts counts = count_behaviors(record->response);
        report.totals += counts;
        ++report.records;
        if (on_record) on_record(*record, counts);
    }
    return report;
}

}  // namespace alp
